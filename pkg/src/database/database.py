from sqlalchemy import create_engine, text
from sqlalchemy.orm import sessionmaker, Session
from sqlalchemy.pool import StaticPool
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Generator, Optional, Union

from .models import Base
from ..utils import get_logger

logger = get_logger(__name__)

# Engines and session makers per database URL
_engines: Dict[str, object] = {}
_session_makers: Dict[str, sessionmaker] = {}


def get_database_url(url: Optional[str] = None, out_dir: Union[str, Path, None] = None) -> str:
    """
    Resolve the catalog URL: an explicit URL wins, otherwise a SQLite file
    in the experiment output directory.
    """
    if url:
        return url
    if out_dir is None:
        return "sqlite://"
    path = Path(out_dir) / "catalog.sqlite"
    path.parent.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{path}"


def get_engine(url: str):
    """
    Get or create the engine for ``url``
    """
    if url not in _engines:
        if url.startswith("sqlite"):
            engine = create_engine(
                url,
                poolclass=StaticPool,
                connect_args={"check_same_thread": False},
                echo=False
            )
        else:
            engine = create_engine(
                url,
                pool_size=5,
                max_overflow=10,
                pool_pre_ping=True,
                echo=False
            )
        _engines[url] = engine
        logger.info(f"Catalog engine created for: {url.split('@')[-1] if '@' in url else url}")

    return _engines[url]


def get_session(url: str) -> Session:
    """
    Get a new session on the catalog at ``url``
    """
    if url not in _session_makers:
        _session_makers[url] = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(url))
    return _session_makers[url]()


@contextmanager
def get_db(url: str) -> Generator[Session, None, None]:
    """
    Context manager for catalog sessions
    """
    session = get_session(url)
    try:
        yield session
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Catalog session error: {e}")
        raise
    finally:
        session.close()


def init_db(url: str, drop_all: bool = False) -> None:
    """
    Create catalog tables

    Args:
        url: Catalog database URL
        drop_all: If True, drop all existing tables first
    """
    engine = get_engine(url)

    try:
        if drop_all:
            logger.warning("Dropping all catalog tables")
            Base.metadata.drop_all(bind=engine)

        Base.metadata.create_all(bind=engine)
        logger.debug("Catalog tables ready")

    except Exception as e:
        logger.error(f"Catalog initialization failed: {e}")
        raise


def test_connection(url: str) -> bool:
    """
    Check that the catalog answers a trivial query
    """
    try:
        with get_db(url) as db:
            db.execute(text("SELECT 1"))
        return True
    except Exception as e:
        logger.error(f"Catalog connection test failed: {e}")
        return False
