from .models import ForecastRun, ModelInstanceRecord
from .database import get_database_url, get_db, get_engine, get_session, init_db, test_connection
from .crud import ForecastRunCRUD, ModelInstanceCRUD

__all__ = [
    "ForecastRun",
    "ModelInstanceRecord",
    "get_database_url",
    "get_db",
    "get_engine",
    "get_session",
    "init_db",
    "test_connection",
    "ForecastRunCRUD",
    "ModelInstanceCRUD",
]
