from .logging_config import setup_logging, get_logger
from .seeding import make_rng, derive_seed

__all__ = ["setup_logging", "get_logger", "make_rng", "derive_seed"]
