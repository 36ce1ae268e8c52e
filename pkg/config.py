import os
from copy import deepcopy
from pathlib import Path
from typing import Dict, Any, Optional, Union
import yaml
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base paths
BASE_DIR = Path(__file__).parent
OUTPUT_DIR = BASE_DIR / "runs" / "default"
LOGS_DIR = BASE_DIR / "logs"

# Master seed of the whole experiment
MASTER_SEED = 0

# Plant simulation
SIMULATION_CONFIG = {
    "dt": 10.0,          # seconds
    "steps": 5000,       # per trajectory
    "constants": {},     # overrides of PlantConstants fields
}

# Ground-truth corpus
DATAGEN_CONFIG = {
    "n_train": 40,
    "n_test": 100,
    "max_resample_attempts": 3,
    "init_ranges": {},   # overrides of InitRanges fields
    "input_policy": {},  # overrides of InputPolicyConfig channels
}

# Network training, one entry per model type
_SHARED_TRAINING = {
    "learning_rate": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "epochs": 100,
    "batch_size": 128,
    "validation_fraction": 0.1,
    "prune": False,
    "prune_threshold": 1e-3,
}

TRAINING_CONFIG = {
    "instances": 10,
    "model_types": {
        "ddm_dense": {"kind": "DDM", "l1_lambda": 0.0, **_SHARED_TRAINING},
        "ddm_sparse": {"kind": "DDM", "l1_lambda": 1e-4, **_SHARED_TRAINING},
        "costa_dense": {"kind": "CoSTA", "l1_lambda": 0.0, **_SHARED_TRAINING},
        "costa_sparse": {"kind": "CoSTA", "l1_lambda": 1e-4, **_SHARED_TRAINING},
    },
}

# Rolling-forecast evaluation
EVALUATION_CONFIG = {
    "horizons": [1000, 3000, 5000],
    "blowup_threshold": 3.0,
    "include_pbm": True,
    "band_trajectory": 0,   # test trajectory used for forecast_bands.csv, None to skip
    "band_stride": 10,
}

# Run catalog; empty url means SQLite inside the output directory
DATABASE_CONFIG = {
    "url": os.getenv("CATALOG_DATABASE_URL", ""),
}

# Logging configuration
LOGGING_CONFIG = {
    "log_level": os.getenv("LOG_LEVEL", "INFO"),
    "log_to_console": True,
    "log_to_file": True,
    "log_dir": str(LOGS_DIR)
}

# Processing configuration
PROCESSING_CONFIG = {
    "num_workers": int(os.getenv("NUM_WORKERS", "1")),
    "show_progress": True,
}


def load_config_from_yaml(config_path: Union[str, Path, None] = None) -> Dict[str, Any]:
    """
    Load configuration from a YAML or JSON file if it exists.
    """
    if config_path is None:
        config_path = BASE_DIR / "config.yaml"

    if Path(config_path).exists():
        with open(config_path, 'r') as f:
            return yaml.safe_load(f) or {}

    return {}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def get_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Get complete configuration, merging defaults with the config file.
    """
    file_config = load_config_from_yaml(config_path)

    config = deepcopy({
        "seed": MASTER_SEED,
        "paths": {
            "base_dir": str(BASE_DIR),
            "out_dir": str(OUTPUT_DIR),
            "logs_dir": str(LOGS_DIR),
        },
        "simulation": SIMULATION_CONFIG,
        "datagen": DATAGEN_CONFIG,
        "training": TRAINING_CONFIG,
        "evaluation": EVALUATION_CONFIG,
        "database": DATABASE_CONFIG,
        "logging": LOGGING_CONFIG,
        "processing": PROCESSING_CONFIG
    })

    # Merge with the config file if it exists
    if file_config:
        _merge(config, file_config)

    return config
