import numpy as np
import pytest

from src.pipeline import ExperimentConfig

# Initial-condition ranges with x2/x3 given as mass ratios
STATE_RANGES = {
    "x1": (2060.0, 4460.0),
    "c_x2": (0.02, 0.05),
    "c_x3": (0.09, 0.13),
    "x4": (11500.0, 16000.0),
    "x5": (9550.0, 10600.0),
    "x6": (940.0, 990.0),
    "x7": (790.0, 850.0),
    "x8": (555.0, 610.0),
}

INPUT_RANGES = {
    "u1": (0.0, 100.0),
    "u2": (7e3, 2.1e4),
    "u3": (0.0, 1.0),
    "u4": (0.0, 1200.0),
    "u5": (0.035, 0.065),
}


def draw_pairs(rng: np.random.Generator, n: int, c_x2=STATE_RANGES["c_x2"]):
    """n random (state, input) pairs; masses rebuilt from ratios by hand."""
    x1 = rng.uniform(*STATE_RANGES["x1"], n)
    c2 = rng.uniform(*c_x2, n)
    c3 = rng.uniform(*STATE_RANGES["c_x3"], n)
    x4 = rng.uniform(*STATE_RANGES["x4"], n)
    total = x4 / (1.0 - c2 - c3)
    states = np.column_stack([
        x1,
        c2 * total,
        c3 * total,
        x4,
        rng.uniform(*STATE_RANGES["x5"], n),
        rng.uniform(*STATE_RANGES["x6"], n),
        rng.uniform(*STATE_RANGES["x7"], n),
        rng.uniform(*STATE_RANGES["x8"], n),
    ])
    inputs = np.column_stack([rng.uniform(*INPUT_RANGES[f"u{i}"], n) for i in range(1, 6)])
    return states, inputs


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pair_sampler():
    return draw_pairs


@pytest.fixture
def typical_state():
    # c_x2 = 0.03, c_x3 = 0.11 at x4 = 13000
    total = 13000.0 / (1.0 - 0.03 - 0.11)
    return np.array([3000.0, 0.03 * total, 0.11 * total, 13000.0, 10000.0, 965.0, 820.0, 580.0])


@pytest.fixture
def typical_control():
    return np.array([0.0, 1.4e4, 0.0, 0.0, 0.05])


@pytest.fixture
def small_config(tmp_path) -> ExperimentConfig:
    """A configuration that runs the full pipeline in seconds."""
    shared = {"epochs": 2, "batch_size": 64, "validation_fraction": 0.1}
    return ExperimentConfig.from_dict({
        "seed": 7,
        "paths": {"out_dir": str(tmp_path / "run")},
        "simulation": {"dt": 10.0, "steps": 60},
        "datagen": {"n_train": 2, "n_test": 2},
        "training": {
            "instances": 2,
            "model_types": {
                "ddm_dense": {"kind": "DDM", "l1_lambda": 0.0, **shared},
                "ddm_sparse": {"kind": "DDM", "l1_lambda": 1e-4, **shared},
                "costa_dense": {"kind": "CoSTA", "l1_lambda": 0.0, **shared},
                "costa_sparse": {"kind": "CoSTA", "l1_lambda": 1e-4, **shared},
            },
        },
        "evaluation": {"horizons": [20, 40, 60], "band_trajectory": 1, "band_stride": 5},
        "logging": {"log_to_file": False, "log_to_console": False},
        "processing": {"num_workers": 1, "show_progress": False},
    })
