"""
Initial-condition sampling.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

from ..utils.exceptions import ConfigurationError, ConversionError

Interval = Tuple[float, float]


@dataclass(frozen=True)
class InitRanges:
    """Sampling intervals for the initial state; x2/x3 are given as mass ratios."""

    x1: Interval = (2060.0, 4460.0)
    c_x2: Interval = (0.02, 0.05)
    c_x3: Interval = (0.09, 0.13)
    x4: Interval = (11500.0, 16000.0)
    x5: Interval = (9550.0, 10600.0)
    x6: Interval = (940.0, 990.0)
    x7: Interval = (790.0, 850.0)
    x8: Interval = (555.0, 610.0)

    def __post_init__(self):
        for name, (lo, hi) in asdict(self).items():
            if not lo <= hi:
                raise ConfigurationError(f"Empty initial-condition interval for {name}: [{lo}, {hi}]")

    def to_dict(self) -> Dict[str, list]:
        return {k: list(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, values: Dict[str, Interval]) -> "InitRanges":
        return cls(**{k: (float(v[0]), float(v[1])) for k, v in values.items()})


def masses_from_ratios(c_x2: float, c_x3: float, x4: float) -> Tuple[float, float]:
    """Alumina and AlF3 masses giving the requested ratios for cryolite mass ``x4``."""
    rest = 1.0 - c_x2 - c_x3
    if rest <= 0:
        raise ConversionError(f"Mass ratios c_x2={c_x2}, c_x3={c_x3} leave no room for cryolite")
    total = x4 / rest
    return c_x2 * total, c_x3 * total


def sample_initial_state(rng: np.random.Generator, ranges: InitRanges = InitRanges()) -> np.ndarray:
    """Draw one initial state uniformly from ``ranges``; returns an (8,) array."""
    x1 = rng.uniform(*ranges.x1)
    c_x2 = rng.uniform(*ranges.c_x2)
    c_x3 = rng.uniform(*ranges.c_x3)
    x4 = rng.uniform(*ranges.x4)
    x5 = rng.uniform(*ranges.x5)
    x6 = rng.uniform(*ranges.x6)
    x7 = rng.uniform(*ranges.x7)
    x8 = rng.uniform(*ranges.x8)
    x2, x3 = masses_from_ratios(c_x2, c_x3, x4)
    return np.array([x1, x2, x3, x4, x5, x6, x7, x8])
