from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ..plant import INPUT_NAMES, STATE_NAMES

TRAJECTORY_COLUMNS = ["t", *STATE_NAMES, *INPUT_NAMES, "g1"]
FLOAT_FORMAT = "%.17g"


@dataclass
class Trajectory:
    """
    One simulated time series.

    ``states`` is (N+1, 8), ``inputs`` is (N+1, 5) and ``aux_g1`` holds the
    true liquidus temperature at every visited state.
    """

    dt: float
    states: np.ndarray
    inputs: np.ndarray
    aux_g1: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.aux_g1 = np.asarray(self.aux_g1, dtype=float)
        if self.dt <= 0:
            raise ValueError(f"Trajectory dt must be positive, got {self.dt}")
        if self.states.ndim != 2 or self.states.shape[1] != len(STATE_NAMES):
            raise ValueError(f"states must be (N+1, 8), got {self.states.shape}")
        if self.inputs.shape != (len(self.states), len(INPUT_NAMES)):
            raise ValueError(f"inputs must be ({len(self.states)}, 5), got {self.inputs.shape}")
        if self.aux_g1.shape != (len(self.states),):
            raise ValueError(f"aux_g1 must have length {len(self.states)}, got {self.aux_g1.shape}")
        if not (self.is_finite() and np.all(np.isfinite(self.aux_g1))):
            raise ValueError("Trajectory contains non-finite entries")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.dt

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.states)) and np.all(np.isfinite(self.inputs)))

    def to_frame(self) -> pd.DataFrame:
        data = np.column_stack([self.time, self.states, self.inputs, self.aux_g1])
        return pd.DataFrame(data, columns=TRAJECTORY_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, dt: Optional[float] = None) -> "Trajectory":
        missing = [c for c in TRAJECTORY_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Trajectory frame is missing columns {missing}")
        if dt is None:
            if len(frame) < 2:
                raise ValueError("dt cannot be inferred from a single-row trajectory")
            dt = float(frame["t"].iloc[1] - frame["t"].iloc[0])
        return cls(
            dt=dt,
            states=frame[list(STATE_NAMES)].to_numpy(dtype=float),
            inputs=frame[list(INPUT_NAMES)].to_numpy(dtype=float),
            aux_g1=frame["g1"].to_numpy(dtype=float),
        )

    def save_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return path

    @classmethod
    def load_csv(cls, path: Union[str, Path], dt: Optional[float] = None) -> "Trajectory":
        frame = pd.read_csv(path, float_precision="round_trip")
        return cls.from_frame(frame, dt=dt)
