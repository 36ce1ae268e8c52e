"""
Regression pairs built from trajectories by forward differences.
"""

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Sequence, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from ..integrate import Trajectory
from ..plant import DEFAULT_CONSTANTS, LiquidusMode, N_FEATURES, N_STATES, PlantConstants, derivative
from ..utils import get_logger
from ..utils.exceptions import ShapeMismatchError

logger = get_logger(__name__)

FEATURE_COLUMNS = [f"f{i}" for i in range(1, N_FEATURES + 1)]
TARGET_COLUMNS = [f"t{i}" for i in range(1, N_STATES + 1)]

# Columns whose spread is below this are treated as constant (scale 1)
STD_FLOOR = 1e-9


class TargetKind(str, Enum):
    STATE_DERIVATIVE = "StateDerivative"
    RESIDUAL = "Residual"


@dataclass(frozen=True)
class NormStats:
    """Standardization statistics stored alongside datasets and models."""

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: np.ndarray
    target_std: np.ndarray
    state_std: np.ndarray
    target_kind: TargetKind

    def __post_init__(self):
        shapes = {
            "feature_mean": N_FEATURES, "feature_std": N_FEATURES,
            "target_mean": N_STATES, "target_std": N_STATES, "state_std": N_STATES,
        }
        for name, width in shapes.items():
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (width,):
                raise ShapeMismatchError(f"{name} must have shape ({width},), got {value.shape}")
            object.__setattr__(self, name, value)
        for name in ("feature_std", "target_std", "state_std"):
            if np.any(getattr(self, name) <= 0):
                raise ValueError(f"{name} must be strictly positive")
        object.__setattr__(self, "target_kind", TargetKind(self.target_kind))

    def normalize_features(self, features: np.ndarray) -> np.ndarray:
        return (features - self.feature_mean) / self.feature_std

    def normalize_targets(self, targets: np.ndarray) -> np.ndarray:
        return (targets - self.target_mean) / self.target_std

    def denormalize_targets(self, outputs: np.ndarray) -> np.ndarray:
        return outputs * self.target_std + self.target_mean

    def to_dict(self) -> Dict[str, object]:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "target_mean": self.target_mean.tolist(),
            "target_std": self.target_std.tolist(),
            "state_std": self.state_std.tolist(),
            "target_kind": self.target_kind.value,
        }

    @classmethod
    def from_dict(cls, values: Dict[str, object]) -> "NormStats":
        return cls(**{k: values[k] for k in (
            "feature_mean", "feature_std", "target_mean", "target_std", "state_std", "target_kind"
        )})


def _scale(columns: np.ndarray):
    scaler = StandardScaler().fit(columns)
    std = np.where(scaler.scale_ < STD_FLOOR, 1.0, scaler.scale_)
    return scaler.mean_.copy(), std


def state_std(trajectories: Sequence[Trajectory]) -> np.ndarray:
    """Per-state standard deviation over every state row of ``trajectories``."""
    _, std = _scale(np.concatenate([t.states for t in trajectories]))
    return std


@dataclass
class RegressionDataset:
    features: np.ndarray
    targets: np.ndarray
    target_kind: TargetKind
    norm_stats: NormStats

    def __post_init__(self):
        if len(self.features) != len(self.targets):
            raise ShapeMismatchError(
                f"{len(self.features)} feature rows but {len(self.targets)} target rows"
            )

    def __len__(self) -> int:
        return len(self.features)

    @property
    def train_std_x(self) -> np.ndarray:
        return self.norm_stats.state_std

    def normalized(self):
        """Standardized (features, targets)."""
        return (
            self.norm_stats.normalize_features(self.features),
            self.norm_stats.normalize_targets(self.targets),
        )

    def save(self, csv_path: Union[str, Path], stats_path: Union[str, Path, None] = None) -> Path:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(np.column_stack([self.features, self.targets]), columns=FEATURE_COLUMNS + TARGET_COLUMNS)
        frame.to_csv(csv_path, index=False, float_format="%.17g", lineterminator="\n")
        stats_path = Path(stats_path) if stats_path else csv_path.with_suffix(".stats.json")
        stats_path.write_text(json.dumps(self.norm_stats.to_dict(), indent=2) + "\n")
        return csv_path

    @classmethod
    def load(cls, csv_path: Union[str, Path], stats_path: Union[str, Path, None] = None) -> "RegressionDataset":
        csv_path = Path(csv_path)
        stats_path = Path(stats_path) if stats_path else csv_path.with_suffix(".stats.json")
        frame = pd.read_csv(csv_path, float_precision="round_trip")
        stats = NormStats.from_dict(json.loads(stats_path.read_text()))
        return cls(
            features=frame[FEATURE_COLUMNS].to_numpy(dtype=float),
            targets=frame[TARGET_COLUMNS].to_numpy(dtype=float),
            target_kind=stats.target_kind,
            norm_stats=stats,
        )


def build_dataset(
    trajectories: Sequence[Trajectory],
    target_kind: TargetKind,
    consts: PlantConstants = DEFAULT_CONSTANTS,
) -> RegressionDataset:
    """
    Pair (x_k, u_k) with the forward difference (x_{k+1} - x_k)/dt.

    For Residual targets the ablated plant derivative at (x_k, u_k) is
    subtracted from the forward difference.
    """
    if not trajectories:
        raise ValueError("build_dataset needs at least one trajectory")
    target_kind = TargetKind(target_kind)
    dts = {t.dt for t in trajectories}
    if len(dts) != 1:
        raise ValueError(f"Trajectories must share dt, got {sorted(dts)}")

    features, targets = [], []
    for trajectory in trajectories:
        x, u = trajectory.states, trajectory.inputs
        feature = np.column_stack([x[:-1], u[:-1]])
        target = np.diff(x, axis=0) / trajectory.dt
        if target_kind is TargetKind.RESIDUAL:
            target = target - derivative(x[:-1], u[:-1], consts, LiquidusMode.ABLATED)
        features.append(feature)
        targets.append(target)
    features = np.concatenate(features)
    targets = np.concatenate(targets)

    feature_mean, feature_std = _scale(features)
    target_mean, target_std = _scale(targets)
    stats = NormStats(
        feature_mean=feature_mean,
        feature_std=feature_std,
        target_mean=target_mean,
        target_std=target_std,
        state_std=state_std(trajectories),
        target_kind=target_kind,
    )
    logger.info(f"Built {target_kind.value} dataset with {len(features)} pairs from {len(trajectories)} trajectories")
    return RegressionDataset(features=features, targets=targets, target_kind=target_kind, norm_stats=stats)
