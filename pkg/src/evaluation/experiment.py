"""
Cross product of model instances and test trajectories, reduced to
per-(model type, horizon) statistics.
"""

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..integrate import Trajectory
from ..predictor import Predictor
from ..utils import get_logger
from .forecast import predicted_liquidus, rolling_forecast_batch
from .metrics import BLOWUP_THRESHOLD, an_rfmse, cumulative_blowups

logger = get_logger(__name__)

RUN_COLUMNS = ["model_type", "instance", "trajectory", "horizon", "an_rfmse", "blowup"]
DEFAULT_HORIZONS = (1000, 3000, 5000)


@dataclass(frozen=True)
class ModelInstance:
    model_type: str
    instance: int
    predictor: Predictor


@dataclass(frozen=True)
class RunRecord:
    model_type: str
    instance: int
    trajectory: int
    horizon: int
    an_rfmse: Optional[float]
    blowup: bool


@dataclass
class HorizonStats:
    """Distribution of AN-RFMSE over runs that did not blow up."""

    n: int
    blowup_count: int
    mean: Optional[float] = None
    median: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    values: List[float] = field(default_factory=list)

    @classmethod
    def from_runs(cls, values: Sequence[Optional[float]], blowups: Sequence[bool]) -> "HorizonStats":
        kept = sorted(float(v) for v, b in zip(values, blowups) if not b and v is not None)
        stats = cls(n=len(values), blowup_count=int(sum(bool(b) for b in blowups)), values=kept)
        if kept:
            sample = np.asarray(kept)
            q1, median, q3 = np.percentile(sample, [25, 50, 75], method="linear")
            stats.mean = float(sample.mean())
            stats.median = float(median)
            stats.q1 = float(q1)
            stats.q3 = float(q3)
            stats.min = float(sample[0])
            stats.max = float(sample[-1])
        return stats


@dataclass
class ForecastReport:
    horizons: List[int]
    stats: Dict[str, Dict[int, HorizonStats]]
    records: List[RunRecord] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def model_types(self) -> List[str]:
        return list(self.stats)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "horizons": list(self.horizons),
            "model_types": self.model_types,
            "stats": {
                model_type: {str(h): asdict(s) for h, s in by_horizon.items()}
                for model_type, by_horizon in self.stats.items()
            },
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "ForecastReport":
        return cls(
            horizons=[int(h) for h in document["horizons"]],
            stats={
                model_type: {int(h): HorizonStats(**s) for h, s in by_horizon.items()}
                for model_type, by_horizon in document["stats"].items()
            },
            metadata=document.get("metadata", {}),
        )

    def save_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=1) + "\n")
        return path

    @classmethod
    def load_json(cls, path: Union[str, Path]) -> "ForecastReport":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def runs_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=RUN_COLUMNS)

    def save_runs_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.runs_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path


def _evaluate_model(
    model: ModelInstance,
    testset: Sequence[Trajectory],
    horizons: Sequence[int],
    state_std: np.ndarray,
    keep_trajectory: Optional[int],
    threshold: float,
):
    steps = horizons[-1]
    pred = rolling_forecast_batch(model.predictor, testset, steps)
    truth = np.stack([t.states[:steps + 1] for t in testset])
    scores = np.stack([np.atleast_1d(an_rfmse(pred, truth, state_std, h)) for h in horizons], axis=-1)
    flags = np.atleast_2d(cumulative_blowups(pred, truth, state_std, horizons, threshold))
    kept = pred[keep_trajectory] if keep_trajectory is not None else None
    return scores, flags, kept


def evaluate_experiment(
    models: Sequence[ModelInstance],
    testset: Sequence[Trajectory],
    horizons: Sequence[int],
    state_std: np.ndarray,
    workers: int = 1,
    metadata: Optional[Dict[str, Any]] = None,
    band_trajectory: Optional[int] = None,
    threshold: float = BLOWUP_THRESHOLD,
):
    """
    Forecast every test trajectory with every model instance.

    Returns the report and, when ``band_trajectory`` is set, the forecasts of
    that trajectory grouped by model type (instances stacked) for band data.
    """
    if not models or not testset or not horizons:
        raise ValueError("evaluate_experiment needs models, test trajectories and horizons")
    horizons = sorted(int(h) for h in horizons)
    logger.info(
        f"Evaluating {len(models)} model instances on {len(testset)} trajectories at horizons {horizons}"
    )

    ordered = sorted(models, key=lambda m: (m.model_type, m.instance))
    results = Parallel(n_jobs=workers)(
        delayed(_evaluate_model)(m, testset, horizons, state_std, band_trajectory, threshold) for m in ordered
    )

    records: List[RunRecord] = []
    bands: Dict[str, List[np.ndarray]] = {}
    for model, (scores, flags, kept) in zip(ordered, results):
        for j in range(len(testset)):
            for k, h in enumerate(horizons):
                value = scores[j, k]
                records.append(RunRecord(
                    model_type=model.model_type,
                    instance=model.instance,
                    trajectory=j,
                    horizon=h,
                    an_rfmse=None if np.isnan(value) else float(value),
                    blowup=bool(flags[j, k]),
                ))
        if kept is not None:
            bands.setdefault(model.model_type, []).append(kept)

    stats: Dict[str, Dict[int, HorizonStats]] = {}
    for model_type in sorted({m.model_type for m in ordered}):
        stats[model_type] = {}
        for h in horizons:
            runs = [r for r in records if r.model_type == model_type and r.horizon == h]
            summary = HorizonStats.from_runs([r.an_rfmse for r in runs], [r.blowup for r in runs])
            stats[model_type][h] = summary
            log = logger.warning if summary.blowup_count else logger.info
            log(f"{model_type} @ {h}: median={summary.median}, blow-ups {summary.blowup_count}/{summary.n}")

    report = ForecastReport(horizons=horizons, stats=stats, records=records, metadata=dict(metadata or {}))
    return report, {k: np.stack(v) for k, v in bands.items()}


def forecast_bands(
    forecasts: Dict[str, np.ndarray],
    predictors: Dict[str, Predictor],
    truth: Trajectory,
    stride: int = 10,
) -> pd.DataFrame:
    """
    Mean forecast and a mean +/- 3 sigma band across instances for every
    state and the implied liquidus temperature, one row per (type, variable, step).
    """
    frames = []
    for model_type in sorted(forecasts):
        stack = forecasts[model_type]
        steps = np.arange(0, stack.shape[1], stride)
        g1 = predicted_liquidus(predictors[model_type], stack)
        variables = {f"x{i + 1}": (stack[:, :, i], truth.states[:, i]) for i in range(8)}
        variables["g1"] = (g1, truth.aux_g1)
        for name, (values, observed) in variables.items():
            values = values[:, steps]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", category=RuntimeWarning)
                mean = np.nanmean(values, axis=0)
                spread = 3.0 * np.nanstd(values, axis=0)
            frames.append(pd.DataFrame({
                "model_type": model_type,
                "variable": name,
                "step": steps,
                "t": steps * truth.dt,
                "truth": observed[steps],
                "mean": mean,
                "lower": mean - spread,
                "upper": mean + spread,
            }))
    return pd.concat(frames, ignore_index=True)

