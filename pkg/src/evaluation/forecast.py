"""
Rolling forecasts: the model's own state estimates are fed forward with the
recorded true inputs, using forward Euler at the trajectory's timestep.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..integrate import Trajectory, euler_step
from ..plant import liquidus_temperature, mass_ratios
from ..predictor import ModelKind, Predictor
from .metrics import an_rfmse, cumulative_blowups


@dataclass
class ForecastResult:
    states: np.ndarray
    an_rfmse: Dict[int, Optional[float]] = field(default_factory=dict)
    blowup: Dict[int, bool] = field(default_factory=dict)
    first_non_finite: Optional[int] = None


def rolling_forecast_batch(p: Predictor, truths: Sequence[Trajectory], steps: int) -> np.ndarray:
    """
    Forecasts for several trajectories at once, shape (n, steps+1, 8).

    Once a forecast turns non-finite its remaining rows are NaN.
    """
    dts = {t.dt for t in truths}
    if len(dts) != 1:
        raise ValueError(f"Trajectories must share dt, got {sorted(dts)}")
    dt = dts.pop()
    if any(t.n_steps < steps for t in truths):
        raise ValueError(f"Every trajectory needs at least {steps} steps")

    inputs = np.stack([t.inputs[:steps + 1] for t in truths])
    pred = np.empty((len(truths), steps + 1, 8))
    pred[:, 0] = np.stack([t.states[0] for t in truths])
    with np.errstate(all="ignore"):
        for i in range(steps):
            rate = p.predict_derivative(pred[:, i], inputs[:, i], check=False)
            nxt = euler_step(rate, pred[:, i], dt)
            nxt[~np.all(np.isfinite(nxt), axis=1)] = np.nan
            pred[:, i + 1] = nxt
    return pred


def first_non_finite_step(pred: np.ndarray) -> Optional[int]:
    bad = ~np.all(np.isfinite(pred), axis=-1)
    return int(np.argmax(bad)) if np.any(bad) else None


def rolling_forecast(
    p: Predictor,
    truth: Trajectory,
    steps: int,
    state_std: Optional[np.ndarray] = None,
    horizons: Sequence[int] = (),
) -> ForecastResult:
    """
    Forecast ``steps`` steps from the true initial state of ``truth``.

    When ``state_std`` is given, AN-RFMSE and blow-up flags are filled in for
    each horizon (AN-RFMSE is None where the forecast is not finite).
    """
    if steps > truth.n_steps:
        raise ValueError(f"Cannot forecast {steps} steps on a trajectory of {truth.n_steps} steps")
    pred = rolling_forecast_batch(p, [truth], steps)[0]
    result = ForecastResult(states=pred, first_non_finite=first_non_finite_step(pred))
    if state_std is not None and horizons:
        horizons = sorted(horizons)
        observed = truth.states[:steps + 1]
        flags = cumulative_blowups(pred, observed, state_std, horizons)
        for h, flag in zip(horizons, flags):
            value = an_rfmse(pred, observed, state_std, h)
            result.an_rfmse[h] = None if np.isnan(value) else float(value)
            result.blowup[h] = bool(flag)
    return result


def predicted_liquidus(p: Predictor, pred: np.ndarray) -> np.ndarray:
    """The liquidus temperature a model implies along its forecast."""
    if p.kind is ModelKind.PBM:
        return np.full(pred.shape[:-1], p.consts.g1_ablated)
    with np.errstate(all="ignore"):
        return liquidus_temperature(*mass_ratios(pred, check=False))


def pbm_error_summary(p: Predictor, truth: Trajectory, steps: int) -> Dict[str, Any]:
    """
    Largest side-ledge mass and liquidus errors of a forecast over ``steps`` steps.

    The maxima are taken over the finite part of the forecast;
    ``first_non_finite`` is the step where it stopped being finite, if any.
    """
    pred = rolling_forecast_batch(p, [truth], steps)[0]
    first_bad = first_non_finite_step(pred)
    end = steps + 1 if first_bad is None else first_bad
    g1_pred = predicted_liquidus(p, pred[:end])
    return {
        "max_x1_error": float(np.max(np.abs(pred[:end, 0] - truth.states[:end, 0]))),
        "max_g1_error": float(np.max(np.abs(g1_pred - truth.aux_g1[:end]))),
        "first_non_finite": first_bad,
    }


def shows_drift(summary: Dict[str, Any], x1_error: float = 100.0, g1_error: float = 2.0) -> bool:
    """A forecast drifted if it blew up or both error maxima reach their bounds."""
    if summary["first_non_finite"] is not None:
        return True
    return summary["max_x1_error"] >= x1_error and summary["max_g1_error"] >= g1_error
