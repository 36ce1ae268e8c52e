"""
Forecast error metrics. All functions accept a single forecast of shape
(T, 8) or a stack of forecasts of shape (..., T, 8).
"""

import numpy as np

BLOWUP_THRESHOLD = 3.0


def an_rfmse(pred: np.ndarray, truth: np.ndarray, state_std: np.ndarray, n: int) -> np.ndarray:
    """
    Average normalized rolling-forecast MSE over steps 1..n.

    Row 0 is the shared initial state and is not counted; ``n == 0`` gives 0.
    The result is NaN when the predictions are not finite within the window.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if n == 0:
        return np.zeros(pred.shape[:-2]) if pred.ndim > 2 else 0.0
    if pred.shape[-2] <= n or truth.shape[-2] <= n:
        raise ValueError(f"Need at least {n + 1} rows, got pred {pred.shape} and truth {truth.shape}")
    with np.errstate(invalid="ignore", over="ignore"):
        scaled = (pred[..., 1:n + 1, :] - truth[..., 1:n + 1, :]) / np.asarray(state_std, dtype=float)
        value = np.mean(scaled ** 2, axis=(-2, -1))
    value = np.where(np.all(np.isfinite(pred[..., 1:n + 1, :]), axis=(-2, -1)), value, np.nan)
    return float(value) if np.ndim(value) == 0 else value


def final_state_error(pred: np.ndarray, truth: np.ndarray, state_std: np.ndarray, horizon: int) -> np.ndarray:
    """Normalized MSE of the single predicted state at ``horizon``."""
    with np.errstate(invalid="ignore", over="ignore"):
        scaled = (np.asarray(pred)[..., horizon, :] - np.asarray(truth)[..., horizon, :]) / np.asarray(state_std)
        return np.mean(scaled ** 2, axis=-1)


def detect_blowup(pred: np.ndarray, truth: np.ndarray, state_std: np.ndarray, horizon: int,
                  threshold: float = BLOWUP_THRESHOLD) -> np.ndarray:
    """
    True when the normalized MSE of the state at ``horizon`` exceeds
    ``threshold`` or any prediction up to ``horizon`` is non-finite.
    """
    pred = np.asarray(pred, dtype=float)
    if horizon >= pred.shape[-2]:
        raise ValueError(f"Horizon {horizon} is beyond a forecast of {pred.shape[-2]} rows")
    non_finite = ~np.all(np.isfinite(pred[..., :horizon + 1, :]), axis=(-2, -1))
    with np.errstate(invalid="ignore"):
        exceeded = final_state_error(pred, truth, state_std, horizon) > threshold
    flags = non_finite | exceeded
    return bool(flags) if np.ndim(flags) == 0 else flags


def cumulative_blowups(pred: np.ndarray, truth: np.ndarray, state_std: np.ndarray, horizons,
                       threshold: float = BLOWUP_THRESHOLD) -> np.ndarray:
    """
    Blow-up flags per horizon (last axis, horizons in ascending order); a
    forecast flagged at one horizon stays flagged at every later one.
    """
    flags = np.stack([np.asarray(detect_blowup(pred, truth, state_std, h, threshold)) for h in horizons], axis=-1)
    return np.logical_or.accumulate(flags, axis=-1)
