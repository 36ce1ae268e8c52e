from .experiment import (
    DEFAULT_HORIZONS,
    RUN_COLUMNS,
    ForecastReport,
    HorizonStats,
    ModelInstance,
    RunRecord,
    evaluate_experiment,
    forecast_bands,
)
from .forecast import (
    ForecastResult,
    pbm_error_summary,
    predicted_liquidus,
    rolling_forecast,
    rolling_forecast_batch,
    shows_drift,
)
from .metrics import BLOWUP_THRESHOLD, an_rfmse, cumulative_blowups, detect_blowup, final_state_error

__all__ = [
    "BLOWUP_THRESHOLD",
    "DEFAULT_HORIZONS",
    "ForecastReport",
    "ForecastResult",
    "HorizonStats",
    "ModelInstance",
    "RUN_COLUMNS",
    "RunRecord",
    "an_rfmse",
    "cumulative_blowups",
    "detect_blowup",
    "evaluate_experiment",
    "final_state_error",
    "forecast_bands",
    "pbm_error_summary",
    "predicted_liquidus",
    "rolling_forecast",
    "rolling_forecast_batch",
    "shows_drift",
]
