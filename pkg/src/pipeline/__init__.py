from .schema import ExperimentConfig
from .commands import (
    cmd_all,
    cmd_eval,
    cmd_gen_data,
    cmd_report,
    cmd_train,
    cmd_train_all,
    model_path,
    dataset_path,
    report_frames,
    stats_from_report_data,
)

__all__ = [
    "ExperimentConfig",
    "cmd_all",
    "cmd_eval",
    "cmd_gen_data",
    "cmd_report",
    "cmd_train",
    "cmd_train_all",
    "model_path",
    "dataset_path",
    "report_frames",
    "stats_from_report_data",
]
