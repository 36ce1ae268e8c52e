from .corpus import (
    TEST,
    TRAIN,
    envelope_coverage,
    generate_corpus,
    generate_trajectory,
    load_split,
    save_corpus,
    trajectory_path,
)
from .dataset import NormStats, RegressionDataset, TargetKind, build_dataset, state_std
from .excitation import (
    AprbsChannel,
    ExcitationController,
    ExcitationStreams,
    ImpulseChannel,
    InputPolicyConfig,
    aprbs,
    control_input_at,
)
from .ranges import InitRanges, masses_from_ratios, sample_initial_state

__all__ = [
    "AprbsChannel",
    "ExcitationController",
    "ExcitationStreams",
    "ImpulseChannel",
    "InitRanges",
    "InputPolicyConfig",
    "NormStats",
    "RegressionDataset",
    "TEST",
    "TRAIN",
    "TargetKind",
    "aprbs",
    "build_dataset",
    "control_input_at",
    "envelope_coverage",
    "generate_corpus",
    "generate_trajectory",
    "load_split",
    "masses_from_ratios",
    "sample_initial_state",
    "save_corpus",
    "state_std",
    "trajectory_path",
]
