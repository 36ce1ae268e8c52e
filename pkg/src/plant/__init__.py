from .constants import (
    CellState,
    ControlInput,
    DEFAULT_CONSTANTS,
    INPUT_NAMES,
    LINEAR_STATES,
    LIQUIDUS_DEPENDENT,
    LiquidusMode,
    N_FEATURES,
    N_INPUTS,
    N_STATES,
    PlantConstants,
    STATE_NAMES,
    validate_control,
)
from .dynamics import (
    AuxQuantities,
    aux_quantities,
    derivative,
    liquidus_temperature,
    mass_ratios,
    residual_oracle,
)

__all__ = [
    "AuxQuantities",
    "CellState",
    "ControlInput",
    "DEFAULT_CONSTANTS",
    "INPUT_NAMES",
    "LINEAR_STATES",
    "LIQUIDUS_DEPENDENT",
    "LiquidusMode",
    "N_FEATURES",
    "N_INPUTS",
    "N_STATES",
    "PlantConstants",
    "STATE_NAMES",
    "aux_quantities",
    "derivative",
    "liquidus_temperature",
    "mass_ratios",
    "residual_oracle",
    "validate_control",
]
