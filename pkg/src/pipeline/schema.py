"""
Validated experiment configuration.

The merged dict from ``config.get_config`` is checked here and turned into the
domain objects (plant constants, sampling ranges, input policy, train configs).
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..datagen import InitRanges, InputPolicyConfig
from ..nn import TrainConfig
from ..plant import PlantConstants
from ..utils import derive_seed
from ..utils.exceptions import ConfigurationError


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class PathsSection(_Section):
    base_dir: Optional[str] = None
    out_dir: str = "runs/default"
    logs_dir: Optional[str] = None


class SimulationSection(_Section):
    dt: float = Field(10.0, gt=0)
    steps: int = Field(5000, ge=1)
    constants: Dict[str, float] = Field(default_factory=dict)


class CorpusSection(_Section):
    n_train: int = Field(40, ge=1)
    n_test: int = Field(100, ge=1)
    max_resample_attempts: int = Field(3, ge=0)
    init_ranges: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    input_policy: Dict[str, Dict[str, Any]] = Field(default_factory=dict)


class ModelTypeSection(_Section):
    kind: Literal["DDM", "CoSTA"]
    l1_lambda: float = Field(0.0, ge=0)
    learning_rate: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)
    epochs: int = Field(100, ge=0)
    batch_size: int = Field(128, ge=1)
    validation_fraction: float = Field(0.1, ge=0, lt=1)
    layer_sizes: List[int] = Field(default_factory=lambda: [13, 20, 20, 20, 20, 8])
    prune: bool = False
    prune_threshold: float = Field(1e-3, ge=0)

    @field_validator("layer_sizes")
    @classmethod
    def _io_widths(cls, value: List[int]) -> List[int]:
        if len(value) < 2 or value[0] != 13 or value[-1] != 8 or min(value) < 1:
            raise ValueError("layer_sizes must start at 13, end at 8 and contain only positive widths")
        return value


def _default_model_types() -> Dict[str, ModelTypeSection]:
    return {
        "ddm_dense": ModelTypeSection(kind="DDM", l1_lambda=0.0),
        "ddm_sparse": ModelTypeSection(kind="DDM", l1_lambda=1e-4),
        "costa_dense": ModelTypeSection(kind="CoSTA", l1_lambda=0.0),
        "costa_sparse": ModelTypeSection(kind="CoSTA", l1_lambda=1e-4),
    }


class TrainingSection(_Section):
    instances: int = Field(10, ge=1)
    model_types: Dict[str, ModelTypeSection] = Field(default_factory=_default_model_types)

    @field_validator("model_types")
    @classmethod
    def _reserved_names(cls, value: Dict[str, ModelTypeSection]) -> Dict[str, ModelTypeSection]:
        if "pbm" in value:
            raise ValueError("'pbm' is the untrained physics model and cannot be configured for training")
        return value


class EvaluationSection(_Section):
    horizons: List[int] = Field(default_factory=lambda: [1000, 3000, 5000])
    blowup_threshold: float = Field(3.0, gt=0)
    include_pbm: bool = True
    band_trajectory: Optional[int] = Field(0, ge=0)
    band_stride: int = Field(10, ge=1)

    @field_validator("horizons")
    @classmethod
    def _positive_sorted(cls, value: List[int]) -> List[int]:
        if not value or min(value) < 1:
            raise ValueError("horizons must be a non-empty list of positive step counts")
        return sorted(set(value))


class DatabaseSection(_Section):
    url: str = ""


class LoggingSection(_Section):
    log_level: str = "INFO"
    log_to_console: bool = True
    log_to_file: bool = True
    log_dir: Optional[str] = None


class ProcessingSection(_Section):
    num_workers: int = 1
    show_progress: bool = True


class ExperimentConfig(_Section):
    """Everything one experiment run depends on."""

    seed: int = Field(0, ge=0)
    paths: PathsSection = Field(default_factory=PathsSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    datagen: CorpusSection = Field(default_factory=CorpusSection)
    training: TrainingSection = Field(default_factory=TrainingSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    database: DatabaseSection = Field(default_factory=DatabaseSection)
    logging: LoggingSection = Field(default_factory=LoggingSection)
    processing: ProcessingSection = Field(default_factory=ProcessingSection)

    @model_validator(mode="after")
    def _horizons_within_trajectory(self) -> "ExperimentConfig":
        if self.evaluation.horizons[-1] > self.simulation.steps:
            raise ValueError(
                f"longest horizon {self.evaluation.horizons[-1]} exceeds trajectory length {self.simulation.steps}"
            )
        if self.evaluation.band_trajectory is not None and self.evaluation.band_trajectory >= self.datagen.n_test:
            raise ValueError(
                f"band_trajectory {self.evaluation.band_trajectory} is not a test trajectory index (n_test={self.datagen.n_test})"
            )
        return self

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
            )
            raise ConfigurationError(f"Invalid experiment config: {problems}") from e

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    @property
    def model_types(self) -> List[str]:
        """Evaluated model types in report order."""
        names = sorted(self.training.model_types)
        return (["pbm"] if self.evaluation.include_pbm else []) + names

    def plant_constants(self) -> PlantConstants:
        return PlantConstants.from_dict(self.simulation.constants)

    def init_ranges(self) -> InitRanges:
        try:
            return InitRanges.from_dict(self.datagen.init_ranges)
        except TypeError as e:
            raise ConfigurationError(f"Unknown initial-condition range: {e}") from e

    def input_policy(self) -> InputPolicyConfig:
        defaults = InputPolicyConfig().to_dict()
        unknown = set(self.datagen.input_policy) - set(defaults)
        if unknown:
            raise ConfigurationError(f"Unknown input channels: {sorted(unknown)}")
        merged = {name: {**defaults[name], **self.datagen.input_policy.get(name, {})} for name in defaults}
        try:
            return InputPolicyConfig.from_dict(merged)
        except TypeError as e:
            raise ConfigurationError(f"Invalid input policy: {e}") from e

    def train_config(self, model_type: str, instance: int) -> TrainConfig:
        """Train config of one instance; the seed is derived from (master seed, type, instance)."""
        if model_type not in self.training.model_types:
            raise ConfigurationError(
                f"Unknown model type {model_type!r}; configured: {sorted(self.training.model_types)}"
            )
        values = self.training.model_types[model_type].model_dump()
        values.pop("kind")
        values["seed"] = derive_seed(self.seed, "train", model_type, instance)
        return TrainConfig.from_dict(values)

    def model_kind(self, model_type: str) -> str:
        if model_type == "pbm":
            return "PBM"
        return self.training.model_types[model_type].kind
