"""
Derivative estimators compared in the experiment.

PBM    ablated plant derivative
DDM    network trained on forward-difference derivatives
CoSTA  ablated plant derivative plus a learned corrective source term
"""

from dataclasses import dataclass
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from ..datagen.dataset import TargetKind
from ..nn import MlpParameters, forward, load_model
from ..plant import DEFAULT_CONSTANTS, LiquidusMode, PlantConstants, derivative, residual_oracle
from ..utils.exceptions import ConfigurationError, NonFiniteDerivativeError

SourceTerm = Callable[[np.ndarray, np.ndarray], np.ndarray]


class ModelKind(str, Enum):
    PBM = "PBM"
    DDM = "DDM"
    COSTA = "CoSTA"


class NetworkTerm:
    """Wraps a trained network as a rate function on raw (state, input) values."""

    def __init__(self, params: MlpParameters):
        if params.norm_stats is None:
            raise ConfigurationError("A network used for prediction needs normalization statistics")
        self.params = params
        self.stats = params.norm_stats

    def __call__(self, state: np.ndarray, control: np.ndarray) -> np.ndarray:
        features = np.concatenate([np.asarray(state, dtype=float), np.asarray(control, dtype=float)], axis=-1)
        output = forward(self.params, self.stats.normalize_features(features))
        return self.stats.denormalize_targets(output)


def oracle_term(consts: PlantConstants = DEFAULT_CONSTANTS) -> SourceTerm:
    """The exact residual as a corrective source term (no learning)."""
    return partial(residual_oracle, consts=consts, check=False)


@dataclass(frozen=True)
class Predictor:
    kind: ModelKind
    consts: PlantConstants = DEFAULT_CONSTANTS
    net: Optional[MlpParameters] = None
    corrector: Optional[SourceTerm] = None

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ModelKind.PBM:
            return
        if self.net is not None:
            expected = TargetKind.STATE_DERIVATIVE if kind is ModelKind.DDM else TargetKind.RESIDUAL
            actual = self.net.norm_stats.target_kind if self.net.norm_stats else None
            if actual is not expected:
                raise ConfigurationError(f"{kind.value} needs a network trained on {expected.value} targets, got {actual}")
            object.__setattr__(self, "corrector", NetworkTerm(self.net))
        elif kind is ModelKind.DDM or self.corrector is None:
            raise ConfigurationError(f"{kind.value} predictor needs a network")

    @classmethod
    def pbm(cls, consts: PlantConstants = DEFAULT_CONSTANTS) -> "Predictor":
        return cls(ModelKind.PBM, consts)

    @classmethod
    def ddm(cls, net: MlpParameters) -> "Predictor":
        return cls(ModelKind.DDM, net=net)

    @classmethod
    def costa(cls, net: MlpParameters, consts: PlantConstants = DEFAULT_CONSTANTS) -> "Predictor":
        return cls(ModelKind.COSTA, consts, net=net)

    @classmethod
    def costa_with(cls, corrector: SourceTerm, consts: PlantConstants = DEFAULT_CONSTANTS) -> "Predictor":
        return cls(ModelKind.COSTA, consts, corrector=corrector)

    def predict_derivative(self, state: np.ndarray, control: np.ndarray, check: bool = True) -> np.ndarray:
        """
        Estimated state derivative for one (state, input) pair or a batch.

        With ``check=False`` non-finite estimates are returned instead of raised.
        """
        if self.kind is ModelKind.DDM:
            rate = self.corrector(state, control)
        else:
            rate = derivative(state, control, self.consts, LiquidusMode.ABLATED, check=check)
            if self.kind is ModelKind.COSTA:
                rate = rate + self.corrector(state, control)
        if check:
            bad = ~np.isfinite(rate)
            if np.any(bad):
                raise NonFiniteDerivativeError(int(np.argwhere(bad)[0][-1]) + 1, self.kind.value)
        return rate


def load_predictor(path: Union[str, Path], consts: PlantConstants = DEFAULT_CONSTANTS) -> Predictor:
    """Predictor from a model JSON; the kind follows the stored target kind."""
    params, document = load_model(path)
    kind = ModelKind(document.get("kind") or (
        ModelKind.COSTA if params.norm_stats.target_kind is TargetKind.RESIDUAL else ModelKind.DDM
    ))
    return Predictor(kind, consts, net=params)
