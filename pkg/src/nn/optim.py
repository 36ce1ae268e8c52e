from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..utils.exceptions import ConfigurationError, ShapeMismatchError
from .mlp import LAYER_SIZES, Gradients, MlpParameters


@dataclass(frozen=True)
class TrainConfig:
    """
    Training hyperparameters.

    ``l1_lambda`` is 0 for dense models and 1e-4 for sparse ones. Pruning is
    an optional post-processing step on the trained weights.
    """

    l1_lambda: float = 0.0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 100
    batch_size: int = 128
    seed: int = 0
    validation_fraction: float = 0.1
    layer_sizes: Tuple[int, ...] = LAYER_SIZES
    prune: bool = False
    prune_threshold: float = 1e-3

    def __post_init__(self):
        if self.l1_lambda < 0:
            raise ConfigurationError("l1_lambda must be >= 0")
        if self.learning_rate <= 0 or self.epochs < 0 or self.batch_size < 1:
            raise ConfigurationError("learning_rate must be > 0, epochs >= 0 and batch_size >= 1")
        if not 0 <= self.validation_fraction < 1:
            raise ConfigurationError("validation_fraction must lie in [0, 1)")
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))

    def to_dict(self) -> Dict[str, object]:
        values = asdict(self)
        values["layer_sizes"] = list(self.layer_sizes)
        return values

    @classmethod
    def from_dict(cls, values: Dict[str, object]) -> "TrainConfig":
        return cls(**values)


@dataclass
class AdamState:
    m_weights: List[np.ndarray]
    m_biases: List[np.ndarray]
    v_weights: List[np.ndarray]
    v_biases: List[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: MlpParameters) -> "AdamState":
        return cls(
            m_weights=[np.zeros_like(w) for w in params.weights],
            m_biases=[np.zeros_like(b) for b in params.biases],
            v_weights=[np.zeros_like(w) for w in params.weights],
            v_biases=[np.zeros_like(b) for b in params.biases],
        )


def _moments(theta, grad, m, v, cfg: TrainConfig, t: int):
    if theta.shape != grad.shape:
        raise ShapeMismatchError(f"Gradient shape {grad.shape} does not match parameter shape {theta.shape}")
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    return theta - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon), m, v


def adam_step(
    params: MlpParameters,
    grads: Gradients,
    state: AdamState,
    cfg: TrainConfig,
) -> Tuple[MlpParameters, AdamState]:
    """One bias-corrected Adam update. Inputs are left untouched."""
    t = state.t + 1
    new_w, new_b = [], []
    m_w, m_b, v_w, v_b = [], [], [], []
    for j in range(len(params.weights)):
        w, mw, vw = _moments(params.weights[j], grads.weights[j], state.m_weights[j], state.v_weights[j], cfg, t)
        b, mb, vb = _moments(params.biases[j], grads.biases[j], state.m_biases[j], state.v_biases[j], cfg, t)
        new_w.append(w)
        new_b.append(b)
        m_w.append(mw)
        m_b.append(mb)
        v_w.append(vw)
        v_b.append(vb)
    return (
        MlpParameters(weights=new_w, biases=new_b, norm_stats=params.norm_stats),
        AdamState(m_weights=m_w, m_biases=m_b, v_weights=v_w, v_biases=v_b, t=t),
    )
