"""
Fully connected ReLU network with a linear output layer, written directly on
numpy arrays. Weight matrices are stored (out, in).
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..datagen.dataset import NormStats
from ..utils.exceptions import NonFiniteQuantityError, ShapeMismatchError

LAYER_SIZES = (13, 20, 20, 20, 20, 8)


@dataclass
class MlpParameters:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    norm_stats: Optional[NormStats] = None

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float) for b in self.biases]
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeMismatchError("Need one bias vector per weight matrix")
        for j, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeMismatchError(f"Layer {j + 1}: weight {w.shape} and bias {b.shape} do not match")
            if j > 0 and w.shape[1] != self.weights[j - 1].shape[0]:
                raise ShapeMismatchError(
                    f"Layer {j + 1} expects {w.shape[1]} inputs but layer {j} has {self.weights[j - 1].shape[0]} outputs"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise NonFiniteQuantityError(f"layer {j + 1} parameters")

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[1], *(w.shape[0] for w in self.weights))

    def copy(self) -> "MlpParameters":
        return MlpParameters(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            norm_stats=self.norm_stats,
        )

    @classmethod
    def zeros(cls, layer_sizes: Sequence[int] = LAYER_SIZES, norm_stats: Optional[NormStats] = None) -> "MlpParameters":
        pairs = list(zip(layer_sizes[:-1], layer_sizes[1:]))
        return cls(
            weights=[np.zeros((n_out, n_in)) for n_in, n_out in pairs],
            biases=[np.zeros(n_out) for _, n_out in pairs],
            norm_stats=norm_stats,
        )

    @classmethod
    def initialize(
        cls,
        rng: np.random.Generator,
        layer_sizes: Sequence[int] = LAYER_SIZES,
        norm_stats: Optional[NormStats] = None,
    ) -> "MlpParameters":
        """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases."""
        weights, biases = [], []
        for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / np.sqrt(n_in)
            weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
            biases.append(rng.uniform(-bound, bound, size=n_out))
        return cls(weights=weights, biases=biases, norm_stats=norm_stats)


@dataclass
class Gradients:
    weights: List[np.ndarray] = field(default_factory=list)
    biases: List[np.ndarray] = field(default_factory=list)


def _check_input(params: MlpParameters, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != params.layer_sizes[0]:
        raise ShapeMismatchError(
            f"Network expects {params.layer_sizes[0]} features, got shape {features.shape}"
        )
    return features


def forward(params: MlpParameters, features: np.ndarray) -> np.ndarray:
    """Network output for one (standardized) feature vector or a batch of them."""
    a = _check_input(params, features)
    last = len(params.weights) - 1
    for j, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        a = z if j == last else np.maximum(z, 0.0)
    return a


def _forward_cache(params: MlpParameters, features: np.ndarray):
    activations = [features]
    pre_activations = []
    last = len(params.weights) - 1
    a = features
    for j, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        pre_activations.append(z)
        a = z if j == last else np.maximum(z, 0.0)
        activations.append(a)
    return pre_activations, activations


def l1_norm(params: MlpParameters) -> float:
    return float(sum(np.abs(w).sum() for w in params.weights))


def loss_and_gradients(
    params: MlpParameters,
    features: np.ndarray,
    targets: np.ndarray,
    l1_lambda: float = 0.0,
) -> Tuple[float, Gradients]:
    """
    MSE over all samples and outputs plus ``l1_lambda`` times the L1 norm of
    the weights (biases are not penalized), with gradients by backpropagation.
    The L1 subgradient at zero is zero.
    """
    features = _check_input(params, features)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2 or len(features) == 0:
        raise ShapeMismatchError(f"Expected a non-empty (n, {params.layer_sizes[0]}) batch, got {features.shape}")
    if targets.shape != (len(features), params.layer_sizes[-1]):
        raise ShapeMismatchError(f"Targets must be ({len(features)}, {params.layer_sizes[-1]}), got {targets.shape}")

    pre, acts = _forward_cache(params, features)
    error = acts[-1] - targets
    mse = float(np.mean(error ** 2))
    loss = mse + l1_lambda * l1_norm(params) if l1_lambda else mse
    if not np.isfinite(loss):
        raise NonFiniteQuantityError("loss")

    grads = Gradients(weights=[None] * len(params.weights), biases=[None] * len(params.biases))
    delta = 2.0 * error / error.size
    for j in range(len(params.weights) - 1, -1, -1):
        grads.weights[j] = delta.T @ acts[j]
        grads.biases[j] = delta.sum(axis=0)
        if l1_lambda:
            grads.weights[j] = grads.weights[j] + l1_lambda * np.sign(params.weights[j])
        if j > 0:
            delta = (delta @ params.weights[j]) * (pre[j - 1] > 0)
    return loss, grads
