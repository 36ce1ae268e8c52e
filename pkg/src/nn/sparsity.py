from typing import Tuple

import numpy as np

from .mlp import MlpParameters


def sparsity_metrics(params: MlpParameters) -> Tuple[int, float]:
    """(number of nonzero weights, sum of absolute weights); biases excluded."""
    l0 = int(sum(np.count_nonzero(w) for w in params.weights))
    l1 = float(sum(np.abs(w).sum() for w in params.weights))
    return l0, l1


def magnitude_prune(params: MlpParameters, threshold: float) -> Tuple[MlpParameters, float]:
    """
    Zero every weight with |w| < threshold.

    Returns the pruned copy and the fraction of all weights that fell under
    the threshold. Biases are never pruned.
    """
    if threshold < 0:
        raise ValueError(f"Pruning threshold must be >= 0, got {threshold}")
    pruned = params.copy()
    below = 0
    total = 0
    for w in pruned.weights:
        mask = np.abs(w) < threshold
        w[mask] = 0.0
        below += int(mask.sum())
        total += w.size
    return pruned, below / total
