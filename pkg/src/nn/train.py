"""
Mini-batch Adam training on a standardized regression dataset.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from sklearn.model_selection import train_test_split
from tqdm import tqdm

from ..datagen.dataset import RegressionDataset
from ..utils import get_logger
from ..utils.exceptions import NonFiniteQuantityError, TrainingDivergedError
from .mlp import MlpParameters, forward, loss_and_gradients
from .optim import AdamState, TrainConfig, adam_step
from .sparsity import magnitude_prune, sparsity_metrics

logger = get_logger(__name__)


@dataclass
class LossHistory:
    train: List[float] = field(default_factory=list)
    validation: List[Optional[float]] = field(default_factory=list)
    pruned_fraction: float = 0.0

    def final(self) -> dict:
        return {
            "train": self.train[-1] if self.train else None,
            "validation": self.validation[-1] if self.validation else None,
        }


def split_indices(n: int, cfg: TrainConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Shuffled (train, validation) row indices; validation is empty when it cannot be carved."""
    indices = np.arange(n)
    n_val = int(round(cfg.validation_fraction * n))
    if n_val == 0 or n_val >= n:
        return indices, indices[:0]
    train_idx, val_idx = train_test_split(indices, test_size=n_val, random_state=cfg.seed, shuffle=True)
    return np.asarray(train_idx), np.asarray(val_idx)


def train(
    dataset: RegressionDataset,
    cfg: TrainConfig,
    show_progress: bool = False,
) -> Tuple[MlpParameters, LossHistory]:
    """
    Fit a network to ``dataset`` with the settings in ``cfg``.

    The same ``cfg.seed`` reproduces the same parameters bit for bit.

    Raises:
        TrainingDivergedError: the loss became non-finite.
    """
    features, targets = dataset.normalized()
    rng = np.random.default_rng(cfg.seed)
    params = MlpParameters.initialize(rng, cfg.layer_sizes, norm_stats=dataset.norm_stats)
    state = AdamState.zeros_like(params)
    train_idx, val_idx = split_indices(len(features), cfg)
    history = LossHistory()

    logger.info(
        f"Training {dataset.target_kind.value} network: {len(train_idx)} train / {len(val_idx)} validation pairs, "
        f"lambda={cfg.l1_lambda}, epochs={cfg.epochs}, seed={cfg.seed}"
    )
    for epoch in tqdm(range(cfg.epochs), desc="epochs", disable=not show_progress):
        order = train_idx[rng.permutation(len(train_idx))]
        batch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            try:
                loss, grads = loss_and_gradients(params, features[batch], targets[batch], cfg.l1_lambda)
                params, state = adam_step(params, grads, state, cfg)
            except NonFiniteQuantityError as e:
                raise TrainingDivergedError(epoch, float("nan")) from e
            batch_losses.append(loss)

        history.train.append(float(np.mean(batch_losses)))
        if len(val_idx):
            val_error = forward(params, features[val_idx]) - targets[val_idx]
            val_loss = float(np.mean(val_error ** 2))
            if not np.isfinite(val_loss):
                raise TrainingDivergedError(epoch, val_loss)
            history.validation.append(val_loss)
        else:
            history.validation.append(None)

        if (epoch + 1) % 10 == 0 or epoch == cfg.epochs - 1:
            logger.info(f"epoch {epoch + 1}/{cfg.epochs}: train {history.train[-1]:.3e}, validation {history.validation[-1]}")

    if cfg.prune:
        params, history.pruned_fraction = magnitude_prune(params, cfg.prune_threshold)
        logger.info(f"Pruned {history.pruned_fraction:.1%} of weights below {cfg.prune_threshold}")

    l0, l1 = sparsity_metrics(params)
    logger.info(f"Finished training: l0={l0}, l1={l1:.4f}")
    return params, history
