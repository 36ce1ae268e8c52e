"""
Ground-truth corpus generation and persistence.
"""

from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from ..integrate import Trajectory, simulate
from ..plant import DEFAULT_CONSTANTS, LiquidusMode, PlantConstants
from ..utils import get_logger, make_rng
from ..utils.exceptions import CostaError, MissingArtifactError, SimulationDivergedError
from .excitation import ExcitationController, InputPolicyConfig
from .ranges import InitRanges, sample_initial_state

logger = get_logger(__name__)

TRAIN, TEST = "train", "test"


def generate_trajectory(
    master_seed: int,
    split: str,
    index: int,
    steps: int,
    dt: float,
    ranges: InitRanges = InitRanges(),
    policy: InputPolicyConfig = InputPolicyConfig(),
    consts: PlantConstants = DEFAULT_CONSTANTS,
    max_resample_attempts: int = 3,
) -> Trajectory:
    """
    Simulate one True-mode trajectory from its own (seed, split, index) streams.

    A diverged rollout is redrawn with the next attempt's streams; after
    ``max_resample_attempts`` redraws the error propagates.
    """
    for attempt in range(max_resample_attempts + 1):
        x0 = sample_initial_state(make_rng(master_seed, split, index, attempt, "init"), ranges)
        controller = ExcitationController.create(policy, steps, master_seed, split, index, attempt)
        try:
            return simulate(x0, controller, steps, dt, LiquidusMode.TRUE, consts, trajectory_index=index)
        except SimulationDivergedError as e:
            if attempt == max_resample_attempts:
                logger.error(f"{split} trajectory {index} diverged after {attempt + 1} attempts: {e}")
                raise
            logger.warning(f"{split} trajectory {index} diverged ({e}); redrawing (attempt {attempt + 1})")
    raise AssertionError("unreachable")


def _generate_split(
    master_seed: int,
    split: str,
    count: int,
    steps: int,
    dt: float,
    ranges: InitRanges,
    policy: InputPolicyConfig,
    consts: PlantConstants,
    workers: int,
    max_resample_attempts: int,
    show_progress: bool,
) -> List[Trajectory]:
    indices = tqdm(range(count), desc=f"simulate {split}", disable=not show_progress)
    return Parallel(n_jobs=workers)(
        delayed(generate_trajectory)(
            master_seed, split, i, steps, dt, ranges, policy, consts, max_resample_attempts
        )
        for i in indices
    )


def generate_corpus(
    seed: int,
    n_train: int = 40,
    n_test: int = 100,
    steps: int = 5000,
    dt: float = 10.0,
    ranges: InitRanges = InitRanges(),
    policy: InputPolicyConfig = InputPolicyConfig(),
    consts: PlantConstants = DEFAULT_CONSTANTS,
    workers: int = 1,
    max_resample_attempts: int = 3,
    out_dir: Union[str, Path, None] = None,
    show_progress: bool = False,
) -> Tuple[List[Trajectory], List[Trajectory]]:
    """Generate (and optionally persist) the training and test trajectory sets."""
    if n_train < 1 or n_test < 1:
        raise ValueError(f"Corpus counts must be >= 1, got n_train={n_train}, n_test={n_test}")

    logger.info(f"Generating corpus: {n_train} train + {n_test} test trajectories, {steps} steps at dt={dt}")
    args = (steps, dt, ranges, policy, consts, workers, max_resample_attempts, show_progress)
    try:
        train = _generate_split(seed, TRAIN, n_train, *args)
        test = _generate_split(seed, TEST, n_test, *args)
    except CostaError as e:
        logger.error(f"Corpus generation failed: {e}")
        raise

    if out_dir is not None:
        save_corpus(train, test, out_dir)
    covered = envelope_coverage(train, test)
    logger.info(f"Corpus ready; training envelope covers the test envelope for {covered}/8 states")
    return train, test


def trajectory_path(out_dir: Union[str, Path], split: str, index: int) -> Path:
    return Path(out_dir) / f"{split}_{index:03d}.csv"


def save_corpus(train: Sequence[Trajectory], test: Sequence[Trajectory], out_dir: Union[str, Path]) -> List[Path]:
    paths = []
    for split, trajectories in ((TRAIN, train), (TEST, test)):
        for i, trajectory in enumerate(trajectories):
            paths.append(trajectory.save_csv(trajectory_path(out_dir, split, i)))
    logger.info(f"Wrote {len(paths)} trajectory files to {out_dir}")
    return paths


def load_split(out_dir: Union[str, Path], split: str) -> List[Trajectory]:
    paths = sorted(Path(out_dir).glob(f"{split}_*.csv"))
    if not paths:
        raise MissingArtifactError([str(Path(out_dir) / f"{split}_*.csv")])
    return [Trajectory.load_csv(p) for p in paths]


def envelope_coverage(train: Sequence[Trajectory], test: Sequence[Trajectory]) -> int:
    """Number of states whose test-set min/max lie inside the training-set min/max."""
    train_states = np.concatenate([t.states for t in train])
    test_states = np.concatenate([t.states for t in test])
    inside = (test_states.min(axis=0) >= train_states.min(axis=0)) & (
        test_states.max(axis=0) <= train_states.max(axis=0)
    )
    return int(np.sum(inside))
