"""
Exception hierarchy shared by every stage of the pipeline.

State and input components are reported 1-based (x1..x8, u1..u5) so messages
read like the state table.
"""

from typing import Iterable, Optional


class CostaError(Exception):
    """Base class for all pipeline errors."""


class ConfigurationError(CostaError):
    """Invalid or inconsistent experiment configuration."""


class DegenerateDenominatorError(CostaError):
    """A mass-ratio denominator x2 + x3 + x4 is not strictly positive."""

    def __init__(self, denominator: float):
        self.denominator = denominator
        super().__init__(f"Degenerate mass-ratio denominator x2+x3+x4 = {denominator!r}")


class NonFiniteQuantityError(CostaError):
    """An auxiliary quantity g_i evaluated to inf or NaN."""

    def __init__(self, quantity: str):
        self.quantity = quantity
        super().__init__(f"Auxiliary quantity {quantity} is not finite")


class NonFiniteDerivativeError(CostaError):
    """A derivative component evaluated to inf or NaN."""

    def __init__(self, component: int, source: str = "plant"):
        self.component = component
        self.source = source
        super().__init__(f"Non-finite derivative in component x{component} ({source})")


class ConversionError(CostaError):
    """Mass-ratio to mass conversion is impossible (c_x2 + c_x3 >= 1)."""


class SimulationDivergedError(CostaError):
    """A ground-truth rollout left the finite, physical state region."""

    def __init__(
        self,
        step: int,
        component: int,
        trajectory_index: Optional[int] = None,
        reason: Optional[str] = None,
    ):
        self.step = step
        self.component = component
        self.trajectory_index = trajectory_index
        self.reason = reason
        where = f" in trajectory {trajectory_index}" if trajectory_index is not None else ""
        why = f" ({reason})" if reason else ""
        super().__init__(f"Simulation diverged at step {step}, component x{component}{where}{why}")


class ShapeMismatchError(CostaError):
    """Array shapes do not chain (network layers, batches, stats)."""


class TrainingDivergedError(CostaError):
    """The training loss became non-finite."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training diverged at epoch {epoch} (loss = {loss!r})")


class MissingArtifactError(CostaError):
    """Required input files for a pipeline stage are absent."""

    def __init__(self, missing: Iterable[str]):
        self.missing = sorted(str(m) for m in missing)
        listed = ", ".join(self.missing[:10])
        more = f" (+{len(self.missing) - 10} more)" if len(self.missing) > 10 else ""
        super().__init__(f"Missing artifacts: {listed}{more}")
