"""
Fixed-step integrators and the ground-truth rollout.
"""

from typing import Callable, Optional, Protocol, Tuple, Union

import numpy as np

from ..plant import DEFAULT_CONSTANTS, LiquidusMode, PlantConstants, derivative, liquidus_temperature, mass_ratios
from ..utils import get_logger
from ..utils.exceptions import (
    DegenerateDenominatorError,
    NonFiniteDerivativeError,
    NonFiniteQuantityError,
    SimulationDivergedError,
)
from .trajectory import Trajectory

logger = get_logger(__name__)

RateFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# g1 enters the ledge equation; g2..g5 only the bath temperature equation
_QUANTITY_COMPONENT = {"g1": 1, "g2": 6, "g3": 6, "g4": 6, "g5": 6}

PLANT_EVALUATION_ERRORS = (NonFiniteDerivativeError, NonFiniteQuantityError, DegenerateDenominatorError)
PlantEvaluationError = Union[NonFiniteDerivativeError, NonFiniteQuantityError, DegenerateDenominatorError]


class InputPolicy(Protocol):
    """Chooses the input for step ``k`` given the current state.

    Implementations own their random streams, so calling the same policy
    object twice from a fresh construction yields the same sequence.
    """

    def __call__(self, k: int, state: np.ndarray) -> np.ndarray:
        ...


def rk4_step(f: RateFunction, state: np.ndarray, control: np.ndarray, dt: float) -> np.ndarray:
    """Classical four-stage Runge-Kutta step with ``control`` held over the step."""
    state = np.asarray(state, dtype=float)
    k1 = f(state, control)
    k2 = f(state + 0.5 * dt * k1, control)
    k3 = f(state + 0.5 * dt * k2, control)
    k4 = f(state + dt * k3, control)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(rate: np.ndarray, state: np.ndarray, dt: float) -> np.ndarray:
    """Forward Euler update ``state + rate * dt``."""
    return np.asarray(state, dtype=float) + np.asarray(rate, dtype=float) * dt


def plant_rate(consts: PlantConstants = DEFAULT_CONSTANTS, mode: LiquidusMode = LiquidusMode.TRUE) -> RateFunction:
    def f(state: np.ndarray, control: np.ndarray) -> np.ndarray:
        return derivative(state, control, consts, mode)

    return f


def _failed_component(error: PlantEvaluationError) -> int:
    if isinstance(error, NonFiniteDerivativeError):
        return error.component
    if isinstance(error, NonFiniteQuantityError):
        return _QUANTITY_COMPONENT.get(error.quantity, 1)
    if isinstance(error, DegenerateDenominatorError):
        return 4
    return 1


def non_physical_component(state: np.ndarray) -> Optional[Tuple[int, str]]:
    """First violated physical bound of a state as (component, reason), or None."""
    x1, x2, x3, x4 = state[:4]
    if not x1 > 0:
        return 1, f"side ledge mass x1 = {x1!r}"
    if not x4 > 0:
        return 4, f"cryolite mass x4 = {x4!r}"
    if not x2 + x3 + x4 > 0:
        return 4, f"bath mass x2+x3+x4 = {x2 + x3 + x4!r}"
    return None


def simulate(
    x0: np.ndarray,
    controller: InputPolicy,
    steps: int,
    dt: float,
    mode: LiquidusMode = LiquidusMode.TRUE,
    consts: PlantConstants = DEFAULT_CONSTANTS,
    trajectory_index: Optional[int] = None,
) -> Trajectory:
    """
    Roll the plant forward ``steps`` RK4 steps from ``x0``.

    The input chosen at step k is recorded and used for all four stages of
    that step. One extra input is drawn at the final state so that states and
    inputs have equal length. The recorded g1 is always the composition-based
    liquidus temperature, whatever ``mode`` drives the dynamics.

    Raises:
        SimulationDivergedError: an input, a derivative or a new state cannot be
            evaluated, is not finite, or leaves the physical region (non-positive
            x1, x4 or bath mass).
            The step, component and trajectory index are attached.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    f = plant_rate(consts, mode)
    states = np.empty((steps + 1, 8))
    inputs = np.empty((steps + 1, 5))
    states[0] = np.asarray(x0, dtype=float)

    for k in range(steps):
        try:
            inputs[k] = controller(k, states[k])
            nxt = rk4_step(f, states[k], inputs[k], dt)
        except PLANT_EVALUATION_ERRORS as e:
            raise SimulationDivergedError(k, _failed_component(e), trajectory_index, str(e)) from e
        bad = ~np.isfinite(nxt)
        if np.any(bad):
            raise SimulationDivergedError(k, int(np.argmax(bad)) + 1, trajectory_index, "non-finite state")
        violation = non_physical_component(nxt)
        if violation is not None:
            raise SimulationDivergedError(k, violation[0], trajectory_index, violation[1])
        states[k + 1] = nxt
    inputs[steps] = controller(steps, states[steps])

    aux_g1 = liquidus_temperature(*mass_ratios(states))
    logger.debug(f"Simulated {steps} steps (dt={dt}, mode={LiquidusMode(mode).value})")
    return Trajectory(dt=dt, states=states, inputs=inputs, aux_g1=aux_g1)
