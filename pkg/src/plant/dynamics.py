"""
Derivative functions of the cell.

All functions accept a single state/input (shape ``(8,)`` / ``(5,)``) or
stacked batches (shape ``(n, 8)`` / ``(n, 5)``); dataclass states and inputs
are accepted wherever an array is.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from ..utils.exceptions import (
    DegenerateDenominatorError,
    NonFiniteDerivativeError,
    NonFiniteQuantityError,
)
from .constants import CellState, ControlInput, DEFAULT_CONSTANTS, LiquidusMode, PlantConstants

ArrayLike = Union[np.ndarray, CellState, ControlInput, list, tuple]


@dataclass(frozen=True)
class AuxQuantities:
    """Mass ratios and the auxiliary quantities g1..g5 at one state (or a batch)."""

    c_x2: np.ndarray
    c_x3: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    g5: np.ndarray


def _split(a: ArrayLike, width: int) -> Tuple[np.ndarray, ...]:
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != width:
        raise ValueError(f"Expected trailing dimension {width}, got shape {a.shape}")
    return tuple(a[..., i] for i in range(width))


def mass_ratios(state: ArrayLike, check: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Alumina and aluminum-fluoride mass ratios of the bath."""
    _, x2, x3, x4, *_ = _split(state, 8)
    total = x2 + x3 + x4
    if check and np.any(~(total > 0)):
        raise DegenerateDenominatorError(float(np.min(total)))
    with np.errstate(divide="ignore", invalid="ignore"):
        return x2 / total, x3 / total


def liquidus_temperature(c_x2, c_x3) -> np.ndarray:
    """Liquidus temperature g1 (degC) as a function of bath composition."""
    c_x2 = np.asarray(c_x2, dtype=float)
    c_x3 = np.asarray(c_x3, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (
            991.2
            + 112.0 * c_x3
            + 61.0 * c_x3 ** 1.5
            - 3265.5 * c_x3 ** 2.2
            - 793.0 * c_x2 / (-23.0 * c_x2 * c_x3 - 17.0 * c_x3 ** 2 + 9.36 * c_x3 + 1.0)
        )


def aux_quantities(
    state: ArrayLike,
    control: ArrayLike,
    consts: PlantConstants = DEFAULT_CONSTANTS,
    mode: LiquidusMode = LiquidusMode.TRUE,
    check: bool = True,
) -> AuxQuantities:
    """
    Evaluate the mass ratios and g1..g5.

    In ABLATED mode g1 is the constant ``consts.g1_ablated``; g2..g5 use the
    same formulas in both modes. The bubble-coverage polynomial takes u1 as
    its argument.
    """
    x6 = _split(state, 8)[5]
    u1, u2, *_ = _split(control, 5)
    c_x2, c_x3 = mass_ratios(state, check=check)

    if LiquidusMode(mode) is LiquidusMode.ABLATED:
        g1 = np.full_like(c_x2, consts.g1_ablated)
    else:
        g1 = liquidus_temperature(c_x2, c_x3)

    dc = c_x2 - consts.c_x2_crit
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g2 = np.exp(2.496 - 2068.4 / (273.0 + x6) - 2.07 * c_x2)
        g3 = (
            0.531
            + 3.06e-18 * u1 ** 3
            - 2.51e-12 * u1 ** 2
            + 6.96e-7 * u1
            - (14.37 * dc - 0.431) / (735.3 * dc + 1.0)
        )
        g4 = (0.5517 + 3.8168e-6 * u2) / (1.0 + 8.271e-6 * u2)
        g5 = 3.8168e-6 * g3 * g4 * u2 / (g2 * (1.0 - g3))

    aux = AuxQuantities(c_x2=c_x2, c_x3=c_x3, g1=g1, g2=g2, g3=g3, g4=g4, g5=g5)
    if check:
        for name in ("g1", "g2", "g3", "g4", "g5"):
            if not np.all(np.isfinite(getattr(aux, name))):
                raise NonFiniteQuantityError(name)
    return aux


def derivative(
    state: ArrayLike,
    control: ArrayLike,
    consts: PlantConstants = DEFAULT_CONSTANTS,
    mode: LiquidusMode = LiquidusMode.TRUE,
    check: bool = True,
) -> np.ndarray:
    """
    Time derivative of the eight states, shape matching ``state``.

    With ``check=False`` nothing is validated and non-finite values are
    returned as they come; rollouts use this to record divergence instead of
    failing.
    """
    x1, x2, x3, x4, x5, x6, x7, x8 = _split(state, 8)
    u1, u2, u3, u4, u5 = _split(control, 5)
    aux = aux_quantities(state, control, consts, mode, check=check)
    g1, g2, g5 = aux.g1, aux.g2, aux.g5
    c = consts

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ledge = c.k0 * x1
        superheat = x6 - g1
        undercool = g1 - x7
        ledge_flux = c.k1 * undercool / ledge
        ledge_resistance = c.k14 + c.k15 * ledge

        dx1 = ledge_flux - c.k2 * superheat
        dx2 = u1 - c.k3 * u2
        dx3 = u3 - c.k4 * u1
        dx4 = -ledge_flux + c.k2 * superheat + c.k5 * u1
        dx5 = c.k6 * u2 - u4
        dx6 = c.alpha / (x2 + x3 + x4) * (
            u2 * g5
            + u2 ** 2 * u5 / (2620.0 * g2)
            - c.k7 * superheat ** 2
            + c.k8 * superheat * undercool / ledge
            - c.k9 * (x6 - x7) / (c.k10 + c.k11 * ledge)
        )
        dx7 = c.beta / x1 * (
            c.k9 * undercool / (c.k15 * ledge)
            - c.k12 * superheat * undercool
            + c.k13 * undercool ** 2 / ledge
            - (x7 - x8) / ledge_resistance
        )
        dx8 = c.k17 * c.k9 * ((x7 - x8) / ledge_resistance - (x8 - c.k16) / (c.k14 + c.k18))

    rate = np.stack([dx1, dx2, dx3, dx4, dx5, dx6, dx7, dx8], axis=-1)
    if check:
        _raise_if_non_finite(rate, "plant")
    return rate


def residual_oracle(
    state: ArrayLike,
    control: ArrayLike,
    consts: PlantConstants = DEFAULT_CONSTANTS,
    check: bool = True,
) -> np.ndarray:
    """Exact residual of the ablated model: true derivative minus ablated derivative."""
    true_rate = derivative(state, control, consts, LiquidusMode.TRUE, check=check)
    ablated_rate = derivative(state, control, consts, LiquidusMode.ABLATED, check=check)
    return true_rate - ablated_rate


def _raise_if_non_finite(rate: np.ndarray, source: str) -> None:
    bad = ~np.isfinite(rate)
    if np.any(bad):
        component = int(np.argwhere(bad)[0][-1]) + 1
        raise NonFiniteDerivativeError(component, source)
