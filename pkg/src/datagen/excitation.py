"""
Excitation inputs for data generation.

Line current and anode-cathode distance are a constant plus an APRBS term.
Feeds and tapping are impulses: zero except every ``period`` steps, where a
proportional term plus a uniform random term is applied (clamped at zero).
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

import numpy as np

from ..plant import mass_ratios
from ..utils import make_rng
from ..utils.exceptions import ConfigurationError

Interval = Tuple[float, float]

# Measured quantity for each impulse channel
_MEASURED = ("c_x2", "c_x3", "x5")


def aprbs(
    rng: np.random.Generator,
    amplitude_interval: Interval,
    hold_interval_steps: Tuple[int, int],
    steps: int,
) -> np.ndarray:
    """
    Amplitude-modulated pseudo-random binary sequence of length ``steps``.

    Each segment holds a uniform amplitude from ``amplitude_interval`` for a
    uniform integer number of steps from ``hold_interval_steps`` (inclusive).
    """
    lo, hi = amplitude_interval
    hold_min, hold_max = hold_interval_steps
    if lo > hi or hold_min > hold_max or hold_min < 1:
        raise ConfigurationError(
            f"Invalid APRBS intervals: amplitude {amplitude_interval}, hold {hold_interval_steps}"
        )
    signal = np.empty(steps)
    filled = 0
    while filled < steps:
        amplitude = rng.uniform(lo, hi)
        hold = int(rng.integers(hold_min, hold_max, endpoint=True))
        signal[filled:filled + hold] = amplitude
        filled += hold
    return signal


@dataclass(frozen=True)
class ImpulseChannel:
    """u = max(0, gain * (setpoint - measured) + random) every ``period`` steps."""

    measured: str
    gain: float
    setpoint: float
    random_interval: Interval
    period: int

    def __post_init__(self):
        if self.measured not in _MEASURED:
            raise ConfigurationError(f"Impulse channel cannot measure {self.measured!r}")
        if self.period < 1:
            raise ConfigurationError(f"Impulse period must be >= 1, got {self.period}")

    def deterministic_term(self, value: float) -> float:
        return self.gain * (self.setpoint - value)

    def fires_at(self, k: int) -> bool:
        return k % self.period == 0


@dataclass(frozen=True)
class AprbsChannel:
    """u = base + APRBS term."""

    base: float
    random_interval: Interval
    hold_interval_steps: Tuple[int, int] = (10, 100)


@dataclass(frozen=True)
class InputPolicyConfig:
    u1: ImpulseChannel = field(default_factory=lambda: ImpulseChannel("c_x2", 3e4, 0.023, (-2.0, 2.0), 30))
    u2: AprbsChannel = field(default_factory=lambda: AprbsChannel(1.4e4, (-7e3, 7e3)))
    u3: ImpulseChannel = field(default_factory=lambda: ImpulseChannel("c_x3", 1.3e4, 0.105, (-0.5, 0.5), 60))
    # 2 * (x5 - 1e4) written as gain * (setpoint - x5)
    u4: ImpulseChannel = field(default_factory=lambda: ImpulseChannel("x5", -2.0, 1e4, (-2.0, 2.0), 180))
    u5: AprbsChannel = field(default_factory=lambda: AprbsChannel(0.05, (-0.015, 0.015)))

    def to_dict(self) -> Dict[str, dict]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, dict]) -> "InputPolicyConfig":
        parsed = {}
        for name, channel in values.items():
            kind = ImpulseChannel if name in ("u1", "u3", "u4") else AprbsChannel
            channel = dict(channel)
            for key in ("random_interval", "hold_interval_steps"):
                if key in channel:
                    channel[key] = tuple(channel[key])
            parsed[name] = kind(**channel)
        return cls(**parsed)


@dataclass(frozen=True)
class ExcitationStreams:
    """Pre-drawn random terms, one array of length steps+1 per input."""

    random_terms: Dict[str, np.ndarray]

    @classmethod
    def draw(
        cls,
        policy: InputPolicyConfig,
        steps: int,
        master_seed: int,
        *stream_key,
    ) -> "ExcitationStreams":
        n = steps + 1
        terms = {}
        for name in ("u1", "u2", "u3", "u4", "u5"):
            channel = getattr(policy, name)
            rng = make_rng(master_seed, *stream_key, name)
            if isinstance(channel, ImpulseChannel):
                terms[name] = rng.uniform(*channel.random_interval, size=n)
            else:
                terms[name] = aprbs(rng, channel.random_interval, channel.hold_interval_steps, n)
        return cls(random_terms=terms)


def _measure(state: np.ndarray, what: str) -> float:
    if what == "x5":
        return float(state[4])
    c_x2, c_x3 = mass_ratios(state)
    return float(c_x2 if what == "c_x2" else c_x3)


def control_input_at(
    k: int,
    state: np.ndarray,
    policy: InputPolicyConfig,
    streams: ExcitationStreams,
) -> np.ndarray:
    """Input vector (u1..u5) applied at step ``k``."""
    state = np.asarray(state, dtype=float)
    u = np.zeros(5)
    for i, name in enumerate(("u1", "u2", "u3", "u4", "u5")):
        channel = getattr(policy, name)
        random_term = streams.random_terms[name][k]
        if isinstance(channel, AprbsChannel):
            u[i] = channel.base + random_term
        elif channel.fires_at(k):
            det = channel.deterministic_term(_measure(state, channel.measured))
            u[i] = max(0.0, det + random_term)
    return u


class ExcitationController:
    """Callable input policy for ``simulate`` bound to one trajectory's streams."""

    def __init__(self, policy: InputPolicyConfig, streams: ExcitationStreams):
        self.policy = policy
        self.streams = streams

    @classmethod
    def create(cls, policy: InputPolicyConfig, steps: int, master_seed: int, *stream_key) -> "ExcitationController":
        return cls(policy, ExcitationStreams.draw(policy, steps, master_seed, *stream_key))

    def __call__(self, k: int, state: np.ndarray) -> np.ndarray:
        return control_input_at(k, state, self.policy, self.streams)
