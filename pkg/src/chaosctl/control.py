"""Diagonal target-oriented control: schedules, noise source, controlled step.

The noise source is SplitMix64, specified bit-exactly so that any
implementation of this package (in any language) reproduces identical
trajectories from the same seed:

    s <- s + 0x9E3779B97F4A7C15                         (mod 2^64)
    z <- s
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9           (mod 2^64)
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB           (mod 2^64)
    z <- z ^ (z >> 31)

Derived samples: uniform on [-1, 1) is 2 * ((z >> 11) * 2^-53) - 1; the
+/-1 Bernoulli sample is +1 when the top bit of z is set, else -1.

Monte Carlo work uses one independent stream per trial:

    s0(trial k) = scramble(seed XOR (0xD1B54A32D192ED03
                                     + k * 0x9E3779B97F4A7C15  mod 2^64))

where scramble(v) is the output of a single SplitMix64 step applied to v.
RNG state is a value passed explicitly; there is no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .maps import MapParams, MapKind, Point2

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STREAM = 0xD1B54A32D192ED03
_U53 = 2.0**-53


class InvalidControl(ValueError):
    """A control intensity lies outside its allowed range."""


@dataclass(frozen=True)
class RngState:
    """SplitMix64 state; identical seeds give identical sample sequences."""

    s: int

    def __post_init__(self) -> None:
        if not 0 <= self.s <= _M64:
            raise InvalidControl(f"rng state must be a 64-bit unsigned value, got {self.s}")


def _sm64_next(s: int) -> tuple[int, int]:
    # Raw-integer core shared by every consumer; keep in sync with the
    # module docstring, which is the wire contract.
    s = (s + _GOLDEN) & _M64
    z = s
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return s, z ^ (z >> 31)


def next_rand(state: RngState) -> tuple[RngState, int]:
    """Advance the generator one step; returns (new state, 64-bit output)."""
    s, z = _sm64_next(state.s)
    return RngState(s), z


def uniform_m1p1(z: int) -> float:
    """Map a 64-bit word to the uniform sample on [-1, 1)."""
    return 2.0 * ((z >> 11) * _U53) - 1.0


def bernoulli_pm1(z: int) -> float:
    """Map a 64-bit word to a +/-1 sample with equal probabilities."""
    return 1.0 if (z >> 63) else -1.0


def scramble(v: int) -> int:
    """One SplitMix64 output step applied to a raw 64-bit value."""
    return _sm64_next(v & _M64)[1]


def stream_for_trial(seed: int, trial: int) -> RngState:
    """Independent, deterministic stream for Monte Carlo trial `trial`."""
    v = (seed ^ ((_STREAM + trial * _GOLDEN) & _M64)) & _M64
    return RngState(scramble(v))


class NoiseDist(Enum):
    """Bounded noise distributions (every sample has |chi| <= 1)."""

    BERNOULLI_PM1 = "bernoulli"
    UNIFORM_M1P1 = "uniform"


def sample_noise(dist: NoiseDist, z: int) -> float:
    if dist is NoiseDist.BERNOULLI_PM1:
        return bernoulli_pm1(z)
    return uniform_m1p1(z)


@dataclass(frozen=True)
class ControlChannel:
    """One diagonal control channel: realized intensity d = alpha + ell*chi.

    When ell < min(alpha, 1 - alpha) every realized d stays inside (0, 1)
    (see `admissible`).  Larger amplitudes are accepted -- the controlled map
    extends continuously to d outside [0, 1) and such over-driven channels
    are exercised deliberately in the stochastic experiments -- but they void
    the worst-case contraction guarantees.
    """

    alpha: float
    ell: float = 0.0
    dist: NoiseDist = NoiseDist.BERNOULLI_PM1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and 0.0 <= self.alpha < 1.0):
            raise InvalidControl(f"channel mean must lie in [0, 1), got {self.alpha}")
        if not (math.isfinite(self.ell) and self.ell >= 0.0):
            raise InvalidControl(f"noise amplitude must be >= 0, got {self.ell}")

    @property
    def admissible(self) -> bool:
        """True when every realized intensity is guaranteed inside (0, 1)."""
        return 0.0 < self.alpha < 1.0 and self.ell < min(self.alpha, 1.0 - self.alpha)


def _check_pair(d1: float, d2: float) -> None:
    if not (0.0 <= d1 < 1.0 and 0.0 <= d2 < 1.0):
        raise InvalidControl(f"control pair must lie in [0, 1), got ({d1}, {d2})")


@dataclass(frozen=True)
class Constant:
    """Fixed control pair applied at every step."""

    d1: float
    d2: float = 0.0

    def __post_init__(self) -> None:
        _check_pair(self.d1, self.d2)


@dataclass(frozen=True)
class Sequence:
    """Explicit control pairs, reused cyclically when exhausted."""

    pairs: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise InvalidControl("control sequence must be non-empty")
        for d1, d2 in self.pairs:
            _check_pair(d1, d2)


@dataclass(frozen=True)
class Stochastic:
    """Independently perturbed channels d_i = alpha_i + ell_i * chi_i."""

    ch1: ControlChannel
    ch2: ControlChannel = field(default_factory=lambda: ControlChannel(0.0))


ControlSchedule = Union[Constant, Sequence, Stochastic]


def control_at_step(
    schedule: ControlSchedule, n: int, rng: RngState
) -> tuple[RngState, float, float]:
    """Realized control pair for step index n (0-based).

    A Stochastic schedule always consumes exactly two noise draws per step,
    channel 1 first, even when an amplitude is zero: changing ell must not
    shift the underlying noise stream, so runs differing only in amplitude
    see the same noise realizations.
    """
    if isinstance(schedule, Constant):
        return rng, schedule.d1, schedule.d2
    if isinstance(schedule, Sequence):
        d1, d2 = schedule.pairs[n % len(schedule.pairs)]
        return rng, d1, d2
    s = rng.s
    s, z1 = _sm64_next(s)
    s, z2 = _sm64_next(s)
    c1, c2 = schedule.ch1, schedule.ch2
    d1 = c1.alpha + c1.ell * sample_noise(c1.dist, z1)
    d2 = c2.alpha + c2.ell * sample_noise(c2.dist, z2)
    return RngState(s), d1, d2


def vmtoc_step(
    params: MapParams, target: Point2, d1: float, d2: float, p: Point2
) -> Point2:
    """One controlled iteration: X' = U X* + (I - U) F(X), U = diag(d1, d2).

    Componentwise x' = d1*x* + (1-d1)*F1(p), y' = d2*y* + (1-d2)*F2(p).
    When the target is a fixed point this is X' - X* = (I-U)(F(X) - X*), so
    the target is invariant for any control pair.
    """
    if params.kind is MapKind.HENON:
        fx = p.y + 1.0 - params.a * p.x * p.x
    else:
        fx = p.y + 1.0 - params.a * abs(p.x)
    fy = params.b * p.x
    return Point2(d1 * target.x + (1.0 - d1) * fx, d2 * target.y + (1.0 - d2) * fy)
