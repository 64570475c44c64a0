"""Optimal-velocity car-following dynamics, equilibria, and linearization.

The driver model is the classic OVM: acceleration depends on the spacing
to the vehicle ahead through a desired-velocity profile, on the relative
velocity, and on the vehicle's own velocity,

    a = alpha * (V(s) - v) + beta * s_dot.

V(s) is zero below a standstill spacing ``s_st``, saturates at ``v_max``
above a free-flow spacing ``s_go``, and rises smoothly (half-cosine) in
between.  All functions here are pure and operate on plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

__all__ = [
    "DriverParams",
    "Equilibrium",
    "LinearCoeffs",
    "desired_velocity",
    "desired_velocity_slope",
    "ovm_acceleration",
    "equilibrium_spacing",
    "linearize",
]


@dataclass(frozen=True)
class DriverParams:
    """OVM parameters of one driver.

    alpha   gain on the desired-velocity gap (1/s)
    beta    gain on the relative velocity (1/s)
    v_max   free-flow velocity (m/s)
    s_st    standstill spacing, V(s) = 0 for s <= s_st (m)
    s_go    free-flow spacing, V(s) = v_max for s >= s_go (m)
    delay   reaction delay (s), used by the nonlinear simulator only
    """

    alpha: float = 0.6
    beta: float = 0.9
    v_max: float = 30.0
    s_st: float = 5.0
    s_go: float = 35.0
    delay: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.v_max <= 0:
            raise ValueError(f"v_max must be > 0, got {self.v_max}")
        if not 0 <= self.s_st < self.s_go:
            raise ValueError(
                f"need 0 <= s_st < s_go, got s_st={self.s_st}, s_go={self.s_go}"
            )
        if self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")


@dataclass(frozen=True)
class Equilibrium:
    """Uniform-flow operating point: every vehicle at (s_star, v_star)."""

    v_star: float
    s_star: float


@dataclass(frozen=True)
class LinearCoeffs:
    """First-order coefficients of the OVM around an equilibrium.

    alpha1  spacing gain (1/s^2), alpha * V'(s_star)
    alpha2  own-velocity gain (1/s), alpha + beta
    alpha3  predecessor-velocity gain (1/s), beta
    """

    alpha1: float
    alpha2: float
    alpha3: float
    equilibrium: Equilibrium = field(
        default_factory=lambda: Equilibrium(v_star=15.0, s_star=20.0)
    )

    def __post_init__(self):
        if not self.alpha1 > 0:
            raise ValueError(f"alpha1 must be > 0, got {self.alpha1}")
        if not self.alpha2 > self.alpha3 > 0:
            raise ValueError(
                f"need alpha2 > alpha3 > 0, got alpha2={self.alpha2}, alpha3={self.alpha3}"
            )


def desired_velocity(s: float, p: DriverParams) -> float:
    """Spacing-dependent desired velocity V(s) of a human driver.

    Zero up to s_st, v_max beyond s_go, half-cosine ramp in between.
    Continuous and nondecreasing.  Raises for negative spacing.
    """
    if s < 0:
        raise ValueError(f"spacing must be >= 0, got {s}")
    if s <= p.s_st:
        return 0.0
    if s >= p.s_go:
        return p.v_max
    x = (s - p.s_st) / (p.s_go - p.s_st)
    return 0.5 * p.v_max * (1.0 - math.cos(math.pi * x))


def desired_velocity_slope(s: float, p: DriverParams) -> float:
    """Derivative dV/ds; zero outside the (s_st, s_go) ramp."""
    if s < 0:
        raise ValueError(f"spacing must be >= 0, got {s}")
    if s <= p.s_st or s >= p.s_go:
        return 0.0
    width = p.s_go - p.s_st
    x = (s - p.s_st) / width
    return 0.5 * p.v_max * math.pi / width * math.sin(math.pi * x)


def ovm_acceleration(s: float, s_dot: float, v: float, p: DriverParams) -> float:
    """OVM acceleration alpha*(V(s) - v) + beta*s_dot (m/s^2)."""
    return p.alpha * (desired_velocity(s, p) - v) + p.beta * s_dot


def equilibrium_spacing(
    v_star: float,
    p: DriverParams,
    profile: Optional[Callable[[float], float]] = None,
) -> Equilibrium:
    """Spacing at which a vehicle holds velocity v_star with zero acceleration.

    Inverts V(s) = v_star.  The saturated branches make the inverse
    non-unique at the endpoints; by convention v_star = 0 maps to s_st and
    v_star = v_max maps to s_go (the continuous limits of the interior
    branch).  The default half-cosine ramp is inverted in closed form; pass
    ``profile`` (a monotone map of spacing to velocity on [s_st, s_go]) to
    invert an alternative ramp by bisection instead.
    """
    if not 0 <= v_star <= p.v_max:
        raise ValueError(f"v_star must lie in [0, {p.v_max}], got {v_star}")
    if v_star == 0:
        return Equilibrium(v_star=v_star, s_star=p.s_st)
    if v_star == p.v_max:
        return Equilibrium(v_star=v_star, s_star=p.s_go)
    if profile is None:
        s_star = p.s_st + (p.s_go - p.s_st) * math.acos(1.0 - 2.0 * v_star / p.v_max) / math.pi
    else:
        s_star = _bisect_monotone(profile, p.s_st, p.s_go, v_star)
    return Equilibrium(v_star=v_star, s_star=s_star)


def _bisect_monotone(f, lo: float, hi: float, target: float, tol: float = 1e-12) -> float:
    """Solve f(x) = target for nondecreasing f on [lo, hi]."""
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if f(mid) < target:
            a = mid
        else:
            b = mid
        if b - a <= tol * max(1.0, abs(b)):
            break
    return 0.5 * (a + b)


def linearize(eq: Equilibrium, p: DriverParams) -> LinearCoeffs:
    """Linearized OVM coefficients at an interior equilibrium.

    alpha1 = alpha * V'(s_star), alpha2 = alpha + beta, alpha3 = beta.
    The equilibrium must sit strictly inside (s_st, s_go): on a saturated
    branch V'(s_star) = 0 and the linear model degenerates.
    """
    if not p.s_st < eq.s_star < p.s_go:
        raise ValueError(
            f"equilibrium spacing {eq.s_star} is saturated; "
            f"linearization needs s_st < s_star < s_go"
        )
    return LinearCoeffs(
        alpha1=p.alpha * desired_velocity_slope(eq.s_star, p),
        alpha2=p.alpha + p.beta,
        alpha3=p.beta,
        equilibrium=eq,
    )
