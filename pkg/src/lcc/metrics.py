"""Fuel-consumption and velocity-error metrics over simulation traces."""

from __future__ import annotations

from typing import Iterable, Optional, Tuple

import numpy as np

from .sim import SimulationTrace

__all__ = ["fuel_rate", "total_fuel", "aave"]


def fuel_rate(v, a):
    """Instantaneous fuel consumption in mL/s at velocity v, acceleration a.

    An engine-load proxy R = 0.333 + 0.00108 v^2 + 1.2 a drives the rate;
    below zero load the engine idles at 0.444 mL/s, otherwise the rate
    grows with load times speed plus an acceleration surcharge that only
    applies while accelerating.  Accepts scalars or arrays.
    """
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.any(v < 0):
        raise ValueError("velocity must be >= 0")
    R = 0.333 + 0.00108 * v**2 + 1.2 * a
    rate = 0.444 + 0.09 * R * v + np.where(a > 0, 0.054 * a**2 * v, 0.0)
    out = np.where(R <= 0, 0.444, rate)
    return float(out) if out.ndim == 0 else out


def _metric_vehicles(trace: SimulationTrace, vehicles) -> list:
    if vehicles is None:
        return [vid for vid in trace.ids if vid != "h"]
    return list(vehicles)


def total_fuel(
    trace: SimulationTrace,
    window: Tuple[float, float],
    vehicles: Optional[Iterable] = None,
) -> float:
    """Fuel burned (mL) by a set of vehicles over a time window.

    Trapezoidal time integral of each vehicle's instantaneous rate,
    summed over the set (all non-head vehicles by default).  An empty
    window integrates to zero.
    """
    mask = trace.window_mask(*window)
    if mask.sum() < 2:
        return 0.0
    t = trace.times[mask]
    total = 0.0
    for vid in _metric_vehicles(trace, vehicles):
        j = trace.col(vid)
        rate = fuel_rate(trace.velocity[mask, j], trace.acceleration[mask, j])
        total += float(np.trapezoid(rate, t))
    return total


def aave(
    trace: SimulationTrace,
    window: Tuple[float, float],
    v_star: Optional[float] = None,
    vehicles: Optional[Iterable] = None,
) -> float:
    """Average absolute velocity error (m/s) over a window and vehicle set.

    Time-averages |v_i - v*| per vehicle (trapezoidal), then averages
    across the set.
    """
    if v_star is None:
        v_star = trace.v_star
    mask = trace.window_mask(*window)
    if mask.sum() < 2:
        return 0.0
    t = trace.times[mask]
    span = t[-1] - t[0]
    vids = _metric_vehicles(trace, vehicles)
    acc = 0.0
    for vid in vids:
        dev = np.abs(trace.velocity[mask, trace.col(vid)] - v_star)
        acc += float(np.trapezoid(dev, t)) / span
    return acc / len(vids)
