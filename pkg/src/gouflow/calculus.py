"""Stochastic exponentials, left-point integrals and covariations on
event-list paths.

All increments already carry genuine drift, so no compensator correction
ever appears inside an integral.  On the exact backend, segments are pure
drift and every integral below is evaluated in closed form, which is what
lets the almost-sure identities be tested at 1e-9 .. 1e-12 tolerances.
The stochastic exponential multiplies factor by factor rather than
summing logs, so jumps below -1 (sign changes) need no special casing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .levy import ConditionError
from .paths import Jump, Path, Segment, _check_skeleton

__all__ = [
    "AlignedSeries",
    "stochastic_exponential",
    "exponential_with_integral",
    "stochastic_integral",
    "quadratic_covariation",
    "realized_quadratic_covariation",
]


@dataclass(frozen=True)
class AlignedSeries:
    """Values aligned to a path's event boundaries.

    Entry 0 is t=0; entry k is the state after event k.  ``lefts`` holds
    the left limit at the same boundary (differs from ``values`` only at
    jumps).
    """

    times: np.ndarray
    lefts: np.ndarray
    values: np.ndarray

    def final(self) -> float:
        return float(self.values[-1])

    def at(self, t: float, left: bool = False) -> float:
        tol = 1e-12
        if left:
            hit = np.nonzero(np.abs(self.times - t) <= tol)[0]
            if hit.size:
                return float(self.lefts[hit[0]])
            k = int(np.searchsorted(self.times, t, side="right")) - 1
            return float(self.values[k])
        k = int(np.nonzero(self.times <= t + tol)[0][-1])
        return float(self.values[k])


def _phi(z: float) -> float:
    """(e^z - 1)/z, continuous at 0."""
    if abs(z) < 1e-8:
        return 1.0 + 0.5 * z
    return math.expm1(z) / z


def _boundary_times(path: Path) -> np.ndarray:
    m = len(path.events)
    times = np.empty(m + 1)
    times[0] = 0.0
    t = 0.0
    for k, ev in enumerate(path.events, start=1):
        t = t + ev.dt if isinstance(ev, Segment) else ev.time
        times[k] = t
    return times


def stochastic_exponential(x: Path) -> AlignedSeries:
    """Doleans-Dade exponential along an event-list path.

    Incremental form of E(X)_s = e^{X_s - sigma^2 s / 2} prod (1+dX) e^{-dX}:
    multiply by e^{dX_cont - sigma^2 dt / 2} per segment and by (1+dX) at
    jumps.  Never zero under condition (A); changes sign exactly at jumps
    below -1.
    """
    var = x.var_du
    m = len(x.events)
    lefts = np.empty(m + 1)
    values = np.empty(m + 1)
    lefts[0] = values[0] = 1.0
    e = 1.0
    for k, ev in enumerate(x.events, start=1):
        if isinstance(ev, Segment):
            e *= math.exp(ev.du - 0.5 * var * ev.dt)
            lefts[k] = e
        else:
            if ev.du == -1.0:
                raise ConditionError("stochastic exponential hits zero: jump of size -1")
            lefts[k] = e
            e *= 1.0 + ev.du
        values[k] = e
    return AlignedSeries(_boundary_times(x), lefts, values)


def exponential_with_integral(
    driver: Path, integrator: Path, power: int = -1
) -> tuple[AlignedSeries, AlignedSeries]:
    """E(driver) together with the running integral of E(driver)^power
    against the integrator.

    Exact backend: segments contribute the closed form
    c dt E_start^power phi(power a dt) with a, c the segment rates, so the
    result carries no discretization error.  Euler backend: left-point
    sums on the grid.
    """
    if power not in (-1, 1):
        raise ValueError("power must be +1 or -1")
    _check_skeleton(driver, integrator)
    var = driver.var_du
    exact = driver.backend == "exact"
    m = len(driver.events)
    times = _boundary_times(driver)
    e_lefts = np.empty(m + 1)
    e_vals = np.empty(m + 1)
    i_lefts = np.empty(m + 1)
    i_vals = np.empty(m + 1)
    e_lefts[0] = e_vals[0] = 1.0
    i_lefts[0] = i_vals[0] = 0.0
    e = 1.0
    acc = 0.0
    for k, (ed, ei) in enumerate(zip(driver.events, integrator.events), start=1):
        if isinstance(ed, Segment):
            if exact:
                a = ed.du  # rate * dt, used directly below
                acc += ei.du * (e ** power if power == 1 else 1.0 / e) * _phi(power * a)
                e *= math.exp(a)
            else:
                acc += ei.du * (e if power == 1 else 1.0 / e)
                e *= math.exp(ed.du - 0.5 * var * ed.dt)
            e_lefts[k] = e
            i_lefts[k] = acc
        else:
            if ed.du == -1.0:
                raise ConditionError("driver jump of size -1")
            e_lefts[k] = e
            i_lefts[k] = acc
            acc += ei.du * (e if power == 1 else 1.0 / e)
            e *= 1.0 + ed.du
        e_vals[k] = e
        i_vals[k] = acc
    return (
        AlignedSeries(times, e_lefts, e_vals),
        AlignedSeries(times, i_lefts, i_vals),
    )


def stochastic_integral(integrand_left: AlignedSeries, integrator: Path) -> AlignedSeries:
    """Left-point Ito sum of an aligned integrand against a path.

    Exact for piecewise-constant integrands (pure-jump paths); on the
    euler backend this is the usual grid sum converging in probability as
    the step shrinks.
    """
    m = len(integrator.events)
    if integrand_left.times.size != m + 1:
        raise ValueError("integrand is not aligned with the integrator")
    lefts = np.empty(m + 1)
    values = np.empty(m + 1)
    lefts[0] = values[0] = 0.0
    acc = 0.0
    for k, ev in enumerate(integrator.events, start=1):
        if isinstance(ev, Segment):
            acc += integrand_left.values[k - 1] * ev.du
            lefts[k] = acc
        else:
            lefts[k] = acc
            acc += integrand_left.lefts[k] * ev.du
        values[k] = acc
    return AlignedSeries(integrand_left.times.copy(), lefts, values)


def quadratic_covariation(x: Path, y: Path, sigma_xy: float = 0.0) -> AlignedSeries:
    """[X, Y]_s = sigma_XY s + sum of dX dY over common jumps.

    The Gaussian rate is supplied by the caller (it is a model quantity,
    not recoverable from one path); the exact backend has only the jump
    sum.
    """
    _check_skeleton(x, y)
    m = len(x.events)
    times = _boundary_times(x)
    lefts = np.empty(m + 1)
    values = np.empty(m + 1)
    lefts[0] = values[0] = 0.0
    acc = 0.0
    t = 0.0
    for k, (ex, ey) in enumerate(zip(x.events, y.events), start=1):
        if isinstance(ex, Segment):
            t += ex.dt
            acc += sigma_xy * ex.dt
            lefts[k] = acc
        else:
            lefts[k] = acc
            acc += ex.du * ey.du
        values[k] = acc
    return AlignedSeries(times, lefts, values)


def realized_quadratic_covariation(x: Path, y: Path) -> float:
    """Sum of products of all increments (grid + jumps).

    Converges to the true covariation as the euler grid is refined.
    """
    _check_skeleton(x, y)
    total = 0.0
    for ex, ey in zip(x.events, y.events):
        total += ex.du * ey.du
    return total
