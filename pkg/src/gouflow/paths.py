"""Event-list sample paths and their derived processes.

A path is an ordered list of events on [0, horizon]: ``Segment`` events
carry the drift (and, on the euler backend, Gaussian) increment over a
positive duration, ``Jump`` events carry an instantaneous bivariate jump.
Jumps are first class, so on the exact backend (no Gaussian part) every
computed quantity is free of discretization error.

Derived processes (eta, W, xi, T, time reversals) share the event
skeleton of their source path, which is what makes pathwise identities
checkable event by event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .levy import ConditionError, LevyModel2

__all__ = [
    "Segment",
    "Jump",
    "Path",
    "sample_path",
    "sample_paths",
    "eta_path",
    "w_path",
    "xi_path",
    "t_path",
    "reverse_path",
    "truncate_path",
    "recover_ul_from_xi_eta",
    "pair_path",
    "path_values",
    "dump_csv",
]

_TIME_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class Segment:
    """Continuous increment over a duration dt (drift + Gaussian)."""

    dt: float
    du: float
    dl: float = 0.0


@dataclass(frozen=True, slots=True)
class Jump:
    """Instantaneous jump at an interior time."""

    time: float
    du: float
    dl: float = 0.0


@dataclass(frozen=True)
class Path:
    """Event-list realization of a scalar or bivariate cadlag process.

    ``cov`` is the Gaussian covariance *rate* of the (du, dl) components;
    scalar processes live in the du slot with dl identically zero.
    """

    horizon: float
    events: tuple
    backend: str  # "exact" or "euler"
    cov: tuple = ((0.0, 0.0), (0.0, 0.0))
    label: str = "U,L"
    grid_dt: float | None = None

    @property
    def var_du(self) -> float:
        return self.cov[0][0]

    @property
    def cov_dudl(self) -> float:
        return self.cov[0][1]

    @property
    def var_dl(self) -> float:
        return self.cov[1][1]

    def jumps(self):
        return [e for e in self.events if isinstance(e, Jump)]

    def validate(self) -> None:
        t = 0.0
        seg_total = 0.0
        for ev in self.events:
            if isinstance(ev, Segment):
                if ev.dt <= 0:
                    raise ValueError("segment duration must be positive")
                t += ev.dt
                seg_total += ev.dt
            else:
                if not (t - _TIME_TOL <= ev.time <= t + _TIME_TOL):
                    # jump events must sit at the running clock position
                    raise ValueError(f"jump at {ev.time} out of order (clock {t})")
                if ev.du == -1.0:
                    raise ValueError("jump with dU = -1")
        if abs(seg_total - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise ValueError(
                f"segment durations sum to {seg_total}, horizon is {self.horizon}"
            )
        if self.backend == "exact" and any(v != 0.0 for row in self.cov for v in row):
            raise ValueError("exact backend requires zero Gaussian covariance")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _events_from_jumps(model, horizon, jt, ju, jl, rng, grid_dt, backend):
    """Assemble the event list given sorted jump times and marks."""
    b_u, b_l = model.drift
    events = []
    t = 0.0
    chol = None
    if backend == "euler":
        cov = np.array(model.gaussian_cov)
        # guard tiny negative eigenvalues from user-specified near-singular cov
        w, v = np.linalg.eigh(cov)
        chol = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))

    def fill_gap(gap):
        nonlocal t
        if gap <= _TIME_TOL:
            return
        if backend == "exact":
            events.append(Segment(gap, b_u * gap, b_l * gap))
        else:
            nsteps = max(1, math.ceil(gap / grid_dt))
            dt = gap / nsteps
            z = rng.standard_normal((nsteps, 2))
            gauss = z @ chol.T * math.sqrt(dt)
            for k in range(nsteps):
                events.append(Segment(dt, b_u * dt + gauss[k, 0], b_l * dt + gauss[k, 1]))
        t += gap

    for time, du, dl in zip(jt, ju, jl):
        fill_gap(time - t)
        events.append(Jump(float(time), float(du), float(dl)))
        t = float(time)
    fill_gap(horizon - t)
    return events


def sample_path(
    model: LevyModel2,
    horizon: float,
    rng: np.random.Generator,
    grid_dt: float = 1e-3,
    backend: str | None = None,
) -> Path:
    """Sample one (U, L) path: Poisson jump times, iid marks, drift/Gaussian
    segments filling the gaps.

    Deterministic function of (model, horizon, grid_dt, stream state).
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if backend is None:
        backend = "euler" if model.has_gaussian else "exact"
    if backend == "exact" and model.has_gaussian:
        raise ValueError("exact backend requested but the model has a Gaussian part")
    if backend == "euler" and grid_dt <= 0:
        raise ValueError("euler backend needs grid_dt > 0")

    if model.has_jumps:
        n_jumps = rng.poisson(model.jump_intensity * horizon)
        jt = np.sort(rng.uniform(0.0, horizon, size=n_jumps))
        ju, jl = model.jump_law.sample(rng, n_jumps)
    else:
        jt = np.empty(0)
        ju = jl = np.empty(0)
    events = _events_from_jumps(model, horizon, jt, ju, jl, rng, grid_dt, backend)
    return Path(
        horizon=float(horizon),
        events=tuple(events),
        backend=backend,
        cov=model.gaussian_cov if backend == "euler" else ((0.0, 0.0), (0.0, 0.0)),
        grid_dt=grid_dt if backend == "euler" else None,
    )


def sample_paths(
    model: LevyModel2,
    horizon: float,
    n: int,
    rng: np.random.Generator,
    grid_dt: float = 1e-3,
    backend: str | None = None,
) -> list[Path]:
    """Sample n independent paths with batched random draws.

    For exact-backend jump models all Poisson counts, jump times and marks
    are drawn in three vectorized calls; the per-path work is only event
    assembly.
    """
    if backend is None:
        backend = "euler" if model.has_gaussian else "exact"
    if backend == "euler" or not model.has_jumps:
        return [sample_path(model, horizon, rng, grid_dt, backend) for _ in range(n)]

    counts = rng.poisson(model.jump_intensity * horizon, size=n)
    total = int(counts.sum())
    all_times = rng.uniform(0.0, horizon, size=total)
    all_u, all_l = model.jump_law.sample(rng, total)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    out = []
    for i in range(n):
        lo, hi = offsets[i], offsets[i + 1]
        order = np.argsort(all_times[lo:hi], kind="stable")
        jt = all_times[lo:hi][order]
        ju = all_u[lo:hi][order]
        jl = all_l[lo:hi][order]
        events = _events_from_jumps(model, horizon, jt, ju, jl, rng, grid_dt, "exact")
        out.append(Path(horizon=float(horizon), events=tuple(events), backend="exact"))
    return out


# ---------------------------------------------------------------------------
# derived processes
# ---------------------------------------------------------------------------


def _scalar(path: Path, events, var: float, label: str) -> Path:
    return Path(
        horizon=path.horizon,
        events=tuple(events),
        backend=path.backend,
        cov=((var, 0.0), (0.0, 0.0)),
        label=label,
        grid_dt=path.grid_dt,
    )


def eta_path(path: Path, model: LevyModel2) -> Path:
    """The integrator process of the explicit solution formula.

    Jumps d_eta = dL/(1+dU); continuous part dL_cont - sigma_UL dt.
    """
    sul = model.sigma_ul
    events = []
    for ev in path.events:
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, ev.dl - sul * ev.dt))
        else:
            if ev.du == -1.0:
                raise ConditionError("eta undefined: jump with dU = -1")
            events.append(Jump(ev.time, ev.dl / (1.0 + ev.du)))
    return _scalar(path, events, model.sigma_l_sq, "eta")


def w_path(path: Path, sigma_u_sq: float | None = None) -> Path:
    """Driver of the reciprocal stochastic exponential: 1/E(U) = E(W).

    Jumps dW = -dU/(1+dU); continuous part -dU_cont + sigma_U^2 dt.
    """
    suu = path.var_du if sigma_u_sq is None else sigma_u_sq
    events = []
    for ev in path.events:
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, -ev.du + suu * ev.dt))
        else:
            if ev.du == -1.0:
                raise ConditionError("W undefined: jump with dU = -1")
            events.append(Jump(ev.time, -ev.du / (1.0 + ev.du)))
    return _scalar(path, events, suu, "W")


def xi_path(path: Path, sigma_u_sq: float | None = None) -> Path:
    """xi = -log E(U); needs all jumps dU > -1.

    Jumps -log(1+dU); continuous part -dU_cont + sigma_U^2 dt / 2.
    """
    suu = path.var_du if sigma_u_sq is None else sigma_u_sq
    events = []
    for ev in path.events:
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, -ev.du + 0.5 * suu * ev.dt))
        else:
            if ev.du <= -1.0:
                raise ConditionError("xi undefined: jump with dU <= -1")
            events.append(Jump(ev.time, -math.log1p(ev.du)))
    return _scalar(path, events, suu, "xi")


def t_path(reversed_u: Path, sigma_u_sq: float) -> Path:
    """Driver of the inverse flow, built from the reversed first component.

    Jumps dT = dU~/(1 - dU~); continuous part dU~_cont + sigma_U^2 dt.
    """
    events = []
    for ev in reversed_u.events:
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, ev.du + sigma_u_sq * ev.dt, ev.dl))
        else:
            if ev.du == 1.0:
                raise ConditionError("T undefined: reversed jump of size 1")
            events.append(Jump(ev.time, ev.du / (1.0 - ev.du), ev.dl))
    return replace(reversed_u, events=tuple(events), label="T," + reversed_u.label)


# ---------------------------------------------------------------------------
# time reversal
# ---------------------------------------------------------------------------


def truncate_path(path: Path, at: float) -> Path:
    """Restrict to [0, at], splitting a straddling segment pro rata."""
    if at > path.horizon + _TIME_TOL:
        raise ValueError("truncation time beyond horizon")
    events = []
    t = 0.0
    for ev in path.events:
        if isinstance(ev, Segment):
            if t + ev.dt <= at + _TIME_TOL:
                events.append(ev)
                t += ev.dt
            else:
                frac = (at - t) / ev.dt
                if frac > _TIME_TOL:
                    events.append(Segment(at - t, ev.du * frac, ev.dl * frac))
                t = at
                break
        else:
            if ev.time <= at + _TIME_TOL:
                events.append(ev)
            else:
                break
    return replace(path, horizon=float(at), events=tuple(events))


def reverse_path(path: Path, at: float | None = None) -> Path:
    """Time-reversal at ``at``: X~_s = X_{(at-s)-} - X_{at-}.

    Jumps map to negated jumps at the reflected times; segments keep their
    durations with negated increments.  A jump exactly at the reversal
    time is deleted first (a null event for the sampled laws).
    """
    at = path.horizon if at is None else float(at)
    if at > path.horizon + _TIME_TOL:
        raise ValueError("reversal time beyond horizon")
    p = truncate_path(path, at) if at < path.horizon - _TIME_TOL else path
    events = []
    for ev in reversed(p.events):
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, -ev.du, -ev.dl))
        else:
            if abs(ev.time - at) <= _TIME_TOL:
                continue  # no jump at the reversal time itself
            events.append(Jump(at - ev.time, -ev.du, -ev.dl))
    return replace(p, horizon=float(at), events=tuple(events), label="rev:" + p.label)


# ---------------------------------------------------------------------------
# recovery and pairing
# ---------------------------------------------------------------------------


def _check_skeleton(a: Path, b: Path) -> None:
    if len(a.events) != len(b.events) or abs(a.horizon - b.horizon) > _TIME_TOL:
        raise ValueError("paths have mismatched event skeletons")
    for ea, eb in zip(a.events, b.events):
        if type(ea) is not type(eb):
            raise ValueError("paths have mismatched event skeletons")
        if isinstance(ea, Segment):
            if abs(ea.dt - eb.dt) > _TIME_TOL:
                raise ValueError("segment durations differ")
        elif abs(ea.time - eb.time) > _TIME_TOL:
            raise ValueError("jump times differ")


def pair_path(driver: Path, integrator: Path, cov=None, label: str | None = None) -> Path:
    """Zip two aligned scalar paths into a bivariate (driver, integrator) path."""
    _check_skeleton(driver, integrator)
    events = []
    for ed, ei in zip(driver.events, integrator.events):
        if isinstance(ed, Segment):
            events.append(Segment(ed.dt, ed.du, ei.du))
        else:
            events.append(Jump(ed.time, ed.du, ei.du))
    if cov is None:
        cov = ((driver.var_du, 0.0), (0.0, integrator.var_du))
    return Path(
        horizon=driver.horizon,
        events=tuple(events),
        backend=driver.backend,
        cov=cov,
        label=label or f"{driver.label}|{integrator.label}",
        grid_dt=driver.grid_dt,
    )


def recover_ul_from_xi_eta(
    xi: Path, eta: Path, sigma_xi_sq: float, sigma_xi_eta: float
) -> Path:
    """Rebuild the driving pair (U, L) from (xi, eta).

    Eventwise: jumps dU = e^{-d_xi} - 1 and dL = e^{-d_xi} d_eta;
    continuous parts dU = -d_xi + sigma_xi^2 dt / 2 and
    dL = d_eta - sigma_{xi,eta} dt.
    """
    _check_skeleton(xi, eta)
    events = []
    for ex, ee in zip(xi.events, eta.events):
        if isinstance(ex, Segment):
            events.append(
                Segment(
                    ex.dt,
                    -ex.du + 0.5 * sigma_xi_sq * ex.dt,
                    ee.du - sigma_xi_eta * ex.dt,
                )
            )
        else:
            g = math.exp(-ex.du)
            events.append(Jump(ex.time, g - 1.0, g * ee.du))
    cov = (
        (sigma_xi_sq, -sigma_xi_eta),
        (-sigma_xi_eta, eta.var_du),
    )
    return Path(
        horizon=xi.horizon,
        events=tuple(events),
        backend=xi.backend,
        cov=cov,
        label="U,L(recovered)",
        grid_dt=xi.grid_dt,
    )


# ---------------------------------------------------------------------------
# evaluation / export
# ---------------------------------------------------------------------------


def path_values(path: Path):
    """Cumulative values at event boundaries.

    Returns (times, u_left, u_right, l_left, l_right); index 0 is t=0.
    At a jump the time repeats and left/right values differ.
    """
    m = len(path.events)
    times = np.empty(m + 1)
    ul = np.empty(m + 1)
    ur = np.empty(m + 1)
    ll = np.empty(m + 1)
    lr = np.empty(m + 1)
    times[0] = 0.0
    ul[0] = ur[0] = 0.0
    ll[0] = lr[0] = 0.0
    t = 0.0
    u = 0.0
    l = 0.0
    for k, ev in enumerate(path.events, start=1):
        if isinstance(ev, Segment):
            t += ev.dt
            ul[k] = u + ev.du
            ll[k] = l + ev.dl
            u += ev.du
            l += ev.dl
        else:
            t = ev.time
            ul[k] = u
            ll[k] = l
            u += ev.du
            l += ev.dl
        times[k] = t
        ur[k] = u
        lr[k] = l
    return times, ul, ur, ll, lr


def value_at(path: Path, t: float, left: bool = False):
    """(U, L) value at event-boundary time t (left limit if requested)."""
    times, ul, ur, ll, lr = path_values(path)
    if left:
        at_t = np.nonzero(np.abs(times - t) <= _TIME_TOL)[0]
        if at_t.size:
            k = int(at_t[0])
            return float(ul[k]), float(ll[k])
        k = int(np.searchsorted(times, t, side="right")) - 1
        return float(ur[k]), float(lr[k])
    k = int(np.nonzero(times <= t + _TIME_TOL)[0][-1])
    return float(ur[k]), float(lr[k])


def dump_csv(path: Path, fh) -> None:
    """Debug dump: one row per event (time, kind, dU, dL)."""
    fh.write("time,kind,dU,dL\n")
    t = 0.0
    for ev in path.events:
        if isinstance(ev, Segment):
            t += ev.dt
            fh.write(f"{t!r},segment,{ev.du!r},{ev.dl!r}\n")
        else:
            t = ev.time
            fh.write(f"{t!r},jump,{ev.du!r},{ev.dl!r}\n")
