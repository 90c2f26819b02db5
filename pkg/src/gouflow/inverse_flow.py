"""Inverse stochastic flows of the driven linear SDE.

Freezing a realized (U, L) path on [0, t], the map x -> V_t^x is affine
with slope E(U)_t.  Reversing time turns its inverse into another GOU
process: with the time-reversed pair (U~, L~) and

    T_s = U~_s + sigma_U^2 s + sum (dU~)^2 / (1 - dU~),

the process R_s = E(T)_s (y + int_(0,s] E(T)_{u-}^{-1} dL~_u) satisfies
the pathwise identity V_{(t-s)-} = R_s when started at y = V_t.  The
checks here are almost-sure statements, so the exact backend verifies
them to float precision rather than statistically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import AlignedSeries
from .gou import GouTrajectory, solve_forward, solve_pair
from .levy import ConditionError, LevyModel2
from .paths import (
    Jump,
    Path,
    Segment,
    eta_path,
    reverse_path,
    t_path,
)

__all__ = [
    "FlowMap",
    "flow_map",
    "eta_tilde_path",
    "inverse_flow_solve",
    "verify_pathwise_identity",
    "flow_inverse_check",
]


# ---------------------------------------------------------------------------
# the affine flow
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowMap:
    """The affine transport map x = V_u -> V_t along one frozen path."""

    u: float
    t: float
    slope: float
    intercept: float

    def apply(self, x: float) -> float:
        return self.slope * x + self.intercept

    def invert(self, v: float) -> float:
        if self.slope == 0.0:
            raise ZeroDivisionError("flow map is not invertible (zero slope)")
        return (v - self.intercept) / self.slope

    def compose(self, later: "FlowMap") -> "FlowMap":
        """Transport over [self.u, later.t] via the intermediate time."""
        if abs(later.u - self.t) > 1e-12:
            raise ValueError("flow maps do not chain at a common time")
        return FlowMap(
            u=self.u,
            t=later.t,
            slope=later.slope * self.slope,
            intercept=later.slope * self.intercept + later.intercept,
        )


def flow_map(traj: GouTrajectory, u: float, t: float) -> FlowMap:
    """Read the affine map V_u -> V_t off a solved trajectory.

    slope = E(U)_t / E(U)_u and intercept = E(U)_t (I_t - I_u), where I
    is the running integral of the explicit solution; both u and t must
    be event-boundary times.
    """
    e_u = traj.exponential.at(u)
    e_t = traj.exponential.at(t)
    i_u = traj.integral.at(u)
    i_t = traj.integral.at(t)
    return FlowMap(u=float(u), t=float(t), slope=e_t / e_u, intercept=e_t * (i_t - i_u))


# ---------------------------------------------------------------------------
# the reversed drivers
# ---------------------------------------------------------------------------


def eta_tilde_path(reversed_ul: Path, model: LevyModel2) -> Path:
    """The integrator driving the inverse-flow SDE, from (U~, L~).

    Jumps d eta~ = dL~ / (1 - dU~); continuous part dL~ + sigma_UL dt.
    Equivalently (tested): the time reversal of the forward eta path.
    """
    sul = model.sigma_ul
    events = []
    for ev in reversed_ul.events:
        if isinstance(ev, Segment):
            events.append(Segment(ev.dt, ev.dl + sul * ev.dt))
        else:
            if ev.du == 1.0:
                raise ConditionError("eta~ undefined: reversed jump of size 1")
            events.append(Jump(ev.time, ev.dl / (1.0 - ev.du)))
    return Path(
        horizon=reversed_ul.horizon,
        events=tuple(events),
        backend=reversed_ul.backend,
        cov=((model.sigma_l_sq, 0.0), (0.0, 0.0)),
        label="eta~",
        grid_dt=reversed_ul.grid_dt,
    )


def _split(reversed_pair: Path, model: LevyModel2) -> tuple[Path, Path]:
    """T driver and L~ integrator as aligned scalar paths."""
    tp = t_path(reversed_pair, model.sigma_u_sq)
    t_events = []
    l_events = []
    for ev in tp.events:
        if isinstance(ev, Segment):
            t_events.append(Segment(ev.dt, ev.du))
            l_events.append(Segment(ev.dt, ev.dl))
        else:
            t_events.append(Jump(ev.time, ev.du))
            l_events.append(Jump(ev.time, ev.dl))
    base = dict(
        horizon=tp.horizon, backend=tp.backend, grid_dt=tp.grid_dt
    )
    driver = Path(
        events=tuple(t_events),
        cov=((model.sigma_u_sq, 0.0), (0.0, 0.0)),
        label="T",
        **base,
    )
    integrator = Path(
        events=tuple(l_events),
        cov=((model.sigma_l_sq, 0.0), (0.0, 0.0)),
        label="L~",
        **base,
    )
    return driver, integrator


def inverse_flow_solve(
    path: Path, model: LevyModel2, t: float, y: float, check_tol: float = 1e-10
) -> GouTrajectory:
    """Run the inverse flow on [0, t] from level y.

    Internally also builds eta~ both from the reversed pair and by
    reversing the forward eta path; on the exact backend the two must
    agree eventwise (the euler backend shares increments, so they agree
    there too).
    """
    if t > path.horizon + 1e-12:
        raise ValueError("t beyond the path horizon")
    rev = reverse_path(path, t)
    driver, integrator = _split(rev, model)

    eta_a = eta_tilde_path(rev, model)
    eta_b = reverse_path(eta_path(path, model), t)
    errs = [
        abs(ea.du - eb.du)
        for ea, eb in zip(eta_a.events, eta_b.events)
    ]
    if errs and max(errs) > check_tol:
        raise ArithmeticError(
            f"eta~ construction routes disagree (max increment error {max(errs):.3e})"
        )

    return solve_pair(driver, integrator, y)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


def _mixed_error(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + max(abs(a), abs(b)))


def verify_pathwise_identity(
    path: Path, model: LevyModel2, x: float, t: float | None = None
) -> dict:
    """Max deviation in V_{(t-s)-} = R_s over all event boundaries.

    R is the inverse flow started at y = V_t^x.  The error metric is
    |lhs - rhs| / (1 + max(|lhs|, |rhs|)); on the exact backend it should
    sit at float-precision level, on the euler backend it shrinks with
    the grid step and is reported for convergence studies.
    """
    t = path.horizon if t is None else float(t)
    traj = solve_forward(path, model, x)
    # start from the left limit: a jump exactly at the reversal time is not
    # part of the reversed path (V_{(t-s)-} never involves it either)
    v_t = traj.values.at(t, left=True)
    rtraj = inverse_flow_solve(path, model, t, v_t)

    max_err = 0.0
    times = rtraj.values.times
    for k in range(times.size):
        s = times[k]
        # skip the first of two boundaries sharing a time (segment end
        # followed by a jump): its value is the next boundary's left limit
        if k + 1 < times.size and times[k + 1] == s:
            continue
        lhs = traj.values.at(t - s, left=True) if s > 0 else v_t
        rhs = float(rtraj.values.values[k])
        max_err = max(max_err, _mixed_error(lhs, rhs))
        if s > 0:
            # left limits match the other one-sided limits: R_{s-} = V_{t-s}
            lhs_l = traj.values.at(t - s) if s < t else traj.values.values[0]
            rhs_l = float(rtraj.values.lefts[k])
            max_err = max(max_err, _mixed_error(float(lhs_l), rhs_l))
    return {
        "max_error": max_err,
        "n_points": int(times.size),
        "t": t,
        "x": float(x),
        "backend": path.backend,
        "grid_dt": path.grid_dt,
    }


def flow_inverse_check(
    path: Path, model: LevyModel2, u: float, t: float, y: float
) -> dict:
    """Compare the inverted affine flow map with the inverse-flow path.

    The map transporting V_u to V_t is inverted algebraically and must
    match the inverse-flow trajectory's left limit at s = t - u.
    """
    if not model.condition_b:
        raise ConditionError(
            "flow inversion as a monotone bijection needs condition (B)"
        )
    traj = solve_forward(path, model, 0.0)
    fmap = flow_map(traj, u, t)
    x_direct = fmap.invert(y)
    rtraj = inverse_flow_solve(path, model, t, y)
    s = t - u
    if s <= 0:
        r_left = y
    else:
        r_left = rtraj.values.at(s, left=True)
    return {
        "u": float(u),
        "t": float(t),
        "y": float(y),
        "x_from_map": float(x_direct),
        "r_left": float(r_left),
        "error": _mixed_error(float(x_direct), float(r_left)),
        "slope": fmap.slope,
        "intercept": fmap.intercept,
    }
