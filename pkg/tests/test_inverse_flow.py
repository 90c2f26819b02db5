import math

import numpy as np
import pytest

from gouflow import (
    ConditionError,
    FlowMap,
    flow_inverse_check,
    flow_map,
    inverse_flow_solve,
    solve_forward,
    verify_pathwise_identity,
)
from gouflow.paths import sample_path
from gouflow.presets import get_preset

from conftest import make_stream


def test_flow_map_algebra():
    f = FlowMap(u=0.0, t=1.0, slope=2.0, intercept=1.0)
    g = FlowMap(u=1.0, t=2.0, slope=0.5, intercept=-1.0)
    assert f.apply(3.0) == 7.0
    assert f.invert(f.apply(3.0)) == pytest.approx(3.0)
    h = f.compose(g)
    assert h.u == 0.0 and h.t == 2.0
    assert h.apply(3.0) == pytest.approx(g.apply(f.apply(3.0)))
    with pytest.raises(ValueError):
        g.compose(f)
    with pytest.raises(ZeroDivisionError):
        FlowMap(0.0, 1.0, 0.0, 0.0).invert(1.0)


def test_flow_map_transports_solutions(mixed_jump_model):
    """flow_map read off V^0 must map V_u^x to V_t^x for every x."""
    m = mixed_jump_model
    p = sample_path(m, 2.0, make_stream("fmap", 0))
    base = solve_forward(p, m, 0.0)
    # pick two event-boundary times
    times = base.values.times
    u, t = float(times[len(times) // 3]), float(times[-1])
    fmap = flow_map(base, u, t)
    for x in (-2.0, 0.5, 3.0):
        traj = solve_forward(p, m, x)
        assert fmap.apply(traj.values.at(u)) == pytest.approx(
            traj.values.at(t), rel=1e-10, abs=1e-12
        )


def test_pathwise_identity_exact_backend(mixed_jump_model):
    for i in range(100):
        p = sample_path(mixed_jump_model, 2.0, make_stream("pw", i))
        rep = verify_pathwise_identity(p, mixed_jump_model, x=1.0)
        assert rep["max_error"] <= 1e-9, (i, rep)


def test_pathwise_identity_under_sign_flips(sign_flip_model):
    """Condition (A) only: the inverse flow still inverts pathwise."""
    for i in range(50):
        p = sample_path(sign_flip_model, 2.0, make_stream("pw-flip", i))
        rep = verify_pathwise_identity(p, sign_flip_model, x=0.5)
        assert rep["max_error"] <= 1e-9, (i, rep)


def test_pathwise_identity_interior_time(mixed_jump_model):
    p = sample_path(mixed_jump_model, 2.0, make_stream("pw-int", 0))
    # reverse at an event-boundary interior time
    traj = solve_forward(p, mixed_jump_model, 1.0)
    t = float(traj.values.times[len(traj.values.times) // 2])
    if t > 0:
        rep = verify_pathwise_identity(p, mixed_jump_model, x=1.0, t=t)
        assert rep["max_error"] <= 1e-9


def test_pathwise_identity_euler_convergence(dufresne_model):
    medians = []
    for dt in (4e-3, 1e-3):
        errs = []
        for i in range(20):
            p = sample_path(dufresne_model, 1.0, make_stream(f"pw-e{dt}", i), dt)
            errs.append(verify_pathwise_identity(p, dufresne_model, 1.0)["max_error"])
        medians.append(float(np.median(errs)))
    assert medians[1] < medians[0]


def test_inverse_flow_solve_checks_eta_routes(mixed_jump_model):
    p = sample_path(mixed_jump_model, 1.5, make_stream("ifs", 0))
    traj = inverse_flow_solve(p, mixed_jump_model, 1.5, y=0.3)
    assert traj.values.values[0] == pytest.approx(0.3)
    with pytest.raises(ValueError):
        inverse_flow_solve(p, mixed_jump_model, 99.0, y=0.3)


def test_flow_inverse_check_agrees(mixed_jump_model):
    p = sample_path(mixed_jump_model, 2.0, make_stream("fic", 0))
    base = solve_forward(p, mixed_jump_model, 0.0)
    times = base.values.times
    u, t = float(times[2]), float(times[-1])
    rep = flow_inverse_check(p, mixed_jump_model, u, t, y=0.7)
    assert rep["error"] <= 1e-9, rep


def test_flow_inverse_check_requires_condition_b(sign_flip_model):
    p = sample_path(sign_flip_model, 1.0, make_stream("fic-b", 0))
    with pytest.raises(ConditionError):
        flow_inverse_check(p, sign_flip_model, 0.0, 1.0, 0.5)


def test_degenerate_inverse_flow_keeps_constant():
    m = get_preset("degenerate-k").model
    for i in range(20):
        p = sample_path(m, 2.0, make_stream("deg-if", i))
        r = inverse_flow_solve(p, m, 2.0, y=2.0)
        assert np.max(np.abs(r.values.values - 2.0)) < 1e-10
