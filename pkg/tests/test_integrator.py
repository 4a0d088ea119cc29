import math
from fractions import Fraction as F

import numpy as np
import pytest

from rkpar.integrator import (
    IVP,
    ControllerConfig,
    IntegrationError,
    StepSizeUnderflow,
    control_step,
    controlled_step,
    integrate,
    rk_step,
)
from rkpar.problems import forced_decay, reference_solution
from rkpar.tableau import make_tableau


def euler_tableau():
    return make_tableau("euler", [[]], [F(1)], [F(1)], p=1, p_hat=1)


def test_euler_step():
    y1, yh = rk_step(euler_tableau(), lambda y: y, np.array([1.0]), 0.1)
    assert y1[0] == pytest.approx(1.1, rel=1e-15)
    assert yh[0] == y1[0]


def test_midpoint_pair_step(methods):
    t = methods("ex-euler", 2).tableau
    y1, yh = rk_step(t, lambda y: y, np.array([1.0]), 0.1)
    assert y1[0] == pytest.approx(1.105, rel=1e-15)
    assert yh[0] == pytest.approx(1.1, rel=1e-15)


def test_zero_step_is_identity(methods):
    t = methods("ex-midpoint", 4).tableau
    y1, yh = rk_step(t, lambda y: np.sin(y), np.array([0.3, -2.0]), 0.0)
    assert np.array_equal(y1, np.array([0.3, -2.0]))
    assert np.array_equal(yh, y1)


def test_nonfinite_stage_raises():
    with pytest.raises(IntegrationError):
        rk_step(
            euler_tableau(),
            lambda y: np.full_like(y, np.inf),
            np.array([1.0]),
            0.1,
        )


def test_controller_accept_example():
    cfg = ControllerConfig(epsilon=1e-6)
    accepted, h_next = control_step(cfg, 0.1, 1e-8, 7)
    assert accepted
    assert h_next == pytest.approx(0.9 * 0.1 * (1e-6 / 1e-8) ** 0.1, rel=1e-12)
    assert h_next == pytest.approx(0.14264, abs=5e-6)


def test_controller_reject_example():
    cfg = ControllerConfig(epsilon=1e-6)
    accepted, h_next = control_step(cfg, 0.1, 1e-4, 7)
    assert not accepted
    assert h_next == pytest.approx(0.9 * 0.1 * (1e-6 / 1e-4) ** 0.1, rel=1e-12)
    assert h_next < 0.1


def test_controller_clamps_growth():
    cfg = ControllerConfig(epsilon=1e-6)
    accepted, h_next = control_step(cfg, 0.1, 1e-30, 7)
    assert accepted and h_next == pytest.approx(0.5, rel=1e-15)
    # exact zero estimate also gets the max factor
    accepted, h_next = control_step(cfg, 0.1, 0.0, 7)
    assert accepted and h_next == pytest.approx(0.5, rel=1e-15)


def test_controller_clamps_shrink():
    cfg = ControllerConfig(epsilon=1e-6)
    _, h_next = control_step(cfg, 0.1, 1e6, 7)
    assert h_next == pytest.approx(0.02, rel=1e-15)  # kappa_min * h


def test_rejected_steps_always_shrink():
    cfg = ControllerConfig(epsilon=1e-6)
    for delta in (1.0000001e-6, 1e-5, 1e-3, 1.0, 1e12):
        accepted, h_next = control_step(cfg, 0.25, delta, 5)
        assert not accepted and h_next < 0.25


def test_controlled_step_outcome(methods):
    t = methods("ex-euler", 2).tableau
    out = controlled_step(t, lambda y: y, np.array([1.0]), 0.1, ControllerConfig(epsilon=1e-6))
    assert out.delta_norm == pytest.approx(abs(1.105 - 1.1), rel=1e-12)
    assert not out.accepted  # 5e-3 estimate vs 1e-6 tolerance
    assert out.h_next < out.h_used == 0.1
    out = controlled_step(t, lambda y: y, np.array([1.0]), 1e-4, ControllerConfig(epsilon=1e-6))
    assert out.accepted and out.h_next > out.h_used


def test_pi_mode_uses_history():
    cfg = ControllerConfig(epsilon=1e-6, mode="PI")
    _, h_plain = control_step(cfg, 0.1, 1e-8, 7)
    _, h_pi = control_step(cfg, 0.1, 1e-8, 7, prev_delta=1e-7)
    assert h_plain != h_pi


def test_config_validation():
    with pytest.raises(ValueError):
        ControllerConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        ControllerConfig(epsilon=1e-6, kappa=1.5)
    with pytest.raises(ValueError):
        ControllerConfig(epsilon=1e-6, kappa_min=2.0)


def test_exponential_accuracy(methods):
    ivp = IVP(
        f=lambda y: y,
        y0=np.array([1.0]),
        t0=0.0,
        T=1.0,
        exact=lambda t: np.array([math.exp(t)]),
    )
    _, record = integrate(methods("ex-midpoint", 8), ivp, ControllerConfig(epsilon=1e-10))
    assert record.final_error < 1e-8
    assert record.f_evals == record.steps_total * 17


def test_feval_accounting_via_counting_wrapper(methods):
    calls = {"n": 0}

    def f(y):
        calls["n"] += 1
        return -y

    ivp = IVP(f=f, y0=np.array([1.0]), t0=0.0, T=2.0)
    _, record = integrate(methods("ex-euler", 4), ivp, ControllerConfig(epsilon=1e-8))
    assert record.f_evals == calls["n"]
    assert record.f_evals == record.steps_total * 7
    assert record.f_evals_seq == record.steps_total * 4


def test_trajectory_endpoints(methods):
    ivp = forced_decay().ivp
    traj, record = integrate(methods("ex-euler", 3), ivp, ControllerConfig(epsilon=1e-7))
    assert traj[0][0] == ivp.t0 and traj[-1][0] == ivp.T
    assert np.array_equal(traj[-1][1], record.final_state)


def test_fixed_step_lands_on_T(methods):
    ivp = forced_decay().ivp
    traj, record = integrate(methods("ex-euler", 2), ivp, fixed_step=0.3)
    assert traj[-1][0] == ivp.T
    assert record.steps_rejected == 0
    assert record.steps_accepted == math.ceil(ivp.T / 0.3)


def test_fixed_step_error_ratio_matches_order(methods):
    # halving h divides the error by about 2^p
    spec = forced_decay()
    ref = reference_solution(spec)
    m = methods("ex-euler", 2)
    errs = []
    for h in (0.02, 0.01):
        _, record = integrate(m, spec.ivp, fixed_step=h)
        errs.append(float(np.max(np.abs(record.final_state - ref))))
    ratio = errs[0] / errs[1]
    assert 2**2 * 0.8 < ratio < 2**2 * 1.25


def test_step_size_underflow(methods):
    # y' = y^2 blows up at t = 1; the controller drives h to the floor
    ivp = IVP(f=lambda y: y**2, y0=np.array([1.0]), t0=0.0, T=2.0)
    with pytest.raises(StepSizeUnderflow, match="roundoff floor"):
        integrate(methods("ex-euler", 4), ivp, ControllerConfig(epsilon=1e-8))


def test_step_budget_guard(methods):
    ivp = forced_decay().ivp
    with pytest.raises(IntegrationError, match="budget"):
        integrate(
            methods("ex-euler", 2), ivp, ControllerConfig(epsilon=1e-12), max_steps=3
        )


def test_determinism_rerun(methods):
    spec = forced_decay()
    runs = []
    for _ in range(2):
        traj, record = integrate(
            methods("ex-midpoint", 6), spec.ivp, ControllerConfig(epsilon=1e-9)
        )
        runs.append((traj, record))
    t0, r0 = runs[0]
    t1, r1 = runs[1]
    assert r0.steps_accepted == r1.steps_accepted
    assert r0.f_evals == r1.f_evals
    assert all(np.array_equal(a[1], b[1]) and a[0] == b[0] for a, b in zip(t0, t1))
