from fractions import Fraction as F

import pytest

from rkpar.order_conditions import order_residuals, verify_order
from rkpar.tableau import make_tableau


def euler():
    return make_tableau("euler", [[]], [F(1)], [F(1)], p=1, p_hat=1)


def midpoint():
    return make_tableau(
        "midpoint", [[], [F(1, 2)]], [F(0), F(1)], [F(1), F(0)], p=2, p_hat=1
    )


def test_euler_first_order_consistency():
    [(tree, res)] = order_residuals(euler(), 1)
    assert res == 0 and tree.order == 1


def test_euler_second_order_residual():
    [(_, res)] = order_residuals(euler(), 2)
    assert res == F(-1, 2)


def test_midpoint_third_order_residuals():
    residuals = {str(t): r for t, r in order_residuals(midpoint(), 3)}
    assert set(residuals.values()) == {F(-1, 12), F(-1, 6)}


def test_verified_orders():
    assert verify_order(midpoint(), "b") == 2
    assert verify_order(midpoint(), "b_hat") == 1
    assert verify_order(euler(), "b") == 1


def test_cap_semantics():
    # order-1 method checked with a tiny cap reports the cap, not beyond
    assert verify_order(euler(), "b", q_cap=1) == 1


def test_explicit_weight_vector():
    t = midpoint()
    assert verify_order(t, [F(1), F(0)]) == 1


def test_weight_length_mismatch():
    with pytest.raises(ValueError):
        order_residuals(midpoint(), 2, [F(1)])


def test_order_bounds():
    with pytest.raises(ValueError):
        order_residuals(euler(), 13)


def test_sigma_scaled_variant():
    # the bushy order-3 tree has sigma 2; scaling halves its residual
    plain = {t: r for t, r in order_residuals(midpoint(), 3)}
    scaled = {t: r for t, r in order_residuals(midpoint(), 3, scaled=True)}
    for t, r in plain.items():
        assert scaled[t] == r / t.sigma


def test_verify_order_never_overshoots():
    # perturb the midpoint weight vector; order drops to zero immediately
    t = make_tableau(
        "broken", [[], [F(1, 2)]], [F(1, 10), F(1)], [F(1), F(0)], p=2, p_hat=1
    )
    assert verify_order(t, "b") == 0
