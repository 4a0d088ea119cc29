import random
from fractions import Fraction as F

import pytest

from rkpar.coeffs import parse_entry, format_entry, to_mpf
from rkpar.tableau import (
    TableauError,
    TableauParseError,
    make_tableau,
    parse_tableau,
    serialize_tableau,
)


def midpoint_pair():
    return make_tableau(
        "midpoint", [[], [F(1, 2)]], [F(0), F(1)], [F(1), F(0)], p=2, p_hat=1
    )


def test_entry_parsing():
    assert parse_entry("1/6") == F(1, 6)
    assert parse_entry("-3") == F(-3)
    x = parse_entry("0.25")
    assert not isinstance(x, F) and float(x) == 0.25


def test_zero_denominator_rejected():
    with pytest.raises(ValueError):
        parse_entry("1/0")


def test_forward_euler_roundtrip():
    t = make_tableau("euler", [[]], [F(1)], [F(1)], p=1, p_hat=1)
    back = parse_tableau(serialize_tableau(t))
    assert back == t and back.s == 1 and back.b == (F(1),)


def test_midpoint_roundtrip_bit_exact():
    t = midpoint_pair()
    assert parse_tableau(serialize_tableau(t)) == t


def test_random_rational_roundtrip():
    rng = random.Random(7)
    for _ in range(20):
        a21 = F(rng.randint(-9, 9), rng.randint(1, 9))
        b = [F(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(2)]
        t = make_tableau("rand", [[], [a21]], b, b, p=1, p_hat=1)
        assert parse_tableau(serialize_tableau(t)) == t


def test_mpf_roundtrip():
    x = to_mpf(1) / 3
    assert parse_entry(format_entry(x)) == x


def test_comments_and_whitespace():
    text = """# a comment
RKPAIR midpoint s=2 p=2 phat=1
c: 0 1/2   # trailing comment
A[2]: 1/2
b: 0 1
bhat: 1 0
"""
    assert parse_tableau(text) == midpoint_pair()


def test_parse_error_names_line():
    text = "RKPAIR x s=2 p=2 phat=1\nc: 0 1/2\nA[2]: 1/q\nb: 0 1\nbhat: 1 0\n"
    with pytest.raises(TableauParseError, match="line 3"):
        parse_tableau(text)


def test_rowsum_violation_rejected():
    text = "RKPAIR x s=2 p=2 phat=1\nc: 0 1/3\nA[2]: 1/2\nb: 0 1\nbhat: 1 0\n"
    with pytest.raises(TableauParseError, match="row-sum"):
        parse_tableau(text)


def test_wrong_entry_count_rejected():
    text = "RKPAIR x s=2 p=2 phat=1\nc: 0 1/2\nA[2]: 1/2 0\nb: 0 1\nbhat: 1 0\n"
    with pytest.raises(TableauParseError, match=r"A\[2\]"):
        parse_tableau(text)


def test_malformed_header():
    with pytest.raises(TableauParseError, match="header"):
        parse_tableau("RKPAIR nolabel s=2\nc: 0\n")


def test_upper_triangular_entry_rejected():
    with pytest.raises(TableauError):
        make_tableau(
            "bad", [[F(0), F(1)], [F(1, 2), F(0)]], [F(0), F(1)], [F(1), F(0)], p=2, p_hat=1
        )


def test_order_sanity_enforced():
    with pytest.raises(TableauError):
        make_tableau("bad", [[]], [F(1)], [F(1)], p=1, p_hat=2)


def test_exactness_flag():
    assert midpoint_pair().exact
    t = make_tableau("mixed", [[], [to_mpf(0.5)]], [F(0), F(1)], [F(1), F(0)], p=2, p_hat=1)
    assert not t.exact


def test_rational_field_arithmetic_is_exact():
    rng = random.Random(11)
    for _ in range(200):
        a = F(rng.randint(-50, 50), rng.randint(1, 50))
        b = F(rng.randint(-50, 50), rng.randint(1, 50))
        assert (a + b) - b == a
        if b != 0:
            assert (a * b) / b == a
