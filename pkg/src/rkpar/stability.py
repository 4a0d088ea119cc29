"""Absolute-stability polynomials and certified axis intervals.

R(z) = 1 + sum_k (b . A^{k-1} . 1) z^k is computed exactly for rational
tableaus.  The real/imaginary stability intervals are located by bisection
on R(-x)^2 - 1 and |R(iy)|^2 - 1 with exact sign evaluations; on the exact
path the reported interval additionally carries a root-counting certificate
that the defining inequality holds everywhere inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import mpmath

from .coeffs import is_exact, to_float, to_mpf, workprec
from .tableau import Tableau

# bracket widths resolving two decimal digits in reported interval sizes
REAL_WIDTH = Fraction(1, 1000)
IMAG_WIDTH = Fraction(1, 200)

# search never needs to go past the largest interval of any explicit method
# considered here; a runaway scan means the polynomial is not a stability
# polynomial at all
_SCAN_LIMIT = 1 << 12


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class StabilityPolynomial:
    """Coefficients r_0..r_deg of R(z); exact iff the tableau was exact."""

    coeffs: tuple
    exact: bool

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + (Fraction(c) if is_exact(c) else to_float(c))
        return acc


def stability_polynomial(t: Tableau) -> StabilityPolynomial:
    """Amplification polynomial on y' = lambda y, computed coefficientwise
    as r_k = b . A^{k-1} . 1 (exactly for exact tableaus)."""
    exact = t.exact
    if exact:
        return _stability_impl(t, exact)
    with workprec():
        return _stability_impl(t, exact)


def _stability_impl(t: Tableau, exact: bool) -> StabilityPolynomial:
    s = t.s
    lift = (lambda x: x) if exact else to_mpf
    rows = [
        [(j, lift(t.A[i][j])) for j in range(i) if t.A[i][j] != 0] for i in range(s)
    ]
    b = [lift(x) for x in t.b]
    one = Fraction(1) if exact else to_mpf(1)
    zero = Fraction(0) if exact else to_mpf(0)
    v = [one] * s
    coeffs = [one]
    for _ in range(1, s + 1):
        coeffs.append(sum((bi * vi for bi, vi in zip(b, v) if vi), zero))
        nxt = [zero] * s
        for i, row in enumerate(rows):
            acc = zero
            for j, a in row:
                if v[j]:
                    acc = acc + a * v[j]
            nxt[i] = acc
        v = nxt
    while len(coeffs) > 1 and _is_negligible(coeffs[-1], exact):
        coeffs.pop()
    return StabilityPolynomial(coeffs=tuple(coeffs), exact=exact)


def _is_negligible(x, exact: bool) -> bool:
    if exact:
        return x == 0
    return abs(x) <= to_mpf(2) ** -96


def taylor_polynomial(p: int) -> StabilityPolynomial:
    """Degree-p Taylor polynomial of the exponential."""
    from math import factorial

    return StabilityPolynomial(
        coeffs=tuple(Fraction(1, factorial(k)) for k in range(p + 1)), exact=True
    )


@dataclass(frozen=True)
class StabilityInterval:
    """Axis interval with its bracketing certificate.

    value = certified inner endpoint (the inequality holds on [0, value]);
    outer is the first point where it provably fails.  certified is True
    only on the exact path, where a root count proves there is no earlier
    violation.
    """

    value: float
    inner: object
    outer: object
    certified: bool


@dataclass(frozen=True)
class StabilityReport:
    polynomial: StabilityPolynomial
    real: StabilityInterval
    imag: StabilityInterval

    @property
    def i_real(self) -> float:
        return self.real.value

    @property
    def i_imag(self) -> float:
        return self.imag.value


def _real_axis_poly(r: StabilityPolynomial):
    """Q(x) = R(-x)^2 - 1, low-to-high coefficients."""
    n = r.degree
    neg = [r.coeffs[k] * (1 if k % 2 == 0 else -1) for k in range(n + 1)]
    q = _convolve(neg, neg)
    q[0] = q[0] - 1
    return q


def _imag_axis_poly(r: StabilityPolynomial):
    """P(u) with P(y^2) = |R(iy)|^2 - 1, low-to-high coefficients."""
    n = r.degree
    re = [0] * (n + 1)
    im = [0] * (n + 1)
    for k in range(n + 1):
        c = r.coeffs[k]
        if k % 2 == 0:
            re[k] = c * (1 if k % 4 == 0 else -1)
        else:
            im[k] = c * (1 if k % 4 == 1 else -1)
    sq = [a + b for a, b in zip(_convolve(re, re), _convolve(im, im))]
    assert all(
        _is_negligible(c, r.exact) for c in sq[1::2]
    ), "squared modulus must be even in y"
    p = sq[0::2]
    p[0] = p[0] - 1
    return p


def _convolve(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj == 0:
                continue
            out[i + j] = out[i + j] + ai * bj
    return out


def _eval_poly(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _lowest_nonzero(coeffs, exact: bool):
    for k in range(1, len(coeffs)):
        if not _is_negligible(coeffs[k], exact):
            return k, coeffs[k]
    return None, None


def _first_crossing(coeffs, exact: bool, width: Fraction, square_input: bool):
    """Largest x* (bracketed to width) with poly(x) <= 0 on [0, x*], where
    poly is evaluated at x^2 when square_input is set.

    poly(0) = 0 by construction; a positive leading term means the
    inequality already fails in every right neighborhood of zero.
    """
    k, lead = _lowest_nonzero(coeffs, exact)
    if k is None:
        raise StabilityError(
            "amplification factor has unit modulus everywhere; interval unbounded"
        )
    if lead > 0:
        return Fraction(0), Fraction(0)

    def value(x: Fraction):
        arg = x * x if square_input else x
        return _eval_poly(coeffs, arg if exact else to_mpf(arg))

    step = Fraction(1, 16)
    prev, x = Fraction(0), step
    while True:
        if x > _SCAN_LIMIT:
            raise StabilityError("no sign change located; scan limit reached")
        if value(x) > 0:
            break
        prev, x = x, x + step
    lo, hi = prev, x
    while hi - lo > width:
        mid = (lo + hi) / 2
        if value(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _certify_nonpositive(coeffs, lo: Fraction) -> bool:
    """Exact proof that poly <= 0 on (0, lo): count roots inside and check
    the sign between them (touch roots are allowed)."""
    if lo == 0:
        return True
    import sympy

    x = sympy.Symbol("x")
    poly = sympy.Poly(
        [sympy.Rational(c.numerator, c.denominator) for c in map(Fraction, reversed(coeffs))],
        x,
        domain="QQ",
    )
    inside = poly.count_roots(0, lo)
    if _eval_poly(coeffs, Fraction(0)) == 0:
        inside -= 1
    if _eval_poly(coeffs, lo) == 0:
        inside -= 1
    if inside <= 0:
        return True
    # isolate interior roots and sample the sign between consecutive ones
    intervals = poly.intervals(inf=sympy.Rational(0), sup=sympy.Rational(lo))
    cuts = [Fraction(0)]
    for (a, b), _mult in intervals:
        fa = Fraction(sympy.Rational(a))
        fb = Fraction(sympy.Rational(b))
        if fb <= 0 or fa >= lo:
            continue
        cuts.append(max(fa, Fraction(0)))
        cuts.append(min(fb, lo))
    cuts.append(lo)
    cuts = sorted(set(cuts))
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        if _eval_poly(coeffs, mid) > 0:
            return False
    return True


def _interval(
    coeffs, exact: bool, width: Fraction, square_input: bool
) -> StabilityInterval:
    lo, hi = _first_crossing(coeffs, exact, width, square_input)
    certified = False
    if exact:
        coeffs_f = [Fraction(c) for c in coeffs]
        upper = lo * lo if square_input else lo
        certified = _certify_nonpositive(coeffs_f, upper)
        if not certified:
            raise StabilityError(
                "sign scan missed an earlier violation; interval not certified"
            )
    return StabilityInterval(value=float(lo), inner=lo, outer=hi, certified=certified)


def real_interval(
    r: StabilityPolynomial, width: Fraction = REAL_WIDTH
) -> StabilityInterval:
    """Largest x (to bracket width) with |R(-x)| <= 1 on [0, x]."""
    if r.coeffs[0] != 1:
        raise StabilityError("stability polynomial must have R(0) = 1")
    width = Fraction(width)
    if r.exact:
        return _interval(_real_axis_poly(r), True, width, False)
    with workprec():
        return _interval(_real_axis_poly(r), False, width, False)


def imag_interval(
    r: StabilityPolynomial, width: Fraction = IMAG_WIDTH
) -> StabilityInterval:
    """Largest y (to bracket width) with |R(iy)| <= 1 on [0, y].

    Bisection runs in y but evaluates the even polynomial
    P(u) = |R(iy)|^2 - 1 at u = y^2, keeping all sign tests exact for
    rational tableaus.
    """
    if r.coeffs[0] != 1:
        raise StabilityError("stability polynomial must have R(0) = 1")
    width = Fraction(width)
    if r.exact:
        return _interval(_imag_axis_poly(r), True, width, True)
    with workprec():
        return _interval(_imag_axis_poly(r), False, width, True)


def stability_report(
    t: Tableau,
    real_width: Fraction = REAL_WIDTH,
    imag_width: Fraction = IMAG_WIDTH,
) -> StabilityReport:
    """Polynomial plus both certified axis intervals for one tableau."""
    r = stability_polynomial(t)
    return StabilityReport(
        polynomial=r,
        real=real_interval(r, real_width),
        imag=imag_interval(r, imag_width),
    )


def imag_excursion(r: StabilityPolynomial, y_max: float, samples: int = 1000) -> float:
    """Diagnostic: max over [0, y_max] of |R(iy)| - 1 on a sample grid.

    High-order methods can sit within roundoff of the unit circle along the
    imaginary axis even when the exact interval is empty; this quantifies
    the excursion at working precision.
    """
    with workprec():
        best = mpmath.mpf(0)
        coeffs = [to_mpf(c) if not isinstance(c, complex) else c for c in r.coeffs]
        for i in range(samples + 1):
            y = mpmath.mpf(y_max) * i / samples
            z = mpmath.mpc(0, y)
            acc = mpmath.mpc(0)
            for c in reversed(coeffs):
                acc = acc * z + c
            best = max(best, abs(acc) - 1)
        return float(best)
