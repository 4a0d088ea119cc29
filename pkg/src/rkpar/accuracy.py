"""Principal error norm, accuracy-efficiency indices, and the embedded
error-estimator defect count."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .builders import EmbeddedMethod
from .coeffs import to_float, workprec
from .graphs import seq_stages
from .order_conditions import (
    DEFAULT_TOL,
    ElementaryWeights,
    order_residuals,
    residual_is_zero,
)
from .tableau import Tableau
from .trees import MAX_ORDER, trees_of_order


@dataclass(frozen=True)
class AccuracyReport:
    C_p1: float
    eta: float
    eta_parallel: float


def principal_error_norm(t: Tableau, p: int | None = None) -> float:
    """Euclidean norm of the order p+1 residuals of the principal weights.

    Residuals follow the plain convention b.phi - 1/gamma; p defaults to
    the tableau's declared order and must be the sharp order for the result
    to be the leading error constant.
    """
    p = t.p if p is None else p
    if p + 1 > MAX_ORDER:
        raise ValueError(f"needs trees of order {p + 1} > {MAX_ORDER}")
    ew = ElementaryWeights(t)

    def total():
        acc = Fraction(0) if ew.exact else 0.0
        for tree in trees_of_order(p + 1):
            res = ew.residual(tree, t.b)
            if ew.exact:
                acc = acc + res * res
            else:
                rf = to_float(res)
                acc = acc + rf * rf
        return math.sqrt(acc)

    if ew.exact:
        return total()
    with workprec():
        return total()


def accuracy_efficiency(
    m: EmbeddedMethod, parallel: bool = False, C_p1: float | None = None
) -> float:
    """Per-stage accuracy index (1/s) (1/C_{p+1})^{1/(p+1)}; the parallel
    variant charges only sequential stages, scaling by s/s_seq."""
    t = m.tableau
    if C_p1 is None:
        C_p1 = principal_error_norm(t)
    if C_p1 <= 0:
        raise ValueError(
            f"{t.label}: zero principal error norm; declared order is not sharp"
        )
    eta = (1.0 / t.s) * (1.0 / C_p1) ** (1.0 / (t.p + 1))
    if parallel:
        eta *= t.s / seq_stages(m.graph)
    return eta


def accuracy_report(m: EmbeddedMethod) -> AccuracyReport:
    C = principal_error_norm(m.tableau)
    eta = accuracy_efficiency(m, C_p1=C)
    return AccuracyReport(
        C_p1=C, eta=eta, eta_parallel=eta * m.s / seq_stages(m.graph)
    )


def embedded_defect(m: EmbeddedMethod, tol: float | None = None) -> int:
    """Number of order-p conditions NOT satisfied by the embedded weights.

    Exact zero tests apply when the tableau is exact and its order
    conditions are known to hold exactly; otherwise residuals below the
    default tolerance count as satisfied.
    """
    t = m.tableau
    exact = t.exact and m.params.get("exact_order_conditions", True)
    use_tol = tol if tol is not None else (None if exact else DEFAULT_TOL)
    count = 0
    for tree, res in order_residuals(t, t.p, "b_hat"):
        if not residual_is_zero(tree, res, exact, use_tol):
            count += 1
    return count
