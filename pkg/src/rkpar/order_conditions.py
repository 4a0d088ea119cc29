"""Order-condition residuals via elementary weights on rooted trees.

For a tree t the elementary weight of a weight vector w is w . phi(t) where
phi is built recursively from the tableau: phi(leaf) = 1 and phi of a tree
with children u_1..u_m is the elementwise product of A.phi(u_j).  The
residual convention is the plain w . phi(t) - 1/gamma(t); the variant with a
1/sigma(t) factor is available through ``scaled=True``.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import is_exact, to_float, to_mpf, workprec
from .tableau import Tableau
from .trees import MAX_ORDER, RootedTree, trees_of_order


class ElementaryWeights:
    """Cached elementary-weight evaluation for one tableau.

    Exact tableaus evaluate in rational arithmetic; otherwise everything is
    lifted to mpf at the package working precision.
    """

    def __init__(self, t: Tableau):
        self.tableau = t
        self.exact = t.exact
        lift = (lambda x: x) if self.exact else to_mpf
        self._rows = []
        for i in range(t.s):
            row = [(j, lift(t.A[i][j])) for j in range(i) if t.A[i][j] != 0]
            self._rows.append(row)
        self._one = Fraction(1) if self.exact else to_mpf(1)
        self._zero = Fraction(0) if self.exact else to_mpf(0)
        self._ones = [self._one] * t.s
        self._child_cache: dict[RootedTree, list] = {}

    def _apply_A(self, v):
        out = []
        for row in self._rows:
            acc = self._zero
            for j, a in row:
                if v[j]:
                    acc = acc + a * v[j]
            out.append(acc)
        return out

    def _child_vector(self, tree: RootedTree):
        cached = self._child_cache.get(tree)
        if cached is None:
            cached = self._apply_A(self.phi(tree))
            self._child_cache[tree] = cached
        return cached

    def phi(self, tree: RootedTree):
        """Stage vector phi(tree)."""
        if not tree.children:
            return self._ones
        vec = list(self._child_vector(tree.children[0]))
        for child in tree.children[1:]:
            cv = self._child_vector(child)
            vec = [a * b for a, b in zip(vec, cv)]
        return vec

    def weight(self, tree: RootedTree, w):
        phi = self.phi(tree)
        lift = (lambda x: x) if self.exact else to_mpf
        acc = self._zero
        for wi, ph in zip(w, phi):
            if wi != 0 and ph:
                acc = acc + lift(wi) * ph
        return acc

    def residual(self, tree: RootedTree, w, scaled: bool = False):
        rhs = (
            Fraction(1, tree.gamma)
            if self.exact
            else to_mpf(1) / to_mpf(tree.gamma)
        )
        res = self.weight(tree, w) - rhs
        if scaled:
            res = res / tree.sigma if self.exact else res / to_mpf(tree.sigma)
        return res


def order_residuals(t: Tableau, q: int, weights="b", scaled: bool = False):
    """Residuals for every tree of order exactly q, in canonical tree order."""
    if not 1 <= q <= MAX_ORDER:
        raise ValueError(f"order must be in 1..{MAX_ORDER}, got {q}")
    w = t.weights(weights) if isinstance(weights, str) else tuple(weights)
    if len(w) != t.s:
        raise ValueError(f"weight vector has {len(w)} entries, expected {t.s}")
    ew = ElementaryWeights(t)
    if ew.exact:
        return [(tree, ew.residual(tree, w, scaled)) for tree in trees_of_order(q)]
    with workprec():
        return [(tree, ew.residual(tree, w, scaled)) for tree in trees_of_order(q)]


# default residual tolerance for inexact tableaus, relative to max(1, 1/gamma)
DEFAULT_TOL = 1e-13


def residual_is_zero(tree: RootedTree, res, exact: bool, tol: float | None) -> bool:
    if exact and tol is None:
        return res == 0
    tol = DEFAULT_TOL if tol is None else tol
    scale = max(1.0, 1.0 / tree.gamma)
    return abs(to_float(res)) <= tol * scale


def verify_order(
    t: Tableau, weights="b", tol: float | None = None, q_cap: int = MAX_ORDER
) -> int:
    """Largest q <= q_cap with all residuals of order <= q vanishing.

    Exact tableaus are checked with exact zero tests unless a tolerance is
    supplied; inexact tableaus use ``tol`` (default 1e-13) relative to
    max(1, 1/gamma).  The returned order is sharp below the cap: some
    residual at order+1 is nonzero.  A return equal to q_cap means the
    verified order is at least q_cap.
    """
    w = t.weights(weights) if isinstance(weights, str) else tuple(weights)
    if len(w) != t.s:
        raise ValueError(f"weight vector has {len(w)} entries, expected {t.s}")
    ew = ElementaryWeights(t)

    def check_order(q: int) -> bool:
        for tree in trees_of_order(q):
            res = ew.residual(tree, w)
            if not residual_is_zero(tree, res, ew.exact, tol):
                return False
        return True

    def run() -> int:
        for q in range(1, q_cap + 1):
            if not check_order(q):
                return q - 1
        return q_cap

    if ew.exact:
        return run()
    with workprec():
        return run()
