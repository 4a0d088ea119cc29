"""Construct embedded pairs by symbolic execution of the method recipes.

Every intermediate value of an explicit one-step recipe is an affine state
y_n + h * sum(w_i f(Y_i)); tracking the weight dicts while running the
recipe yields the Butcher arrays directly.  Extrapolation pairs come out
with exact rational coefficients; deferred correction is exact for rational
node sets and carried at WORK_PREC bits for Chebyshev nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .coeffs import Coefficient, is_exact, to_mpf, workprec
from .graphs import StageGraph, build_stage_graph
from .order_conditions import order_residuals, residual_is_zero, verify_order
from .tableau import Tableau, TableauError, make_tableau, parse_tableau
from .trees import MAX_ORDER

EULER_EXTRAPOLATION = "ex-euler"
MIDPOINT_EXTRAPOLATION = "ex-midpoint"
DEFERRED_CORRECTION = "dc"
REFERENCE = "reference"


class BuildError(ValueError):
    pass


class LoadError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EmbeddedMethod:
    """A built pair: tableau plus its provenance-labeled stage graph.

    params carries family specifics (order, chain or sweep structure for
    scheduling, extrapolation weights, DC configuration).
    """

    tableau: Tableau
    graph: StageGraph
    family: str
    params: Mapping[str, object]

    @property
    def s(self) -> int:
        return self.tableau.s

    @property
    def p(self) -> int:
        return self.tableau.p

    @property
    def label(self) -> str:
        return self.tableau.label


class _StageSpace:
    """Registry of stages; each stage i is f evaluated at an affine state
    referencing only stages < i."""

    def __init__(self):
        self.rows: list[dict[int, Coefficient]] = []
        self.labels: list[str] = []

    def add_stage(self, state: dict[int, Coefficient], label: str) -> int:
        idx = len(self.rows)
        if any(j >= idx for j in state):
            raise BuildError(f"stage {idx + 1} would depend on a later stage")
        self.rows.append(dict(state))
        self.labels.append(label)
        return idx

    def a_rows(self) -> list[list[Coefficient]]:
        return [
            [w.get(j, Fraction(0)) for j in range(i)]
            for i, w in enumerate(self.rows)
        ]

    def weight_vector(self, state: dict[int, Coefficient]) -> list[Coefficient]:
        return [state.get(i, Fraction(0)) for i in range(len(self.rows))]


def _stepped(state: dict, coeff: Coefficient, stage: int) -> dict:
    out = dict(state)
    out[stage] = out.get(stage, Fraction(0)) + coeff
    return out


def _inc(state: dict, coeff: Coefficient, stage: int) -> None:
    state[stage] = state.get(stage, Fraction(0)) + coeff


def _neville_combine(cur: dict, prev: dict, denom: Fraction) -> dict:
    """cur + (cur - prev)/denom, elementwise over weight dicts."""
    scale_cur = 1 + Fraction(1, 1) / denom
    scale_prev = Fraction(1, 1) / denom
    out: dict[int, Coefficient] = {}
    for i, w in cur.items():
        out[i] = w * scale_cur
    for i, w in prev.items():
        out[i] = out.get(i, Fraction(0)) - w * scale_prev
    return out


def _method(space, b_state, bhat_state, label, p, p_hat, family, params):
    b = space.weight_vector(b_state)
    b_hat = space.weight_vector(bhat_state)
    tableau = make_tableau(label, space.a_rows(), b, b_hat, p=p, p_hat=p_hat)
    graph = build_stage_graph(tableau, labels=space.labels)
    return EmbeddedMethod(
        tableau=tableau,
        graph=graph,
        family=family,
        params=MappingProxyType(dict(params)),
    )


def euler_extrapolation_pair(p: int) -> EmbeddedMethod:
    """Extrapolation of explicit Euler over the harmonic sequence 1..p.

    Chain k takes k Euler substeps of size h/k; the k first-order results
    are combined by Aitken-Neville to order p, with the order p-1 column
    supplying the embedded weights.  The evaluation at y_n is shared by all
    chains, so s = (p^2 - p + 2)/2.
    """
    if not 2 <= p <= 12:
        raise BuildError(f"euler extrapolation needs 2 <= p <= 12, got {p}")
    space = _StageSpace()
    root = space.add_stage({}, "f(y_n)")
    endpoints: list[dict] = []
    chains: list[tuple[int, ...]] = []
    for k in range(1, p + 1):
        w: dict[int, Coefficient] = {}
        f_prev = root
        chain = []
        for j in range(1, k + 1):
            w = _stepped(w, Fraction(1, k), f_prev)
            if j < k:
                f_prev = space.add_stage(w, f"T_{k}1 substep {j}")
                chain.append(f_prev)
        endpoints.append(w)
        chains.append(tuple(chain))

    T = {(j, 1): endpoints[j - 1] for j in range(1, p + 1)}
    V = {(j, 1): [Fraction(i + 1 == j) for i in range(p)] for j in range(1, p + 1)}
    for k in range(2, p + 1):
        for j in range(k, p + 1):
            denom = Fraction(j, j - k + 1) - 1
            T[(j, k)] = _neville_combine(T[(j, k - 1)], T[(j - 1, k - 1)], denom)
            V[(j, k)] = [
                a + (a - b) / denom
                for a, b in zip(V[(j, k - 1)], V[(j - 1, k - 1)])
            ]

    expected = (p * p - p + 2) // 2
    if len(space.rows) != expected:
        raise BuildError(f"stage count {len(space.rows)} != {expected}")
    return _method(
        space,
        T[(p, p)],
        T[(p - 1, p - 1)] if p > 1 else T[(1, 1)],
        f"ex-euler-{p}",
        p,
        p - 1,
        EULER_EXTRAPOLATION,
        {"p": p, "chains": tuple(chains), "extrapolation_weights": tuple(V[(p, p)])},
    )


def midpoint_extrapolation_pair(p: int) -> EmbeddedMethod:
    """Extrapolation of the explicit midpoint rule, r = p/2 chains.

    Chain k starts with one Euler substep of h/(2k) and continues with 2k-1
    midpoint substeps of h/k; every extrapolation column gains two orders,
    so the embedded column has order p-2.  s = (p^2 + 4)/4.
    """
    if p % 2 or not 4 <= p <= 18:
        raise BuildError(f"midpoint extrapolation needs even 4 <= p <= 18, got {p}")
    r = p // 2
    space = _StageSpace()
    root = space.add_stage({}, "f(y_n)")
    endpoints: list[dict] = []
    chains: list[tuple[int, ...]] = []
    for k in range(1, r + 1):
        w_prev: dict[int, Coefficient] = {}
        w_cur = _stepped({}, Fraction(1, 2 * k), root)
        chain = []
        for j in range(2, 2 * k + 1):
            f_mid = space.add_stage(w_cur, f"T_{k}1 substep {j - 1}")
            chain.append(f_mid)
            w_next = _stepped(w_prev, Fraction(1, k), f_mid)
            w_prev, w_cur = w_cur, w_next
        endpoints.append(w_cur)
        chains.append(tuple(chain))

    T = {(j, 1): endpoints[j - 1] for j in range(1, r + 1)}
    V = {(j, 1): [Fraction(i + 1 == j) for i in range(r)] for j in range(1, r + 1)}
    for k in range(2, r + 1):
        for j in range(k, r + 1):
            denom = Fraction(j * j, (j - k + 1) ** 2) - 1
            T[(j, k)] = _neville_combine(T[(j, k - 1)], T[(j - 1, k - 1)], denom)
            V[(j, k)] = [
                a + (a - b) / denom
                for a, b in zip(V[(j, k - 1)], V[(j - 1, k - 1)])
            ]

    expected = (p * p + 4) // 4
    if len(space.rows) != expected:
        raise BuildError(f"stage count {len(space.rows)} != {expected}")
    return _method(
        space,
        T[(r, r)],
        T[(r - 1, r - 1)],
        f"ex-midpoint-{p}",
        p,
        p - 2,
        MIDPOINT_EXTRAPOLATION,
        {"p": p, "chains": tuple(chains), "extrapolation_weights": tuple(V[(r, r)])},
    )


EQUISPACED = "equispaced"
CHEBYSHEV_LOBATTO = "chebyshev-lobatto"

# Chebyshev-Lobatto node sets that happen to be rational
_RATIONAL_LOBATTO = {
    2: (Fraction(0), Fraction(1)),
    3: (Fraction(0), Fraction(1, 2), Fraction(1)),
    4: (Fraction(0), Fraction(1, 4), Fraction(3, 4), Fraction(1)),
}


def correction_nodes(p: int, family: str) -> tuple[Coefficient, ...]:
    """Node abscissae on [0, 1] with c_1 = 0 and c_p = 1."""
    if family == EQUISPACED:
        return tuple(Fraction(j, p - 1) for j in range(p))
    if family in (CHEBYSHEV_LOBATTO, "chebyshev"):
        if p in _RATIONAL_LOBATTO:
            return _RATIONAL_LOBATTO[p]
        with workprec():
            import mpmath

            return tuple(
                (1 - mpmath.cos(mpmath.pi * j / (p - 1))) / 2 for j in range(p)
            )
    raise BuildError(f"unknown node family {family!r}")


def _lagrange_integration_matrix(nodes):
    """M[m][j] = integral over [c_j, c_{j+1}] of the m-th Lagrange basis
    polynomial on the given nodes (exact quadrature)."""
    exact = all(is_exact(c) for c in nodes)
    if exact:
        return _lagrange_integration_matrix_impl(nodes)
    with workprec():
        return _lagrange_integration_matrix_impl(nodes)


def _lagrange_integration_matrix_impl(nodes):
    p = len(nodes)
    exact = all(is_exact(c) for c in nodes)
    zero = Fraction(0) if exact else to_mpf(0)
    one = Fraction(1) if exact else to_mpf(1)
    ns = list(nodes) if exact else [to_mpf(c) for c in nodes]
    M = [[zero] * (p - 1) for _ in range(p)]
    for m in range(p):
        coeffs = [one]
        denom = one
        for i in range(p):
            if i == m:
                continue
            ci = ns[i]
            new = [zero] * (len(coeffs) + 1)
            for d, a in enumerate(coeffs):
                new[d + 1] = new[d + 1] + a
                new[d] = new[d] - a * ci
            coeffs = new
            denom = denom * (ns[m] - ci)

        def antideriv(x):
            acc = zero
            xp = x
            for d, a in enumerate(coeffs):
                acc = acc + a * xp / (d + 1)
                xp = xp * x
            return acc

        for j in range(p - 1):
            M[m][j] = (antideriv(ns[j + 1]) - antideriv(ns[j])) / denom
    return tuple(tuple(row) for row in M)


@dataclass(frozen=True)
class DCConfig:
    """Deferred-correction configuration: order, sweep coupling theta,
    node family, node abscissae, and the node-polynomial integration
    matrix (columns sum to the node spacings)."""

    p: int
    theta: Fraction
    nodes: str
    c_nodes: tuple[Coefficient, ...]
    M: tuple[tuple[Coefficient, ...], ...]

    @classmethod
    def create(cls, p: int, theta=Fraction(1), nodes: str = CHEBYSHEV_LOBATTO):
        if not 3 <= p <= 12:
            raise BuildError(f"deferred correction needs 3 <= p <= 12, got {p}")
        theta = Fraction(theta) if not isinstance(theta, Fraction) else theta
        if not 0 <= theta <= 1:
            raise BuildError(f"theta must lie in [0, 1], got {theta}")
        if nodes == "chebyshev":
            nodes = CHEBYSHEV_LOBATTO
        cs = correction_nodes(p, nodes)
        M = _lagrange_integration_matrix(cs)
        cfg = cls(p=p, theta=theta, nodes=nodes, c_nodes=cs, M=M)
        cfg._validate()
        return cfg

    def _validate(self):
        cs, M, p = self.c_nodes, self.M, self.p
        exact = all(is_exact(c) for c in cs)
        with workprec():
            for a, b in zip(cs, cs[1:]):
                if not b - a > 0:
                    raise BuildError("nodes must be strictly increasing")
            for j in range(p - 1):
                col = sum(M[m][j] for m in range(p))
                gap = cs[j + 1] - cs[j]
                if exact:
                    if col != gap:
                        raise BuildError(
                            f"column {j + 1} of M sums to {col}, not {gap}"
                        )
                elif abs(float(col - gap)) > 1e-40:
                    raise BuildError(f"column {j + 1} of M is inconsistent")


def deferred_correction_pair(
    cfg: DCConfig, *, prune: bool = True
) -> EmbeddedMethod:
    """Spectral deferred correction on explicit Euler as an embedded pair.

    A prediction sweep of Euler substeps over the nodes is corrected p-1
    times; sweep k updates with theta-weighted new/old derivative
    differences plus the integral of the interpolant of the previous
    sweep's derivatives.  The order p-1 result of the next-to-last sweep is
    the embedded solution.  With theta = 0 the final sweep needs no new
    derivative evaluations, so s drops from p(p-1) to (p-1)^2 + 1 unless
    ``prune`` is disabled.
    """
    exact = all(is_exact(c) for c in cfg.c_nodes)
    if exact:
        return _deferred_correction_impl(cfg, prune)
    with workprec():
        return _deferred_correction_impl(cfg, prune)


def _deferred_correction_impl(cfg: DCConfig, prune: bool) -> EmbeddedMethod:
    p, theta = cfg.p, cfg.theta
    exact = all(is_exact(c) for c in cfg.c_nodes)
    theta_c: Coefficient = theta if exact else to_mpf(theta)
    cs = cfg.c_nodes
    M = cfg.M

    space = _StageSpace()
    root = space.add_stage({}, "f(y_n)")

    w: dict[int, Coefficient] = {}
    prev_f: list[int | None] = [root]
    prediction = []
    for j in range(1, p):
        w = _stepped(w, cs[j] - cs[j - 1], prev_f[-1])
        fj = space.add_stage(w, f"sweep 1 node {j}")
        prev_f.append(fj)
        prediction.append(fj)

    sweeps: list[tuple[int, ...]] = []
    b_state = bhat_state = None
    for k in range(2, p + 1):
        last = k == p
        w = {}
        fs: list[int | None] = [root]
        row = []
        for j in range(1, p):
            nw = dict(w)
            if theta != 0:
                _inc(nw, theta_c, fs[j - 1])
                _inc(nw, -theta_c, prev_f[j - 1])
            for m in range(p):
                _inc(nw, M[m][j - 1], prev_f[m])
            w = nw
            keep_f = (not last) or ((theta != 0 or not prune) and j <= p - 2)
            if keep_f:
                fj = space.add_stage(nw, f"sweep {k} node {j}")
                fs.append(fj)
                row.append(fj)
            else:
                fs.append(None)
        if k == p - 1:
            bhat_state = w
        if last:
            b_state = w
        prev_f = fs
        sweeps.append(tuple(row))

    expected = p * (p - 1) if (theta != 0 or not prune) else (p - 1) ** 2 + 1
    if len(space.rows) != expected:
        raise BuildError(f"stage count {len(space.rows)} != {expected}")
    theta_tag = str(theta).replace("/", "over")
    label = f"dc-{p}-theta{theta_tag}-{cfg.nodes}"
    return _method(
        space,
        b_state,
        bhat_state,
        label,
        p,
        p - 1,
        DEFERRED_CORRECTION,
        {
            "p": p,
            "theta": theta,
            "nodes": cfg.nodes,
            "config": cfg,
            "prediction": (root,) + tuple(prediction),
            "sweeps": tuple(sweeps),
            "pruned": prune and theta == 0,
        },
    )


_BUNDLED = {
    "bs5(4)": "bs54.rktab",
    "pd8(7)": "pd87.rktab",
}


def _verified_reference(t: Tableau, source: str) -> EmbeddedMethod:
    """Re-verify declared orders at load.

    Verification runs in tolerance mode (published rational tableaus are
    often roundings of the true coefficients and miss exactness by ~1e-18);
    whether the conditions also hold exactly is recorded in params.
    """
    from .order_conditions import DEFAULT_TOL

    for which, declared in (("b", t.p), ("b_hat", t.p_hat)):
        cap = min(declared + 1, MAX_ORDER)
        got = verify_order(t, which, tol=DEFAULT_TOL, q_cap=cap)
        if got != declared:
            tree = _first_failing_tree(t, which, min(got, declared) + 1, DEFAULT_TOL)
            raise LoadError(
                f"{source}: {which} verifies to order {got}, declared {declared}"
                + (f"; first failing tree at order {tree.order}: {tree}" if tree else "")
            )
    exact_conditions = t.exact and all(
        verify_order(t, which, q_cap=min(declared + 1, MAX_ORDER)) == declared
        for which, declared in (("b", t.p), ("b_hat", t.p_hat))
    )
    return EmbeddedMethod(
        tableau=t,
        graph=build_stage_graph(t),
        family=REFERENCE,
        params=MappingProxyType(
            {"p": t.p, "source": source, "exact_order_conditions": exact_conditions}
        ),
    )


def _first_failing_tree(t: Tableau, which: str, q: int, tol):
    if q > MAX_ORDER:
        return None
    exact = t.exact
    for tree, res in order_residuals(t, q, which):
        if not residual_is_zero(tree, res, exact, tol):
            return tree
    return None


def load_reference_pair(name_or_path, tableau_dir=None) -> EmbeddedMethod:
    """Load a bundled pair by name ("bs5(4)", "pd8(7)") or any tableau file.

    The declared orders of both weight vectors are re-verified against the
    order conditions at load (exactly for rational files, to the default
    tolerance otherwise); a mismatch is a load error naming a failing tree.
    """
    name = str(name_or_path)
    if name in _BUNDLED:
        text = (
            resources.files("rkpar._tableaus").joinpath(_BUNDLED[name]).read_text()
        )
        return _verified_reference(parse_tableau(text), name)
    path = Path(name_or_path)
    if not path.exists() and tableau_dir is not None:
        for candidate in (Path(tableau_dir) / name, Path(tableau_dir) / f"{name}.rktab"):
            if candidate.exists():
                path = candidate
                break
    if not path.exists():
        raise LoadError(f"unknown reference pair or missing file: {name}")
    try:
        t = parse_tableau(path.read_text())
    except TableauError as exc:
        raise LoadError(f"{path}: {exc}") from exc
    return _verified_reference(t, str(path))
