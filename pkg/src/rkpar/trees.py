"""Rooted-tree enumeration with density and symmetry factors.

Trees are kept in a canonical form: children are ordered by decreasing
level-sequence encoding, which makes the level sequence of the whole tree
the lexicographically maximal layout of its isomorphism class.  Two trees
are isomorphic iff their level sequences are equal, so equality and hashing
are cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, prod

MAX_ORDER = 12


@dataclass(frozen=True)
class RootedTree:
    """One isomorphism class of rooted trees.

    order   -- number of nodes
    gamma   -- density: order * product of children densities
    sigma   -- symmetry: automorphism count of the rooted tree
    children-- canonically ordered child subtrees
    level_seq -- canonical depth sequence, root depth 0
    """

    children: tuple["RootedTree", ...]
    order: int
    gamma: int
    sigma: int
    level_seq: tuple[int, ...] = field(repr=False)

    def __hash__(self):
        return hash(self.level_seq)

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.level_seq == other.level_seq

    def __str__(self):
        if not self.children:
            return "."
        return "[" + "".join(str(c) for c in self.children) + "]"


_interned: dict[tuple[int, ...], RootedTree] = {}


def tree_from_children(children) -> RootedTree:
    """Build (or fetch) the canonical tree with the given child multiset."""
    children = tuple(sorted(children, key=lambda t: t.level_seq, reverse=True))
    seq = (0,) + tuple(d + 1 for c in children for d in c.level_seq)
    cached = _interned.get(seq)
    if cached is not None:
        return cached
    order = 1 + sum(c.order for c in children)
    gamma = order * prod(c.gamma for c in children)
    sigma = 1
    i = 0
    while i < len(children):
        j = i
        while j < len(children) and children[j] == children[i]:
            j += 1
        mult = j - i
        sigma *= factorial(mult) * children[i].sigma ** mult
        i = j
    t = RootedTree(children, order, gamma, sigma, seq)
    _interned[seq] = t
    return t


LEAF = tree_from_children(())

_by_order: list[tuple[RootedTree, ...]] = [(), (LEAF,)]


def _grow_to(q: int) -> None:
    while len(_by_order) <= q:
        n = len(_by_order)
        # pool of candidate children, descending by (order, encoding) so the
        # non-increasing multiset recursion emits each class exactly once
        pool = [
            t
            for o in range(n - 1, 0, -1)
            for t in sorted(_by_order[o], key=lambda t: t.level_seq, reverse=True)
        ]
        found: list[RootedTree] = []

        def pick(remaining: int, start: int, acc: list[RootedTree]) -> None:
            if remaining == 0:
                found.append(tree_from_children(acc))
                return
            for i in range(start, len(pool)):
                t = pool[i]
                if t.order > remaining:
                    continue
                acc.append(t)
                pick(remaining - t.order, i, acc)
                acc.pop()

        pick(n - 1, 0, [])
        _by_order.append(tuple(sorted(found, key=lambda t: t.level_seq)))


def trees_of_order(q: int) -> tuple[RootedTree, ...]:
    """All rooted-tree isomorphism classes with exactly q nodes."""
    if not 1 <= q <= MAX_ORDER:
        raise ValueError(f"tree order must be in 1..{MAX_ORDER}, got {q}")
    _grow_to(q)
    return _by_order[q]


def enumerate_trees(q_max: int) -> list[tuple[RootedTree, ...]]:
    """Trees grouped by order 1..q_max, each group in canonical order."""
    if not 1 <= q_max <= MAX_ORDER:
        raise ValueError(f"q_max must be in 1..{MAX_ORDER}, got {q_max}")
    return [trees_of_order(q) for q in range(1, q_max + 1)]


def count_conditions(q_max: int) -> int:
    """Cumulative number of order conditions through order q_max."""
    return sum(len(g) for g in enumerate_trees(q_max))
