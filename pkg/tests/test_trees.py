import itertools

import pytest

from rkpar.trees import count_conditions, enumerate_trees, trees_of_order

KNOWN_COUNTS = [1, 1, 2, 4, 9, 20, 48, 115, 286, 719]


def test_counts_per_order():
    assert [len(trees_of_order(q)) for q in range(1, 11)] == KNOWN_COUNTS


def test_cumulative_condition_counts():
    assert count_conditions(4) == 8
    assert count_conditions(10) == 1205


def test_single_node_tree():
    (leaf,) = trees_of_order(1)
    assert leaf.order == 1 and leaf.gamma == 1 and leaf.sigma == 1


@pytest.mark.parametrize("bad", [0, -3, 13])
def test_bounds(bad):
    with pytest.raises(ValueError):
        enumerate_trees(bad)


def test_enumeration_is_deterministic():
    a = enumerate_trees(7)
    b = enumerate_trees(7)
    assert [[t.level_seq for t in grp] for grp in a] == [
        [t.level_seq for t in grp] for grp in b
    ]


def test_canonical_encodings_unique():
    seen = set()
    for grp in enumerate_trees(8):
        for t in grp:
            assert t.level_seq not in seen
            seen.add(t.level_seq)
            assert t.gamma > 0 and t.sigma > 0


def _parents(level_seq):
    parents = [None] * len(level_seq)
    stack = []
    for i, depth in enumerate(level_seq):
        while len(stack) > depth:
            stack.pop()
        parents[i] = stack[-1] if stack else None
        stack.append(i)
    return parents


def _brute_gamma(tree):
    # product over nodes of their subtree sizes, from the flat layout
    parents = _parents(tree.level_seq)
    n = len(parents)
    size = [1] * n
    for i in range(n - 1, 0, -1):
        size[parents[i]] += size[i]
    out = 1
    for s in size:
        out *= s
    return out


def _brute_sigma(tree):
    # automorphisms: root-fixing node permutations preserving the parent map
    parents = _parents(tree.level_seq)
    n = len(parents)
    count = 0
    for perm in itertools.permutations(range(n)):
        if perm[0] != 0:
            continue
        ok = all(perm[parents[i]] == parents[perm[i]] for i in range(1, n))
        if ok:
            count += 1
    return count


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_gamma_sigma_against_brute_force(q):
    for t in trees_of_order(q):
        assert t.gamma == _brute_gamma(t)
        assert t.sigma == _brute_sigma(t)
