import math
from fractions import Fraction as F

import pytest

from rkpar.analysis import parallel_metrics
from rkpar.graphs import GraphError, StageGraph, build_stage_graph, seq_stages
from rkpar.tableau import make_tableau


def test_forward_euler_graph():
    t = make_tableau("euler", [[]], [F(1)], [F(1)], p=1, p_hat=1)
    g = build_stage_graph(t)
    assert g.n_stages == 1
    assert g.preds == ((), (0,))
    assert seq_stages(g) == 1


def test_ex_euler4_graph(methods):
    m = methods("ex-euler", 4)
    assert m.graph.n_stages + 1 == 8
    assert seq_stages(m.graph) == 4
    # chains hang off the shared first evaluation
    for chain in m.params["chains"]:
        if chain:
            assert m.graph.preds[chain[0]] == (0,)


def test_dc_graph_examples(methods):
    g0 = methods("dc", 4, theta=F(0)).graph
    assert seq_stages(g0) == 6
    g1 = methods("dc", 4, theta=F(1)).graph
    out_degree = sum(1 for preds in g1.preds if 0 in preds)
    assert out_degree >= 9
    assert seq_stages(g1) == 12


def test_parallel_metrics_ex_euler4(methods):
    par = parallel_metrics(methods("ex-euler", 4))
    assert (par.s, par.s_seq, par.S, par.P, par.E) == (7, 4, F(7, 4), 2, F(7, 8))


def test_parallel_metrics_dc_serial(methods):
    par = parallel_metrics(methods("dc", 4, theta=F(1)))
    assert par.S == 1 and par.P == 1


def test_parallel_metrics_reference_pair(methods):
    # the 8(7) pair's two final stages are mutually independent, so it
    # admits a sliver of stage parallelism; bs5(4) does not
    par = parallel_metrics(methods("pd8(7)"))
    assert par.s_seq == 12 and par.P == 2 and par.S == F(13, 12)
    par = parallel_metrics(methods("bs5(4)"))
    assert par.s_seq == 8 and par.P == 1 and par.S == 1


@pytest.mark.parametrize("p", range(2, 13))
def test_table_formulas_ex_euler(methods, p):
    par = parallel_metrics(methods("ex-euler", p))
    assert par.s == (p * p - p + 2) // 2
    assert par.s_seq == p
    assert par.P == math.ceil(p / 2)
    assert par.E == F(par.s, par.P * par.s_seq)


@pytest.mark.parametrize("p", [4, 6, 8, 10, 12])
def test_table_formulas_ex_midpoint(methods, p):
    par = parallel_metrics(methods("ex-midpoint", p))
    assert par.s == (p * p + 4) // 4
    assert par.s_seq == p
    assert par.P == math.ceil((p + 2) / 4)


@pytest.mark.parametrize("p", [3, 4, 5, 6, 8, 10, 12])
def test_table_formulas_dc(methods, p):
    par = parallel_metrics(methods("dc", p, theta=F(0), nodes="equispaced"))
    assert par.s == (p - 1) ** 2 + 1
    assert par.s_seq == 2 * (p - 1)
    assert par.P == p - 1


def test_cycle_detection():
    g = StageGraph(n_stages=2, preds=((1,), (0,), (1,)), labels=("a", "b"))
    with pytest.raises(GraphError):
        seq_stages(g)
