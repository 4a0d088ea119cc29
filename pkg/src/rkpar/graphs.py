"""Stage dependency graphs and parallel-implementation metrics.

The incidence pattern of A (and b) is read as a DAG over stage nodes plus a
final output node.  From it we get the minimal number of sequential
function evaluations per step, the speedup bound s/s_seq, and the smallest
worker count that still achieves it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coeffs import is_zero
from .tableau import Tableau


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class StageGraph:
    """DAG over stage nodes 0..s-1 plus output node s.

    preds[i] lists the stage indices feeding node i; labels carry builder
    provenance when the graph comes from a method builder.
    """

    n_stages: int
    preds: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]

    @property
    def output_node(self) -> int:
        return self.n_stages

    def succs(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_stages + 1)]
        for i, ps in enumerate(self.preds):
            for j in ps:
                out[j].append(i)
        return out


def build_stage_graph(t: Tableau, labels=None) -> StageGraph:
    """Graph with an edge j->i wherever A[i][j] != 0, and j->output where
    the stage feeds either weighted combination (a step is complete only
    once the error estimate exists too, which matters for pairs whose last
    stage serves only the estimator).  Inexact entries below the arithmetic
    noise floor are treated as structural zeros."""
    s = t.s
    preds = []
    for i in range(s):
        row = []
        for j in range(i):
            if not is_zero(t.A[i][j]):
                row.append(j)
        preds.append(tuple(row))
    preds.append(
        tuple(
            j
            for j in range(s)
            if not (is_zero(t.b[j]) and is_zero(t.b_hat[j]))
        )
    )
    if labels is None:
        labels = tuple(f"stage {i + 1}" for i in range(s))
    else:
        labels = tuple(labels)
        if len(labels) != s:
            raise GraphError(f"{len(labels)} labels for {s} stages")
    return StageGraph(n_stages=s, preds=tuple(preds), labels=labels)


def seq_stages(g: StageGraph) -> int:
    """Longest path to the output node, counted in evaluation nodes."""
    depth = [0] * (g.n_stages + 1)
    for i in range(g.n_stages + 1):
        for j in g.preds[i]:
            if j >= i and i < g.n_stages:
                raise GraphError(f"cycle: stage {i + 1} depends on stage {j + 1}")
        best = max((depth[j] for j in g.preds[i]), default=0)
        depth[i] = best if i == g.n_stages else best + 1
    return depth[g.n_stages]


def _alap_makespan(g: StageGraph, workers: int) -> int:
    """Makespan of latest-deadline-first list scheduling with unit tasks."""
    s = g.n_stages
    succs = g.succs()
    # height = longest eval chain from each stage to the output
    height = [0] * (s + 1)
    for i in range(s - 1, -1, -1):
        height[i] = 1 + max((height[j] for j in succs[i] if j < s), default=0)
    indeg = [len(g.preds[i]) for i in range(s)]
    ready = sorted(i for i in range(s) if indeg[i] == 0)
    done = 0
    time = 0
    while done < s:
        ready.sort(key=lambda i: (-height[i], i))
        batch, ready = ready[:workers], ready[workers:]
        time += 1
        for i in batch:
            done += 1
            for j in succs[i]:
                if j < s:
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        ready.append(j)
    return time


@dataclass(frozen=True)
class ParallelReport:
    """s, s_seq, speedup S = s/s_seq, minimal worker count P reaching it,
    and efficiency E = S/P.  P_lower = ceil(S) is the work-conservation
    bound; P == P_lower is not guaranteed for every method."""

    s: int
    s_seq: int
    S: Fraction
    P: int
    E: Fraction
    P_lower: int


def min_processors(g: StageGraph, s_seq: int | None = None) -> int:
    """Smallest worker count whose list schedule still has makespan s_seq."""
    if s_seq is None:
        s_seq = seq_stages(g)
    lower = max(1, math.ceil(Fraction(g.n_stages, s_seq)))
    for workers in range(lower, g.n_stages + 1):
        if _alap_makespan(g, workers) == s_seq:
            return workers
    raise GraphError("no worker count achieves the critical-path makespan")


def parallel_metrics_graph(g: StageGraph) -> ParallelReport:
    s = g.n_stages
    sseq = seq_stages(g)
    S = Fraction(s, sseq)
    P = min_processors(g, sseq)
    return ParallelReport(
        s=s, s_seq=sseq, S=S, P=P, E=S / P, P_lower=max(1, math.ceil(S))
    )
