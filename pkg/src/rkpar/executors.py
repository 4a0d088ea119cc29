"""Stage execution plans and serial/thread-parallel executors.

A Schedule is a sequence of synchronization blocks; inside a block each
worker runs its own stage list sequentially and blocks are separated by
barriers.  Validity (every stage preceded by its graph predecessors) is
checkable independently of execution.  Both executors compute stage states
with the same code in the same order, so trajectories agree bitwise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .builders import (
    DEFERRED_CORRECTION,
    EULER_EXTRAPOLATION,
    MIDPOINT_EXTRAPOLATION,
    EmbeddedMethod,
)
from .graphs import StageGraph, seq_stages
from .tableau import float_arrays


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """blocks[k][w] is the stage list worker w runs in sync block k."""

    blocks: tuple[tuple[tuple[int, ...], ...], ...]
    workers: int

    @property
    def makespan(self) -> int:
        return sum(max((len(lst) for lst in block), default=0) for block in self.blocks)

    def stage_count(self) -> int:
        return sum(len(lst) for block in self.blocks for lst in block)


def _serial_schedule(s: int) -> Schedule:
    return Schedule(blocks=((tuple(range(s)),),), workers=1)


def _pack_chains_lpt(chains, bins_count):
    """Longest-processing-time packing of whole chains into bins."""
    bins = [[] for _ in range(bins_count)]
    loads = [0] * bins_count
    for chain in sorted(chains, key=len, reverse=True):
        w = loads.index(min(loads))
        bins[w].extend(chain)
        loads[w] += len(chain)
    return [tuple(b) for b in bins if b]


def _pair_chains(chains):
    """Two-pointer pairing: the longest chain alone, then longest with
    shortest.  For harmonic extrapolation chains this meets the optimal
    worker count with makespan equal to the critical path."""
    ordered = sorted((c for c in chains if c), key=len)
    bins = []
    if ordered:
        bins.append(tuple(ordered.pop()))
    while ordered:
        longest = list(ordered.pop())
        if ordered:
            longest = list(ordered.pop(0)) + longest
        bins.append(tuple(longest))
    return bins


def _split_round_robin(stages, workers):
    lists = [[] for _ in range(min(workers, len(stages)))]
    for i, stage in enumerate(stages):
        lists[i % len(lists)].append(stage)
    return tuple(tuple(lst) for lst in lists)


def build_schedule(m: EmbeddedMethod, workers: int) -> Schedule:
    """Static stage schedule for the given worker count.

    Extrapolation families pack whole chains per worker (one fork/join per
    step); deferred correction with theta = 0 staggers the correction
    sweeps; anything else falls back to dependency-level blocks.
    """
    if workers < 1:
        raise ScheduleError(f"worker count must be >= 1, got {workers}")
    s = m.tableau.s
    if workers == 1:
        return Schedule(blocks=((tuple(range(s)),),), workers=1)

    if m.family in (EULER_EXTRAPOLATION, MIDPOINT_EXTRAPOLATION):
        chains = [c for c in m.params["chains"] if c]
        pairing = _pair_chains(chains)
        if len(pairing) <= workers:
            bins = pairing
        else:
            bins = _pack_chains_lpt(chains, workers)
        blocks = (((0,),), tuple(bins))
        return Schedule(blocks=blocks, workers=workers)

    if m.family == DEFERRED_CORRECTION and m.params.get("theta", None) == 0:
        prediction = m.params["prediction"]  # includes the shared root stage
        blocks = [(tuple(prediction),)]
        for sweep in m.params["sweeps"]:
            if sweep:
                blocks.append(_split_round_robin(sweep, workers))
        return Schedule(blocks=tuple(blocks), workers=workers)

    return _level_schedule(m.graph, workers)


def _level_schedule(g: StageGraph, workers: int) -> Schedule:
    s = g.n_stages
    level = [0] * s
    for i in range(s):
        level[i] = 1 + max((level[j] for j in g.preds[i]), default=-1)
    blocks = []
    for lev in range(max(level) + 1 if s else 0):
        stages = [i for i in range(s) if level[i] == lev]
        blocks.append(_split_round_robin(stages, workers))
    return Schedule(blocks=tuple(blocks), workers=workers)


def validate_schedule(schedule: Schedule, graph: StageGraph) -> None:
    """Check the execution-trace safety property: every stage runs after
    all its predecessors, given only barriers between blocks and program
    order within one worker's list."""
    seen: set[int] = set()
    done_blocks: set[int] = set()
    for block in schedule.blocks:
        for lst in block:
            done_in_list: set[int] = set()
            for stage in lst:
                if stage in seen:
                    raise ScheduleError(f"stage {stage + 1} scheduled twice")
                seen.add(stage)
                for pred in graph.preds[stage]:
                    if pred not in done_blocks and pred not in done_in_list:
                        raise ScheduleError(
                            f"stage {stage + 1} runs before predecessor {pred + 1}"
                        )
                done_in_list.add(stage)
        done_blocks.update(i for lst in block for i in lst)
    if len(seen) != graph.n_stages:
        missing = set(range(graph.n_stages)) - seen
        raise ScheduleError(f"stages never scheduled: {sorted(i + 1 for i in missing)}")


class CompiledPair:
    """Float view of a tableau plus its schedule metadata, ready to step."""

    def __init__(self, method_or_tableau):
        if isinstance(method_or_tableau, EmbeddedMethod):
            t = method_or_tableau.tableau
            self.s_seq = seq_stages(method_or_tableau.graph)
        else:
            t = method_or_tableau
            self.s_seq = None
        A, b, b_hat, c = float_arrays(t)
        self.s = t.s
        self.rows = []
        for i in range(self.s):
            idx = [j for j in range(i) if A[i][j] != 0.0]
            self.rows.append(
                (np.array(idx, dtype=np.intp), np.array([A[i][j] for j in idx]))
            )
        self.b = np.array(b)
        self.b_hat = np.array(b_hat)
        self.p = t.p
        self.p_hat = t.p_hat
        self.label = t.label


def _run_stage_list(cp: CompiledPair, f, y, h, K, stages) -> None:
    for i in stages:
        idx, w = cp.rows[i]
        if idx.size:
            yi = y + h * (w @ K[idx])
        else:
            yi = y
        K[i] = f(yi)


class SerialExecutor:
    """Evaluates stages one at a time in tableau order."""

    workers = 1

    def prepare(self, method: EmbeddedMethod, cp: CompiledPair) -> None:
        pass

    def run_stages(self, cp: CompiledPair, f, y, h, K) -> None:
        _run_stage_list(cp, f, y, h, K, range(cp.s))

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ParallelExecutor:
    """Evaluates independent stages on a thread pool under a static
    schedule.  The right-hand side must be safe to call concurrently on
    distinct states.  Stage-combination arithmetic stays on the caller's
    thread in fixed order, so results match the serial executor bitwise."""

    def __init__(self, workers: int):
        if workers < 1:
            raise ScheduleError(f"worker count must be >= 1, got {workers}")
        self.workers = workers
        self._pool: ThreadPoolExecutor | None = None
        self._schedule: Schedule | None = None

    def prepare(self, method: EmbeddedMethod, cp: CompiledPair) -> None:
        self._schedule = build_schedule(method, self.workers)
        validate_schedule(self._schedule, method.graph)
        if self._pool is None and self.workers > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.workers)

    def run_stages(self, cp: CompiledPair, f, y, h, K) -> None:
        if self._schedule is None:
            raise ScheduleError("executor not prepared for a method")
        for block in self._schedule.blocks:
            lists = [lst for lst in block if lst]
            if len(lists) == 1 or self._pool is None:
                for lst in lists:
                    _run_stage_list(cp, f, y, h, K, lst)
            else:
                futures = [
                    self._pool.submit(_run_stage_list, cp, f, y, h, K, lst)
                    for lst in lists
                ]
                for fut in futures:
                    fut.result()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
