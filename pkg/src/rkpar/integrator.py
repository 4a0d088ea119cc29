"""Adaptive and fixed-step integration with embedded error control.

The controller is the standard one: a step is accepted iff the embedded
error estimate meets the tolerance, and the next step is
h * clamp(kappa (eps/delta)^alpha, kappa_min, kappa_max) with kappa = 0.9,
alpha = 0.7/p_hat, and clamping factors 0.2 and 5.  A PI variant with a
stored previous error ratio is available; its gains are artifact defaults.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .builders import EmbeddedMethod
from .executors import CompiledPair, ParallelExecutor, SerialExecutor
from .tableau import Tableau

_MACHINE_EPS = float(np.finfo(float).eps)


class IntegrationError(RuntimeError):
    pass


class StepSizeUnderflow(IntegrationError):
    """Raised when error control drives the step size to the roundoff
    floor, the known failure mode of very high order extrapolation at
    tight tolerances."""


@dataclass
class IVP:
    """Autonomous initial value problem y' = f(y), y(t0) = y0 on [t0, T].

    Non-autonomous systems are handled by the caller via state
    augmentation.  ``exact``, when given, maps t to the true solution.
    """

    f: Callable[[np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    T: float
    name: str = ""
    exact: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=float)
        if not self.T > self.t0:
            raise ValueError(f"needs T > t0, got [{self.t0}, {self.T}]")

    @property
    def dim(self) -> int:
        return self.y0.size


@dataclass
class ControllerConfig:
    epsilon: float
    h0: float = 0.01
    kappa: float = 0.9
    alpha: Optional[float] = None  # default 0.7 / p_hat
    kappa_min: float = 0.2
    kappa_max: float = 5.0
    mode: str = "I"  # "I" or "PI"
    beta1: Optional[float] = None  # PI gain on the current error, 0.7 / p_hat
    beta2: Optional[float] = None  # PI gain on the previous error, 0.4 / p_hat

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("tolerance must be positive")
        if not self.h0 > 0:
            raise ValueError("initial step must be positive")
        if not 0 < self.kappa < 1:
            raise ValueError("safety factor must lie in (0, 1)")
        if not 0 < self.kappa_min < 1 < self.kappa_max:
            raise ValueError("clamping must satisfy 0 < kappa_min < 1 < kappa_max")
        if self.mode not in ("I", "PI"):
            raise ValueError(f"unknown controller mode {self.mode!r}")


@dataclass
class StepOutcome:
    y_next: np.ndarray
    y_hat_next: np.ndarray
    delta_norm: float
    accepted: bool
    h_used: float
    h_next: float


@dataclass
class RunRecord:
    steps_accepted: int = 0
    steps_rejected: int = 0
    f_evals: int = 0
    f_evals_seq: int = 0
    wall_time: float = 0.0
    final_state: Optional[np.ndarray] = None
    final_error: Optional[float] = None
    failure: Optional[str] = None

    @property
    def steps_total(self) -> int:
        return self.steps_accepted + self.steps_rejected


def rk_step(t: Tableau, f, y, h: float):
    """One embedded-pair step; returns (y_next, y_hat_next).

    Stages run in tableau order and both weighted combinations accumulate
    in fixed stage order, so the result is reproducible bit for bit.
    """
    cp = CompiledPair(t)
    y = np.asarray(y, dtype=float)
    K = np.empty((cp.s, y.size))
    SerialExecutor().run_stages(cp, _wrap_rhs(f, y), y, h, K)
    if not np.all(np.isfinite(K)):
        raise IntegrationError("non-finite stage value")
    y1 = y + h * (cp.b @ K)
    y_hat = y + h * (cp.b_hat @ K)
    return y1, y_hat


def _wrap_rhs(f, y0):
    """Make scalar-valued or list-valued right-hand sides array-safe."""

    def rhs(y):
        return np.asarray(f(y), dtype=float)

    return rhs


def control_step(
    cfg: ControllerConfig,
    h: float,
    delta_norm: float,
    p_hat: int,
    prev_delta: Optional[float] = None,
):
    """Acceptance decision and next step size; returns (accepted, h_next).

    A vanishing error estimate grows the step by the full clamp factor.
    PI mode folds in the previous accepted step's error when available.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    if delta_norm < 0:
        raise ValueError("error norm must be nonnegative")
    alpha = cfg.alpha if cfg.alpha is not None else 0.7 / p_hat
    accepted = delta_norm <= cfg.epsilon
    if delta_norm == 0.0:
        factor = cfg.kappa_max
    elif cfg.mode == "PI" and prev_delta is not None and prev_delta > 0:
        b1 = cfg.beta1 if cfg.beta1 is not None else 0.7 / p_hat
        b2 = cfg.beta2 if cfg.beta2 is not None else 0.4 / p_hat
        factor = (
            cfg.kappa
            * (cfg.epsilon / delta_norm) ** b1
            * (prev_delta / cfg.epsilon) ** b2
        )
    else:
        factor = cfg.kappa * (cfg.epsilon / delta_norm) ** alpha
    factor = min(cfg.kappa_max, max(cfg.kappa_min, factor))
    return accepted, h * factor


def controlled_step(
    t: Tableau,
    f,
    y,
    h: float,
    cfg: ControllerConfig,
    prev_delta: Optional[float] = None,
) -> StepOutcome:
    """One embedded step plus its acceptance decision, for custom loops."""
    y1, y_hat = rk_step(t, f, y, h)
    delta = float(np.max(np.abs(y1 - y_hat)))
    accepted, h_next = control_step(cfg, h, delta, t.p_hat, prev_delta)
    return StepOutcome(
        y_next=y1,
        y_hat_next=y_hat,
        delta_norm=delta,
        accepted=accepted,
        h_used=h,
        h_next=h_next,
    )


def _resolve_executor(executor, workers: int = 1):
    if executor is None or executor == "serial":
        return SerialExecutor(), True
    if executor == "parallel":
        return ParallelExecutor(workers), True
    return executor, False


def integrate(
    method: EmbeddedMethod,
    ivp: IVP,
    cfg: Optional[ControllerConfig] = None,
    executor=None,
    workers: int = 1,
    fixed_step: Optional[float] = None,
    record_trajectory: bool = True,
    max_steps: int = 10_000_000,
):
    """Integrate ivp with an embedded pair; returns (trajectory, RunRecord).

    Adaptive stepping needs ``cfg``; ``fixed_step`` disables the controller
    and lands the last step on T exactly.  ``executor`` is "serial",
    "parallel" (with ``workers``), or an executor instance.  Identical
    inputs produce bitwise-identical trajectories for every executor.
    """
    if fixed_step is None and cfg is None:
        raise ValueError("adaptive integration needs a controller config")
    exec_obj, owned = _resolve_executor(executor, workers)
    cp = CompiledPair(method)
    exec_obj.prepare(method, cp)
    rhs = _wrap_rhs(ivp.f, ivp.y0)
    record = RunRecord()
    trajectory = []
    started = time.perf_counter()
    try:
        if fixed_step is not None:
            _run_fixed(method, ivp, cp, exec_obj, rhs, fixed_step, record, trajectory)
        else:
            _run_adaptive(
                method, ivp, cp, exec_obj, rhs, cfg, record, trajectory, max_steps
            )
    finally:
        record.wall_time = time.perf_counter() - started
        if owned:
            exec_obj.close()
    record.f_evals_seq = record.steps_total * cp.s_seq
    if ivp.exact is not None:
        record.final_error = float(
            np.max(np.abs(record.final_state - np.asarray(ivp.exact(ivp.T))))
        )
    if not record_trajectory:
        trajectory = trajectory[-1:]
    return trajectory, record


def _attempt(cp, exec_obj, rhs, y, h, K):
    exec_obj.run_stages(cp, rhs, y, h, K)
    if not np.all(np.isfinite(K)):
        return None, None
    y1 = y + h * (cp.b @ K)
    y_hat = y + h * (cp.b_hat @ K)
    return y1, y_hat


def _run_fixed(method, ivp, cp, exec_obj, rhs, h, record, trajectory):
    if not h > 0:
        raise ValueError("fixed step must be positive")
    span = ivp.T - ivp.t0
    n = max(1, math.ceil(span / h - 1e-12))
    t, y = ivp.t0, ivp.y0.copy()
    K = np.empty((cp.s, y.size))
    trajectory.append((t, y.copy()))
    for k in range(1, n + 1):
        hk = (ivp.T - t) if k == n else h
        y1, _ = _attempt(cp, exec_obj, rhs, y, hk, K)
        if y1 is None:
            record.failure = f"non-finite state at t={t:.6g} with h={hk:.3g}"
            record.final_state = y
            raise IntegrationError(record.failure)
        record.steps_accepted += 1
        record.f_evals += cp.s
        t = ivp.T if k == n else t + hk
        y = y1
        trajectory.append((t, y.copy()))
    record.final_state = y


def _run_adaptive(method, ivp, cp, exec_obj, rhs, cfg, record, trajectory, max_steps):
    t, y = ivp.t0, ivp.y0.copy()
    h = cfg.h0
    p_hat = cp.p_hat
    prev_delta = None
    K = np.empty((cp.s, y.size))
    trajectory.append((t, y.copy()))
    while t < ivp.T:
        if record.steps_total >= max_steps:
            record.failure = f"step budget {max_steps} exhausted at t={t:.6g}"
            record.final_state = y
            raise IntegrationError(record.failure)
        if h < 100.0 * _MACHINE_EPS * abs(t):
            record.failure = (
                f"step size driven to the roundoff floor at t={t:.6g} (h={h:.3g})"
            )
            record.final_state = y
            raise StepSizeUnderflow(record.failure)
        clipped = t + h >= ivp.T
        h_try = ivp.T - t if clipped else h
        y1, y_hat = _attempt(cp, exec_obj, rhs, y, h_try, K)
        record.f_evals += cp.s
        if y1 is None:
            record.steps_rejected += 1
            h = cfg.kappa_min * h_try
            continue
        delta = float(np.max(np.abs(y1 - y_hat)))
        accepted, h_next = control_step(cfg, h_try, delta, p_hat, prev_delta)
        if accepted:
            record.steps_accepted += 1
            y = y1
            if clipped:
                # clipped steps stay out of the controller history
                t = ivp.T
            else:
                t = t + h_try
                h = h_next
                prev_delta = delta
            trajectory.append((t, y.copy()))
        else:
            record.steps_rejected += 1
            h = h_next
    record.final_state = y
