"""Benchmark problems and reference-solution generation.

All right-hand sides are autonomous, pure, and safe for concurrent
evaluation on distinct states.  References come from the analytic solution
when one exists and otherwise from an adaptive bs5(4) run at tolerance
1e-13, cached as flat files keyed by a hash of the problem identity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .builders import load_reference_pair
from .integrator import IVP, ControllerConfig, integrate

# restricted three-body mass ratio and the matching periodic orbit
SB1_MU = 0.0121285627653123
SB1_PERIOD = 6.192169331319639
SB1_Y0 = (1.2, 0.0, 0.0, -1.049357509830319)

REFERENCE_TOL = 1e-13


@dataclass
class ProblemSpec:
    name: str
    ivp: IVP
    constants: dict = field(default_factory=dict)
    reference_policy: str = "bs54"  # "analytic" | "bs54"
    key: str = ""  # cache identity; defaults to the name

    def __post_init__(self):
        if not self.key:
            self.key = self.name


def sb1() -> ProblemSpec:
    """Restricted three-body problem on a periodic orbit.

    The state is (x, y, x', y') in the rotating frame; integrating over one
    period returns to the initial point.
    """
    mu = SB1_MU
    mu1 = 1.0 - mu

    def f(y):
        y1, y2, y3, y4 = y
        d1 = ((y1 + mu) ** 2 + y2**2) ** 1.5
        d2 = ((y1 - mu1) ** 2 + y2**2) ** 1.5
        a1 = y1 + 2 * y4 - mu1 * (y1 + mu) / d1 - mu * (y1 - mu1) / d2
        a2 = y2 - 2 * y3 - mu1 * y2 / d1 - mu * y2 / d2
        return np.array([y3, y4, a1, a2])

    ivp = IVP(f=f, y0=np.array(SB1_Y0), t0=0.0, T=SB1_PERIOD, name="sb1")
    return ProblemSpec(
        name="sb1",
        ivp=ivp,
        constants={"mu": mu, "mu_prime": mu1, "period": SB1_PERIOD},
    )


def b1(T: float = 20.0) -> ProblemSpec:
    """Growth of two conflicting populations (DETEST B1), y0 = (1, 3)."""

    def f(y):
        y1, y2 = y
        return np.array([2.0 * (y1 - y1 * y2), -(y2 - y1 * y2)])

    ivp = IVP(f=f, y0=np.array([1.0, 3.0]), t0=0.0, T=T, name="b1")
    return ProblemSpec(name="b1", ivp=ivp, key=f"b1|T={T!r}")


def forced_decay(T: float = 2.0) -> ProblemSpec:
    """Smooth nonlinear system: cubic decay with a sinusoidal drive,
    autonomized as (u, tau) with tau' = 1.  Used for convergence studies."""

    def f(y):
        u, tau = y
        return np.array([-(u**3) + np.sin(tau), 1.0])

    ivp = IVP(f=f, y0=np.array([0.5, 0.0]), t0=0.0, T=T, name="forced-decay")
    return ProblemSpec(name="forced-decay", ivp=ivp, key=f"forced-decay|T={T!r}")


@dataclass(frozen=True)
class NBodyConfig:
    """Gravitational N-body setup: unit total mass split evenly, G = 1,
    positions drawn uniformly in the unit cube from the seed, velocities
    zero, then momentum-centered.  Plummer softening regularizes close
    encounters."""

    n: int
    seed: int = 0
    softening: float = 1e-3
    T: float = 1.0

    def masses(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def initial_state(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        pos = rng.uniform(0.0, 1.0, size=(self.n, 3))
        vel = np.zeros((self.n, 3))
        m = self.masses()
        vel -= (m[:, None] * vel).sum(axis=0) / m.sum()
        return np.concatenate([pos.ravel(), vel.ravel()])


def nbody_rhs(masses: np.ndarray, softening: float):
    n = masses.size
    soft2 = softening * softening

    def f(state):
        pos = state[: 3 * n].reshape(n, 3)
        vel = state[3 * n :]
        diff = pos[None, :, :] - pos[:, None, :]
        r2 = (diff**2).sum(axis=-1) + soft2
        np.fill_diagonal(r2, 1.0)
        inv = r2 ** (-1.5)
        np.fill_diagonal(inv, 0.0)
        acc = np.einsum("ijk,ij,j->ik", diff, inv, masses)
        return np.concatenate([vel, acc.ravel()])

    return f


def nbody_energy(cfg: NBodyConfig, state: np.ndarray) -> float:
    """Total energy with the softened pair potential (conserved along the
    softened dynamics; reduces to sum(m v^2/2) - sum(m_i m_j / r_ij) at
    zero softening)."""
    n = cfg.n
    m = cfg.masses()
    pos = state[: 3 * n].reshape(n, 3)
    vel = state[3 * n :].reshape(n, 3)
    kinetic = 0.5 * float((m * (vel**2).sum(axis=1)).sum())
    potential = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r = np.sqrt(((pos[i] - pos[j]) ** 2).sum() + cfg.softening**2)
            potential -= m[i] * m[j] / r
    return kinetic + potential


def nbody_momentum(cfg: NBodyConfig, state: np.ndarray) -> np.ndarray:
    n = cfg.n
    m = cfg.masses()
    vel = state[3 * n :].reshape(n, 3)
    return (m[:, None] * vel).sum(axis=0)


def nbody(cfg: NBodyConfig) -> ProblemSpec:
    if cfg.n < 2:
        raise ValueError(f"need at least two bodies, got {cfg.n}")
    ivp = IVP(
        f=nbody_rhs(cfg.masses(), cfg.softening),
        y0=cfg.initial_state(),
        t0=0.0,
        T=cfg.T,
        name=f"nbody:{cfg.n}:{cfg.seed}",
    )
    return ProblemSpec(
        name=ivp.name,
        ivp=ivp,
        constants={"softening": cfg.softening, "config": cfg},
        key=f"nbody|n={cfg.n}|seed={cfg.seed}|soft={cfg.softening!r}|T={cfg.T!r}",
    )


def problem_by_name(name: str) -> ProblemSpec:
    """CLI problem addressing: sb1 | b1 | nbody:N:seed | forced-decay."""
    if name == "sb1":
        return sb1()
    if name == "b1":
        return b1()
    if name == "forced-decay":
        return forced_decay()
    if name.startswith("nbody:"):
        parts = name.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"nbody spec must be nbody:N[:seed], got {name!r}")
        n = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
        return nbody(NBodyConfig(n=n, seed=seed))
    raise ValueError(f"unknown problem {name!r}")


_memory_cache: dict[str, np.ndarray] = {}


def reference_solution(
    spec: ProblemSpec,
    cache_dir: Optional[str] = None,
    tol: float = REFERENCE_TOL,
) -> np.ndarray:
    """Deterministic end state used as the error reference.

    Analytic problems evaluate their solution; everything else integrates
    with the bundled bs5(4) pair at the reference tolerance.  Results are
    memoized in-process and, when cache_dir is given, persisted as flat
    JSON files keyed by a hash of the problem identity.
    """
    if spec.ivp.exact is not None:
        return np.asarray(spec.ivp.exact(spec.ivp.T), dtype=float)

    key = hashlib.sha256(f"{spec.key}|tol={tol!r}".encode()).hexdigest()[:24]
    path = Path(cache_dir) / f"ref-{key}.json" if cache_dir is not None else None

    y = _memory_cache.get(key)
    if y is None and path is not None and path.exists():
        payload = json.loads(path.read_text())
        y = np.array([float.fromhex(v) for v in payload["state_hex"]])
        _memory_cache[key] = y
    if y is None:
        method = load_reference_pair("bs5(4)")
        cfg = ControllerConfig(
            epsilon=tol, h0=min(1e-2, (spec.ivp.T - spec.ivp.t0) / 100)
        )
        _, record = integrate(method, spec.ivp, cfg, record_trajectory=False)
        y = record.final_state
        _memory_cache[key] = y
    if path is not None and not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "problem": spec.key,
            "tol": tol,
            "t": spec.ivp.T,
            "state_hex": [float(v).hex() for v in y],
        }
        path.write_text(json.dumps(payload, indent=1))
    return y.copy()
