"""Command-line front end: build | analyze | integrate | bench.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
CSV output is comma separated with a header row and 17-significant-digit
floats; bench files carry provenance comment lines before the header.
"""

from __future__ import annotations

import hashlib
import statistics
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import click

from .analysis import CSV_COLUMNS, analyze_method
from .builders import (
    BuildError,
    DCConfig,
    EmbeddedMethod,
    LoadError,
    deferred_correction_pair,
    euler_extrapolation_pair,
    load_reference_pair,
    midpoint_extrapolation_pair,
)
from .integrator import ControllerConfig, IntegrationError, integrate
from .problems import problem_by_name, reference_solution
from .tableau import TableauError, serialize_tableau

DEFAULT_TOLS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11)

BENCH_COLUMNS = (
    "method",
    "problem",
    "tol",
    "error",
    "f_evals",
    "f_evals_seq",
    "steps_accepted",
    "steps_rejected",
    "wall_time",
    "workers",
    "status",
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _parse_theta(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(f"cannot parse theta {text!r}: {exc}") from exc


def build_method(
    family: str,
    order: int | None = None,
    theta: Fraction = Fraction(1),
    nodes: str = "chebyshev-lobatto",
    tableau_dir: str | None = None,
) -> EmbeddedMethod:
    if family == "ex-euler":
        if order is None:
            raise BuildError("ex-euler needs an order")
        return euler_extrapolation_pair(order)
    if family == "ex-midpoint":
        if order is None:
            raise BuildError("ex-midpoint needs an order")
        return midpoint_extrapolation_pair(order)
    if family == "dc":
        if order is None:
            raise BuildError("dc needs an order")
        return deferred_correction_pair(DCConfig.create(order, theta=theta, nodes=nodes))
    return load_reference_pair(family, tableau_dir=tableau_dir)


def parse_selector(sel: str, tableau_dir: str | None = None) -> EmbeddedMethod:
    """Selector grammar: ex-euler:P | ex-midpoint:P | dc:P[:theta=T][:nodes=N]
    | bundled pair name | tableau file path."""
    parts = sel.split(":")
    family = parts[0]
    if family in ("ex-euler", "ex-midpoint", "dc"):
        if len(parts) < 2:
            raise BuildError(f"selector {sel!r} needs an order, e.g. {family}:8")
        order = int(parts[1])
        theta = Fraction(1)
        nodes = "chebyshev-lobatto"
        for extra in parts[2:]:
            key, _, value = extra.partition("=")
            if key == "theta":
                theta = _parse_theta(value)
            elif key == "nodes":
                nodes = value
            else:
                raise BuildError(f"unknown selector option {extra!r} in {sel!r}")
        return build_method(family, order, theta, nodes)
    return load_reference_pair(sel, tableau_dir=tableau_dir)


@dataclass
class SweepPlan:
    """A bench sweep: methods x tolerance ladder on one problem."""

    methods: list[str]
    problem: str
    tols: tuple[float, ...] = DEFAULT_TOLS
    executor: str = "serial"
    workers: int = 1
    reps: int = 3
    h0: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not self.methods:
            raise click.UsageError("bench needs at least one method")
        if self.reps < 1:
            raise click.UsageError("repetitions must be >= 1")
        if any(a <= b for a, b in zip(self.tols, self.tols[1:])):
            raise click.UsageError("tolerance ladder must be strictly decreasing")

    def config_hash(self) -> str:
        blob = repr(
            (
                sorted(self.methods),
                self.problem,
                self.tols,
                self.executor,
                self.workers,
                self.reps,
                self.h0,
                self.seed,
            )
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@click.group()
@click.option("--tableau-dir", type=click.Path(), default=None, help="directory with extra tableau files")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="CSV output path")
@click.option("--seed", type=int, default=0, show_default=True, help="seed for generated problems")
@click.option("--workers", type=int, default=1, show_default=True, help="stage-parallel worker count")
@click.option("--cache-dir", type=click.Path(), default=".rkpar-cache", show_default=True, help="reference-solution cache")
@click.pass_context
def cli(ctx, tableau_dir, csv_path, seed, workers, cache_dir):
    """Build, analyze, integrate, and benchmark embedded RK pairs."""
    ctx.obj = {
        "tableau_dir": tableau_dir,
        "csv": csv_path,
        "seed": seed,
        "workers": workers,
        "cache_dir": cache_dir,
    }


@cli.command("build")
@click.argument("family")
@click.argument("order", type=int)
@click.option("--theta", default="1", show_default=True, help="DC sweep coupling in [0,1]")
@click.option("--nodes", default="chebyshev-lobatto", show_default=True, type=click.Choice(["chebyshev-lobatto", "chebyshev", "equispaced"]))
@click.option("--out", type=click.Path(), default=None, help="write the tableau here instead of stdout")
@click.pass_context
def cmd_build(ctx, family, order, theta, nodes, out):
    """Emit the tableau of a built method in the text format."""
    method = build_method(family, order, _parse_theta(theta), nodes, ctx.obj["tableau_dir"])
    text = serialize_tableau(method.tableau)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {method.label} ({method.s} stages) to {out}")
    else:
        click.echo(text, nl=False)


@cli.command("analyze")
@click.argument("selector", nargs=-1, required=True)
@click.option("--theta", default=None, help="DC sweep coupling (family/order form)")
@click.option("--nodes", default="chebyshev-lobatto", type=click.Choice(["chebyshev-lobatto", "chebyshev", "equispaced"]))
@click.pass_context
def cmd_analyze(ctx, selector, theta, nodes):
    """Report s, s_seq, S, P, E, stability intervals, accuracy indices.

    Accepts `analyze FAMILY ORDER [--theta T]` or one or more selectors
    like ex-euler:8, dc:4:theta=0, bs5(4), or tableau file paths.
    """
    selectors = list(selector)
    if (
        len(selectors) == 2
        and selectors[0] in ("ex-euler", "ex-midpoint", "dc")
        and selectors[1].isdigit()
    ):
        sel = f"{selectors[0]}:{selectors[1]}"
        if theta is not None:
            sel += f":theta={theta}"
        if selectors[0] == "dc":
            sel += f":nodes={nodes}"
        selectors = [sel]
    rows = [
        analyze_method(parse_selector(s, ctx.obj["tableau_dir"])).csv_row()
        for s in selectors
    ]
    out = ",".join(CSV_COLUMNS) + "\n" + "\n".join(rows) + "\n"
    if ctx.obj["csv"]:
        Path(ctx.obj["csv"]).write_text(out)
        click.echo(f"wrote {len(rows)} row(s) to {ctx.obj['csv']}")
    else:
        click.echo(out, nl=False)


@cli.command("integrate")
@click.option("--method", required=True, help="family name or selector")
@click.option("--order", type=int, default=None)
@click.option("--theta", default="1", show_default=True)
@click.option("--nodes", default="chebyshev-lobatto", type=click.Choice(["chebyshev-lobatto", "chebyshev", "equispaced"]))
@click.option("--problem", required=True, help="sb1 | b1 | nbody:N[:seed] | forced-decay")
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--h0", type=float, default=0.01, show_default=True)
@click.option("--executor", default="serial", type=click.Choice(["serial", "parallel"]), show_default=True)
@click.option("--fixed-step", type=float, default=None, help="disable the controller and use this step")
@click.option("--controller", default="I", type=click.Choice(["I", "PI"]), show_default=True)
@click.pass_context
def cmd_integrate(ctx, method, order, theta, nodes, problem, tol, h0, executor, fixed_step, controller):
    """Integrate one problem with one method and report run statistics."""
    m = (
        build_method(method, order, _parse_theta(theta), nodes, ctx.obj["tableau_dir"])
        if order is not None or method in ("ex-euler", "ex-midpoint", "dc")
        else parse_selector(method, ctx.obj["tableau_dir"])
    )
    spec = _problem_with_seed(problem, ctx.obj["seed"])
    cfg = ControllerConfig(epsilon=tol, h0=h0, mode=controller)
    workers = ctx.obj["workers"]
    _, record = integrate(
        m,
        spec.ivp,
        cfg,
        executor=executor,
        workers=workers,
        fixed_step=fixed_step,
        record_trajectory=False,
    )
    ref = reference_solution(spec, cache_dir=ctx.obj["cache_dir"])
    error = float(max(abs(record.final_state - ref)))
    click.echo(
        f"{m.label} on {spec.name}: error={error:.3e} steps={record.steps_accepted}"
        f"(+{record.steps_rejected} rejected) f_evals={record.f_evals}"
        f" f_evals_seq={record.f_evals_seq} wall={record.wall_time:.3f}s"
    )
    if ctx.obj["csv"]:
        path = Path(ctx.obj["csv"])
        header = (
            "method,problem,tol,h0,executor,workers,fixed_step,steps_accepted,"
            "steps_rejected,f_evals,f_evals_seq,wall_time,final_error,final_state"
        )
        state = " ".join(_fmt(v) for v in record.final_state)
        line = ",".join(
            [
                m.label,
                spec.name,
                _fmt(tol),
                _fmt(h0),
                executor,
                str(workers),
                _fmt(fixed_step) if fixed_step else "",
                str(record.steps_accepted),
                str(record.steps_rejected),
                str(record.f_evals),
                str(record.f_evals_seq),
                _fmt(record.wall_time),
                _fmt(error),
                f'"{state}"',
            ]
        )
        new = not path.exists()
        with path.open("a") as fh:
            if new:
                fh.write(header + "\n")
            fh.write(line + "\n")


def _problem_with_seed(problem: str, seed: int):
    if problem.startswith("nbody:") and problem.count(":") == 1:
        problem = f"{problem}:{seed}"
    return problem_by_name(problem)


def run_sweep(plan: SweepPlan, tableau_dir=None, cache_dir=None):
    """Run every (method, tol) cell of the plan; failures become rows."""
    spec = _problem_with_seed(plan.problem, plan.seed)
    ref = reference_solution(spec, cache_dir=cache_dir)
    rows = []
    for sel in plan.methods:
        method = parse_selector(sel, tableau_dir)
        for tol in plan.tols:
            cfg = ControllerConfig(epsilon=tol, h0=plan.h0)
            status = "ok"
            error = float("nan")
            record = None
            times = []
            try:
                for _ in range(plan.reps):
                    _, record = integrate(
                        method,
                        spec.ivp,
                        cfg,
                        executor=plan.executor,
                        workers=plan.workers,
                        record_trajectory=False,
                    )
                    times.append(record.wall_time)
                error = float(max(abs(record.final_state - ref)))
            except IntegrationError as exc:
                status = f"failed: {exc}"
                record = record if record and record.final_state is not None else None
            rows.append(
                {
                    "method": method.label,
                    "problem": spec.name,
                    "tol": tol,
                    "error": error,
                    "f_evals": record.f_evals if record else 0,
                    "f_evals_seq": record.f_evals_seq if record else 0,
                    "steps_accepted": record.steps_accepted if record else 0,
                    "steps_rejected": record.steps_rejected if record else 0,
                    "wall_time": statistics.median(times) if times else float("nan"),
                    "workers": plan.workers,
                    "status": status,
                }
            )
    return rows


def write_bench_csv(path, plan: SweepPlan, rows) -> None:
    with Path(path).open("w") as fh:
        fh.write(f"# rkpar bench problem={plan.problem} seed={plan.seed}\n")
        fh.write(f"# config={plan.config_hash()}\n")
        fh.write(",".join(BENCH_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in BENCH_COLUMNS) + "\n")


@cli.command("bench")
@click.option("--problem", required=True)
@click.option("--methods", required=True, help="comma-separated method selectors")
@click.option("--tols", default=None, help="comma-separated tolerance ladder (decreasing)")
@click.option("--executor", default="serial", type=click.Choice(["serial", "parallel"]), show_default=True)
@click.option("--reps", type=int, default=3, show_default=True, help="timing repetitions (median)")
@click.option("--h0", type=float, default=0.01, show_default=True)
@click.pass_context
def cmd_bench(ctx, problem, methods, tols, executor, reps, h0):
    """Work-precision sweep over a tolerance ladder, written as CSV."""
    plan = SweepPlan(
        methods=[m for m in methods.split(",") if m],
        problem=problem,
        tols=tuple(float(t) for t in tols.split(",")) if tols else DEFAULT_TOLS,
        executor=executor,
        workers=ctx.obj["workers"],
        reps=reps,
        h0=h0,
        seed=ctx.obj["seed"],
    )
    rows = run_sweep(plan, ctx.obj["tableau_dir"], ctx.obj["cache_dir"])
    out = ctx.obj["csv"] or "bench.csv"
    write_bench_csv(out, plan, rows)
    failures = sum(1 for r in rows if r["status"] != "ok")
    click.echo(f"wrote {len(rows)} rows to {out} ({failures} failures)")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (BuildError, LoadError, TableauError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except IntegrationError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
