import csv
from pathlib import Path

import pytest

from rkpar.cli import BENCH_COLUMNS, SweepPlan, main, run_sweep, write_bench_csv
from rkpar.integrator import IntegrationError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_ex_midpoint8(capsys):
    code, out, _ = run(capsys, "build", "ex-midpoint", "8")
    assert code == 0
    assert out.startswith("RKPAIR ex-midpoint-8 s=17 p=8 phat=6")


def test_build_dc4_theta0(capsys):
    code, out, _ = run(capsys, "build", "dc", "4", "--theta", "0")
    assert code == 0
    assert "s=10" in out.splitlines()[0]


def test_build_rejects_odd_midpoint(capsys):
    code, _, err = run(capsys, "build", "ex-midpoint", "7")
    assert code == 1
    assert "even" in err


def test_build_to_file(capsys, tmp_path):
    out_file = tmp_path / "m.rktab"
    code, _, _ = run(capsys, "build", "ex-euler", "4", "--out", str(out_file))
    assert code == 0 and out_file.exists()
    assert out_file.read_text().startswith("RKPAIR ex-euler-4 s=7")


def test_analyze_ex_euler4(capsys):
    code, out, _ = run(capsys, "analyze", "ex-euler", "4")
    assert code == 0
    header, row = out.strip().splitlines()
    names = header.split(",")
    values = dict(zip(names, row.split(",")))
    assert abs(float(values["I_imag"]) - 2.83) <= 0.005
    assert values["s"] == "7" and values["s_seq"] == "4" and values["P"] == "2"


def test_analyze_dc4_theta1_serial(capsys):
    code, out, _ = run(capsys, "analyze", "dc", "4", "--theta", "1")
    assert code == 0
    values = dict(zip(*[ln.split(",") for ln in out.strip().splitlines()]))
    assert float(values["S"]) == 1.0 and values["P"] == "1"


def test_analyze_ex_midpoint10(capsys):
    code, out, _ = run(capsys, "analyze", "ex-midpoint", "10")
    assert code == 0
    values = dict(zip(*[ln.split(",") for ln in out.strip().splitlines()]))
    assert values["P"] == "3"
    assert abs(float(values["S"]) - 2.60) <= 0.005


def test_analyze_selector_list(capsys):
    code, out, _ = run(capsys, "analyze", "ex-euler:4", "bs5(4)")
    assert code == 0
    assert len(out.strip().splitlines()) == 3


def test_analyze_header_golden(capsys):
    code, out, _ = run(capsys, "analyze", "ex-euler", "4")
    assert out.splitlines()[0] == (
        "label,s,s_seq,S,P,E,I_real,I_imag,C_p1,eta,eta_parallel,defect"
    )


def test_usage_errors(capsys):
    code, _, err = run(capsys, "analyze")
    assert code == 1
    code, _, err = run(capsys, "bench", "--problem", "b1", "--methods", "")
    assert code == 1


def test_tableau_dir_flow(capsys, tmp_path):
    out_file = tmp_path / "mid6.rktab"
    code, _, _ = run(capsys, "build", "ex-midpoint", "6", "--out", str(out_file))
    assert code == 0
    code, out, _ = run(
        capsys, "--tableau-dir", str(tmp_path), "analyze", "mid6"
    )
    assert code == 0
    assert out.splitlines()[1].startswith("ex-midpoint-6,10,6,")


def test_integrate_with_csv(capsys, tmp_path):
    csv_path = tmp_path / "run.csv"
    code, out, _ = run(
        capsys,
        "--csv",
        str(csv_path),
        "--cache-dir",
        str(tmp_path / "cache"),
        "integrate",
        "--method",
        "bs5(4)",
        "--problem",
        "forced-decay",
        "--tol",
        "1e-8",
    )
    assert code == 0
    assert "error=" in out
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("method,problem,tol,")
    assert lines[1].startswith("bs5(4),forced-decay,")


def test_integrate_numerical_failure_maps_to_exit_2(capsys, monkeypatch):
    import rkpar.cli as cli_mod

    def boom(*args, **kwargs):
        raise IntegrationError("step size driven to the roundoff floor")

    monkeypatch.setattr(cli_mod, "integrate", boom)
    code, _, err = run(
        capsys,
        "integrate",
        "--method",
        "bs5(4)",
        "--problem",
        "forced-decay",
    )
    assert code == 2
    assert "numerical failure" in err


def _read_bench(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_bench_csv_schema_and_determinism(tmp_path):
    plan = SweepPlan(
        methods=["bs5(4)", "ex-euler:4"],
        problem="b1",
        tols=(1e-3, 1e-5, 1e-7),
        reps=1,
        seed=7,
    )
    rows1 = run_sweep(plan, cache_dir=tmp_path / "cache")
    rows2 = run_sweep(plan, cache_dir=tmp_path / "cache")
    out = tmp_path / "bench.csv"
    write_bench_csv(out, plan, rows1)
    text = out.read_text().splitlines()
    assert text[0].startswith("# rkpar bench")
    assert text[1].startswith("# config=")
    assert text[2] == ",".join(BENCH_COLUMNS)
    # determinism: error and cost columns identical across reruns
    for a, b in zip(rows1, rows2):
        assert a["error"] == b["error"]
        assert a["f_evals"] == b["f_evals"]
    parsed = _read_bench(out)
    assert len(parsed) == 6
    assert all(r["status"] == "ok" for r in parsed)


def test_bench_monotone_trend(tmp_path):
    plan = SweepPlan(
        methods=["bs5(4)"], problem="b1", tols=(1e-4, 1e-6, 1e-8), reps=1
    )
    rows = run_sweep(plan, cache_dir=tmp_path / "cache")
    errors = [r["error"] for r in rows]
    evals = [r["f_evals"] for r in rows]
    assert errors[-1] < errors[0]
    assert evals[-1] > evals[0]


def test_bench_cli_end_to_end(capsys, tmp_path):
    csv_path = tmp_path / "b.csv"
    code, out, _ = run(
        capsys,
        "--csv",
        str(csv_path),
        "--cache-dir",
        str(tmp_path / "cache"),
        "bench",
        "--problem",
        "forced-decay",
        "--methods",
        "ex-euler:4",
        "--tols",
        "1e-4,1e-6",
        "--reps",
        "1",
    )
    assert code == 0 and csv_path.exists()
    assert "wrote 2 rows" in out


def test_bench_tolerance_ladder_must_decrease():
    with pytest.raises(Exception):
        SweepPlan(methods=["bs5(4)"], problem="b1", tols=(1e-6, 1e-3))
