"""End-to-end command line behavior: generate, solve, compare, verify, plot."""

import numpy as np
import pytest

from kaczpen.cli import main
from kaczpen.problems import load_problem
from kaczpen.traces import parse_trace_csv


def run_cli(capsys, *argv):
    capsys.readouterr()  # drop anything buffered by fixtures
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# generate


def test_generate_ls_writes_file_and_summary(capsys, tmp_path):
    out = str(tmp_path / "p.txt")
    code, stdout, _ = run_cli(
        capsys, "generate", "--kind", "ls", "--rows", "6", "--cols", "4",
        "--seed", "3", "-o", out,
    )
    assert code == 0
    assert "generated kind=ls m=6 n=4" in stdout
    p = load_problem(out)
    assert (p.m, p.n) == (6, 4)
    assert p.x_planted is not None


def test_generate_byte_identical_reruns(capsys, tmp_path):
    out1 = str(tmp_path / "a.txt")
    out2 = str(tmp_path / "b.txt")
    args = ["generate", "--kind", "lf", "--rows", "5", "--cols", "3",
            "--seed", "7", "--active-fraction", "0.4"]
    assert main(args + ["-o", out1]) == 0
    assert main(args + ["-o", out2]) == 0
    capsys.readouterr()
    assert open(out1, "rb").read() == open(out2, "rb").read()


def test_generate_active_fraction_ls_is_usage_error(capsys, tmp_path):
    code, _, stderr = run_cli(
        capsys, "generate", "--kind", "ls", "--rows", "3", "--cols", "2",
        "--active-fraction", "0.5", "-o", str(tmp_path / "p.txt"),
    )
    assert code == 2
    assert "active-fraction" in stderr


def test_generate_active_fraction_out_of_range(capsys, tmp_path):
    code, _, stderr = run_cli(
        capsys, "generate", "--kind", "lf", "--rows", "3", "--cols", "2",
        "--active-fraction", "1.5", "-o", str(tmp_path / "p.txt"),
    )
    assert code == 2


def test_generate_normalize_flag(capsys, tmp_path):
    out = str(tmp_path / "p.txt")
    code, _, _ = run_cli(
        capsys, "generate", "--kind", "ls", "--rows", "4", "--cols", "3",
        "--normalize", "-o", out,
    )
    assert code == 0
    p = load_problem(out)
    assert p.normalized


def test_unknown_command_exits_2(capsys):
    code = main(["frobnicate"])
    capsys.readouterr()
    assert code == 2


# ---------------------------------------------------------------------------
# solve


@pytest.fixture()
def ls_problem(tmp_path):
    path = str(tmp_path / "ls.txt")
    assert main(["generate", "--kind", "ls", "--rows", "8", "--cols", "5",
                 "--seed", "11", "-o", path]) == 0
    return path


@pytest.fixture()
def lf_problem(tmp_path):
    path = str(tmp_path / "lf.txt")
    assert main(["generate", "--kind", "lf", "--rows", "8", "--cols", "5",
                 "--seed", "12", "--active-fraction", "0.25", "-o", path]) == 0
    return path


def test_solve_writes_trace_with_k_plus_one_rows(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    code, stdout, _ = run_cli(
        capsys, "solve", ls_problem, "--method", "rpk", "--iters", "100",
        "--trace", trace,
    )
    assert code == 0
    records = parse_trace_csv(trace)
    assert len(records) == 101
    assert "method=rpk" in stdout
    assert "iterations_executed=100" in stdout


def test_solve_zero_iters_single_row(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    code, _, _ = run_cli(
        capsys, "solve", ls_problem, "--method", "rak", "--iters", "0",
        "--trace", trace,
    )
    assert code == 0
    records = parse_trace_csv(trace)
    assert len(records) == 1
    assert records[0].row == -1


def test_solve_rk_echoes_rho0(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    code, stdout, _ = run_cli(
        capsys, "solve", ls_problem, "--method", "rk", "--rho0", "5",
        "--iters", "10", "--trace", trace,
    )
    assert code == 0
    records = parse_trace_csv(trace)
    assert all(r.rho == 5.0 for r in records)
    assert "rho0=5" in stdout


def test_solve_traces_byte_identical(capsys, tmp_path, ls_problem):
    t1 = str(tmp_path / "a.csv")
    t2 = str(tmp_path / "b.csv")
    args = ["solve", ls_problem, "--method", "rak", "--iters", "50",
            "--seed", "4"]
    assert main(args + ["--trace", t1]) == 0
    assert main(args + ["--trace", t2]) == 0
    capsys.readouterr()
    assert open(t1, "rb").read() == open(t2, "rb").read()


def test_solve_tol_stops_early(capsys, tmp_path):
    # identity-like very well conditioned system converges fast
    path = str(tmp_path / "p.txt")
    assert main(["generate", "--kind", "ls", "--rows", "4", "--cols", "4",
                 "--seed", "5", "-o", path]) == 0
    trace = str(tmp_path / "t.csv")
    code, stdout, _ = run_cli(
        capsys, "solve", path, "--method", "rk", "--iters", "100000",
        "--tol", "1e-10", "--trace", trace,
    )
    assert code == 0
    records = parse_trace_csv(trace)
    assert records[-1].k < 100000
    assert records[-1].residual <= 1e-10


def test_solve_missing_file_exits_3(capsys):
    code, _, stderr = run_cli(
        capsys, "solve", "/nonexistent/p.txt", "--method", "rk", "--iters", "1"
    )
    assert code == 3
    assert "error" in stderr


def test_solve_malformed_problem_exits_3(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("kaczmarz-problem v1 ls 2 2\n1 0 1\n")
    code, _, stderr = run_cli(
        capsys, "solve", str(bad), "--method", "rk", "--iters", "1"
    )
    assert code == 3


def test_solve_bad_config_exits_2(capsys, tmp_path, ls_problem):
    code, _, _ = run_cli(
        capsys, "solve", ls_problem, "--method", "rpk", "--iters", "5",
        "--rho0", "-1",
    )
    assert code == 2


def test_solve_lf_runs(capsys, tmp_path, lf_problem):
    trace = str(tmp_path / "t.csv")
    code, stdout, _ = run_cli(
        capsys, "solve", lf_problem, "--method", "rak", "--iters", "200",
        "--c", "1.05", "--trace", trace,
    )
    assert code == 0
    assert "kind=lf" in stdout
    records = parse_trace_csv(trace)
    assert len(records) == 201
    # feasibility residual should have fallen substantially
    assert records[-1].residual < records[0].residual


# ---------------------------------------------------------------------------
# compare


def test_compare_row_count(capsys, tmp_path, ls_problem):
    out = str(tmp_path / "c.csv")
    code, _, _ = run_cli(
        capsys, "compare", ls_problem, "--methods", "rk,rpk,rak",
        "--trials", "3", "--checkpoints", "0,5,10", "--seed", "2", "-o", out,
    )
    assert code == 0
    lines = open(out).read().strip().splitlines()
    assert lines[0] == "method,checkpoint,mean_error_sq,envelope"
    assert len(lines) == 1 + 3 * 3


def test_compare_stdout_when_no_output(capsys, tmp_path, ls_problem):
    code, stdout, _ = run_cli(
        capsys, "compare", ls_problem, "--methods", "rpk",
        "--trials", "2", "--checkpoints", "0,4",
    )
    assert code == 0
    lines = stdout.strip().splitlines()
    assert lines[0] == "method,checkpoint,mean_error_sq,envelope"
    assert len(lines) == 3


def test_compare_single_trial_matches_solve(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    assert main(["solve", ls_problem, "--method", "rpk", "--iters", "10",
                 "--seed", "6", "--trace", trace]) == 0
    out = str(tmp_path / "c.csv")
    assert main(["compare", ls_problem, "--methods", "rpk", "--trials", "1",
                 "--checkpoints", "0,5,10", "--seed", "6", "-o", out]) == 0
    capsys.readouterr()
    by_k = {r.k: r.error_sq for r in parse_trace_csv(trace)}
    for line in open(out).read().strip().splitlines()[1:]:
        method, k, mean, env = line.split(",")
        assert float(mean) == pytest.approx(by_k[int(k)], rel=1e-12)


def test_compare_huge_rho_rpk_matches_rk(capsys, tmp_path):
    path = str(tmp_path / "p.txt")
    assert main(["generate", "--kind", "ls", "--rows", "6", "--cols", "4",
                 "--seed", "9", "--normalize", "-o", path]) == 0
    out = str(tmp_path / "c.csv")
    assert main(["compare", path, "--methods", "rk,rpk", "--rho0", "1e12",
                 "--trials", "2", "--checkpoints", "0,10,20", "--seed", "3",
                 "-o", out]) == 0
    capsys.readouterr()
    means = {}
    for line in open(out).read().strip().splitlines()[1:]:
        method, k, mean, _ = line.split(",")
        means[(method, int(k))] = float(mean)
    for k in (0, 10, 20):
        rk, rpk = means[("rk", k)], means[("rpk", k)]
        assert rpk == pytest.approx(rk, rel=1e-6, abs=1e-12)


def test_compare_envelope_holds_without_normalization(capsys, tmp_path):
    """The envelope column has to bound the means on raw problem files,
    whose rows the generator does not normalize."""
    path = str(tmp_path / "p.txt")
    assert main(["generate", "--kind", "ls", "--rows", "10", "--cols", "4",
                 "--seed", "14", "-o", path]) == 0
    out = str(tmp_path / "c.csv")
    assert main(["compare", path, "--methods", "rk,rpk,rak", "--trials", "30",
                 "--checkpoints", "0,20,60", "--seed", "2", "-o", out]) == 0
    capsys.readouterr()
    for line in open(out).read().strip().splitlines()[1:]:
        _, _, mean, env = line.split(",")
        assert float(mean) <= float(env) * 1.15


def test_compare_bad_checkpoints_exits_2(capsys, tmp_path, ls_problem):
    code, _, _ = run_cli(
        capsys, "compare", ls_problem, "--trials", "1",
        "--checkpoints", "0,banana",
    )
    assert code == 2


def test_compare_unknown_method_exits_2(capsys, tmp_path, ls_problem):
    code, _, _ = run_cli(
        capsys, "compare", ls_problem, "--methods", "rk,quantum",
        "--trials", "1", "--checkpoints", "0",
    )
    assert code == 2


# ---------------------------------------------------------------------------
# verify


def test_verify_steps_suite_passes(capsys):
    code, stdout, _ = run_cli(capsys, "verify", "--suite", "steps")
    assert code == 0
    lines = stdout.strip().splitlines()
    assert all(line.startswith("PASS") for line in lines[:-1])
    assert lines[-1] == "6/6 properties passed"


def test_verify_report_deterministic(capsys):
    code1 = main(["verify", "--suite", "steps", "--seed", "5"])
    out1 = capsys.readouterr().out
    code2 = main(["verify", "--suite", "steps", "--seed", "5"])
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2


# ---------------------------------------------------------------------------
# plot


def test_plot_single_trace(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    assert main(["solve", ls_problem, "--method", "rpk", "--iters", "40",
                 "--trace", trace]) == 0
    svg = str(tmp_path / "chart.svg")
    code, _, _ = run_cli(capsys, "plot", trace, "-o", svg)
    assert code == 0
    text = open(svg).read()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 1


def test_plot_two_traces_with_legend(capsys, tmp_path, ls_problem):
    t1 = str(tmp_path / "a.csv")
    t2 = str(tmp_path / "b.csv")
    assert main(["solve", ls_problem, "--method", "rk", "--iters", "30",
                 "--trace", t1]) == 0
    assert main(["solve", ls_problem, "--method", "rak", "--iters", "30",
                 "--trace", t2]) == 0
    svg = str(tmp_path / "chart.svg")
    code, _, _ = run_cli(capsys, "plot", t1, t2, "--log-y", "-o", svg)
    assert code == 0
    text = open(svg).read()
    assert text.count("<polyline") == 2
    assert "a" in text and "b" in text  # legend labels from basenames


def test_plot_byte_identical_reruns(capsys, tmp_path, ls_problem):
    trace = str(tmp_path / "t.csv")
    assert main(["solve", ls_problem, "--method", "rpk", "--iters", "20",
                 "--trace", trace]) == 0
    s1 = str(tmp_path / "a.svg")
    s2 = str(tmp_path / "b.svg")
    assert main(["plot", trace, "-o", s1]) == 0
    assert main(["plot", trace, "-o", s2]) == 0
    capsys.readouterr()
    assert open(s1, "rb").read() == open(s2, "rb").read()


def test_plot_empty_trace_exits_3(capsys, tmp_path):
    from kaczpen.traces import TRACE_HEADER

    empty = tmp_path / "empty.csv"
    empty.write_text(TRACE_HEADER + "\n")
    code, _, stderr = run_cli(capsys, "plot", str(empty), "-o", str(tmp_path / "o.svg"))
    assert code == 3


def test_plot_malformed_trace_exits_3(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("k,row\n0,1\n")
    code, _, stderr = run_cli(capsys, "plot", str(bad), "-o", str(tmp_path / "o.svg"))
    assert code == 3
    assert "line 1" in stderr
