"""Trace CSV schema round trip and run summary formatting."""

import numpy as np
import pytest

from kaczpen.problems import generate_consistent_ls
from kaczpen.solvers import Method, SolverConfig, run_solver
from kaczpen.traces import (
    TRACE_HEADER,
    RunSummary,
    TraceFormatError,
    TraceRecord,
    parse_trace_csv,
    render_trace_csv,
    write_trace_csv,
)


def sample_records():
    return [
        TraceRecord(k=0, row=-1, rho=1.0, error_sq=4.0, residual=2.0, z=0.0, lyapunov=4.0),
        TraceRecord(
            k=1, row=3, rho=1.1, error_sq=1.0 / 3.0, residual=0.5, z=0.25,
            lyapunov=1.0 / 3.0 + 0.25 ** 2 / 1.1, fresh=False,
        ),
    ]


def test_header_is_stable():
    assert TRACE_HEADER == "k,row,rho,error_sq,residual,z,lyapunov,fresh"


def test_render_starts_with_header():
    text = render_trace_csv(sample_records())
    assert text.splitlines()[0] == TRACE_HEADER
    assert len(text.splitlines()) == 3


def test_round_trip_preserves_floats(tmp_path):
    path = str(tmp_path / "t.csv")
    recs = sample_records()
    write_trace_csv(recs, path)
    back = parse_trace_csv(path)
    assert len(back) == 2
    for orig, parsed in zip(recs, back):
        assert parsed.k == orig.k
        assert parsed.row == orig.row
        assert parsed.rho == orig.rho
        assert parsed.error_sq == orig.error_sq  # 17 digits round-trip exactly
        assert parsed.residual == orig.residual
        assert parsed.z == orig.z
        assert parsed.lyapunov == orig.lyapunov
        assert parsed.fresh == orig.fresh


def test_parse_rejects_bad_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("k,row\n0,-1\n")
    with pytest.raises(TraceFormatError, match="line 1"):
        parse_trace_csv(str(path))


def test_parse_rejects_short_row(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TRACE_HEADER + "\n0,-1,1.0\n")
    with pytest.raises(TraceFormatError, match="line 2"):
        parse_trace_csv(str(path))


def test_parse_rejects_non_numeric(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TRACE_HEADER + "\n0,-1,1.0,x,0,0,0,1\n")
    with pytest.raises(TraceFormatError, match="line 2"):
        parse_trace_csv(str(path))


def test_parse_requires_a_record(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TRACE_HEADER + "\n")
    with pytest.raises(TraceFormatError):
        parse_trace_csv(str(path))


def test_solver_trace_round_trip(tmp_path):
    p = generate_consistent_ls(5, 3, seed=1)
    records = []
    run_solver(
        p,
        SolverConfig(method=Method.RAK, max_iters=30, seed=2),
        lambda rec: records.append(rec),
    )
    path = str(tmp_path / "run.csv")
    write_trace_csv(records, path)
    back = parse_trace_csv(path)
    assert [r.k for r in back] == [r.k for r in records]
    assert [r.error_sq for r in back] == [r.error_sq for r in records]
    assert [r.lyapunov for r in back] == [r.lyapunov for r in records]


def test_run_summary_line_fields():
    s = RunSummary(
        method="rpk", kind="ls", m=5, n=3, rho0=1.0, c=1.5, seed=7,
        iterations_executed=100, final_error_sq=1e-8, final_residual=1e-4,
        per_step_factor=0.9, wall_time_seconds=0.0123,
    )
    line = s.as_line()
    assert "method=rpk" in line
    assert "kind=ls" in line
    assert "seed=7" in line
    assert "iterations_executed=100" in line
    assert "rng=pcg64" in line
    # every field is a single key=value token
    assert all("=" in tok for tok in line.split())
