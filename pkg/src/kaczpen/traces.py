"""Per-iteration trace records and run summaries, with CSV round-trip."""

from __future__ import annotations

from dataclasses import dataclass

from .fileio import atomic_write_text, format_float

TRACE_HEADER = "k,row,rho,error_sq,residual,z,lyapunov,fresh"


class TraceFormatError(Exception):
    """A trace CSV failed to parse; message names the offending line."""


@dataclass(frozen=True)
class TraceRecord:
    """One solver iteration.

    k is the iteration counter (0 for the pre-loop snapshot, whose row is
    -1).  error_sq is the squared distance to the solution set; for
    feasibility runs it is refreshed only every trace stride, and fresh
    says whether this record recomputed it.
    """

    k: int
    row: int
    rho: float
    error_sq: float
    residual: float
    z: float
    lyapunov: float
    fresh: bool = True


@dataclass(frozen=True)
class RunSummary:
    method: str
    kind: str
    m: int
    n: int
    rho0: float
    c: float
    seed: int
    iterations_executed: int
    final_error_sq: float
    final_residual: float
    per_step_factor: float
    wall_time_seconds: float
    rng: str = "pcg64"

    def as_line(self) -> str:
        parts = [
            f"method={self.method}",
            f"kind={self.kind}",
            f"m={self.m}",
            f"n={self.n}",
            f"rho0={format_float(self.rho0)}",
            f"c={format_float(self.c)}",
            f"seed={self.seed}",
            f"iterations_executed={self.iterations_executed}",
            f"final_error_sq={format_float(self.final_error_sq)}",
            f"final_residual={format_float(self.final_residual)}",
            f"per_step_factor={format_float(self.per_step_factor)}",
            f"wall_time_seconds={self.wall_time_seconds:.3f}",
            f"rng={self.rng}",
        ]
        return " ".join(parts)


def render_trace_csv(records: list[TraceRecord]) -> str:
    lines = [TRACE_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    str(r.k),
                    str(r.row),
                    format_float(r.rho),
                    format_float(r.error_sq),
                    format_float(r.residual),
                    format_float(r.z),
                    format_float(r.lyapunov),
                    "1" if r.fresh else "0",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(records: list[TraceRecord], path: str) -> None:
    atomic_write_text(path, render_trace_csv(records))


def parse_trace_csv(path: str) -> list[TraceRecord]:
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [(i + 1, ln) for i, ln in enumerate(raw) if ln.strip()]
    if not lines:
        raise TraceFormatError(f"{path}: line 1: empty trace file")
    lineno, header = lines[0]
    if header.strip() != TRACE_HEADER:
        raise TraceFormatError(f"{path}: line {lineno}: bad header {header!r}")
    if len(lines) < 2:
        raise TraceFormatError(f"{path}: line {lineno}: trace has no records")
    records = []
    for lineno, ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 8:
            raise TraceFormatError(
                f"{path}: line {lineno}: expected 8 fields, got {len(parts)}"
            )
        try:
            rec = TraceRecord(
                k=int(parts[0]),
                row=int(parts[1]),
                rho=float(parts[2]),
                error_sq=float(parts[3]),
                residual=float(parts[4]),
                z=float(parts[5]),
                lyapunov=float(parts[6]),
                fresh=bool(int(parts[7])),
            )
        except ValueError as exc:
            raise TraceFormatError(f"{path}: line {lineno}: {exc}") from None
        records.append(rec)
    return records
