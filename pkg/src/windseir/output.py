"""Plain-text artifacts: snapshot grids, the diagnostics CSV, and the run
report.

Snapshot layout (documented, bit-exact): line 1 holds ``nx,ny,h,t``; the next
``ny`` lines hold ``nx`` comma-separated cell values, row ``iy`` ascending
(y increases downward in file order), column ``ix`` ascending.  Floats are
written with ``repr`` so rewriting the same data is byte-identical and parsing
recovers the exact binary values.

Diagnostics CSV: one row per record; columns are ``t, vs_total, vi_total,
v_total, v_max, vi_max, outflow_cum`` followed by six columns per subregion
(``s_total_J, e_total_J, i_total_J, e_max_J, i_max_J, budget_lhs_J``) and a
trailing ``flags`` column (semicolon-joined, empty when clean).
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .diagnostics import (
    AsymptoticSummary,
    BudgetStatus,
    DiagnosticsRecord,
    DiagnosticsSeries,
    OutbreakEvent,
    SeriesMeta,
    SubregionRecord,
)
from .grid import Grid


def _fmt(x: float) -> str:
    return repr(float(x))


def write_snapshot(path: str | Path, values: np.ndarray, grid: Grid, t: float) -> Path:
    path = Path(path)
    if values.shape != grid.shape:
        raise ValueError(f"snapshot shape {values.shape} does not match grid {grid.shape}")
    lines = [f"{grid.nx},{grid.ny},{_fmt(grid.cell_size)},{_fmt(t)}"]
    for row in values:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path: str | Path) -> tuple[np.ndarray, dict]:
    lines = Path(path).read_text().splitlines()
    nx_s, ny_s, h_s, t_s = lines[0].split(",")
    nx, ny, h, t = int(nx_s), int(ny_s), float(h_s), float(t_s)
    values = np.array([[float(v) for v in line.split(",")] for line in lines[1 : ny + 1]])
    if values.shape != (ny, nx):
        raise ValueError(f"{path}: body shape {values.shape} does not match header ({ny},{nx})")
    return values, {"nx": nx, "ny": ny, "h": h, "t": t}


def diagnostics_header(subregion_ids: tuple[int, ...]) -> list[str]:
    cols = ["t", "vs_total", "vi_total", "v_total", "v_max", "vi_max", "outflow_cum"]
    for j in subregion_ids:
        cols += [
            f"s_total_{j}",
            f"e_total_{j}",
            f"i_total_{j}",
            f"e_max_{j}",
            f"i_max_{j}",
            f"budget_lhs_{j}",
        ]
    cols.append("flags")
    return cols


def record_row(rec: DiagnosticsRecord) -> list[str]:
    row = [
        _fmt(rec.t),
        _fmt(rec.vs_total),
        _fmt(rec.vi_total),
        _fmt(rec.v_total),
        _fmt(rec.v_max),
        _fmt(rec.vi_max),
        _fmt(rec.outflow_cum),
    ]
    for sub in rec.subregions:
        row += [
            _fmt(sub.s_total),
            _fmt(sub.e_total),
            _fmt(sub.i_total),
            _fmt(sub.e_max),
            _fmt(sub.i_max),
            _fmt(sub.budget_lhs),
        ]
    row.append(";".join(rec.flags))
    return row


class DiagnosticsWriter:
    """Streams records to CSV so partial output survives an aborted run."""

    def __init__(self, path: str | Path, subregion_ids: tuple[int, ...]):
        self.path = Path(path)
        self._fh = self.path.open("w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(diagnostics_header(subregion_ids))

    def write(self, rec: DiagnosticsRecord) -> None:
        self._writer.writerow(record_row(rec))
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diagnostics_csv(path: str | Path) -> tuple[tuple[int, ...], list[DiagnosticsRecord]]:
    """Parse a diagnostics CSV back into records (subregion ids from the
    header)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids = tuple(int(c[len("s_total_") :]) for c in header if c.startswith("s_total_"))
        records = []
        for row in reader:
            vals = [float(v) for v in row[: 7 + 6 * len(ids)]]
            flags = tuple(f for f in row[-1].split(";") if f)
            subs = []
            for k, j in enumerate(ids):
                base = 7 + 6 * k
                subs.append(
                    SubregionRecord(
                        subregion_id=j,
                        s_total=vals[base],
                        e_total=vals[base + 1],
                        i_total=vals[base + 2],
                        e_max=vals[base + 3],
                        i_max=vals[base + 4],
                        budget_lhs=vals[base + 5],
                    )
                )
            records.append(
                DiagnosticsRecord(
                    t=vals[0],
                    vs_total=vals[1],
                    vi_total=vals[2],
                    v_total=vals[3],
                    v_max=vals[4],
                    vi_max=vals[5],
                    outflow_cum=vals[6],
                    subregions=tuple(subs),
                    flags=flags,
                )
            )
    return ids, records


def series_from_csv(path: str | Path, meta: SeriesMeta) -> DiagnosticsSeries:
    ids, records = read_diagnostics_csv(path)
    if ids != meta.subregion_ids:
        raise ValueError(f"{path}: subregions {ids} do not match expected {meta.subregion_ids}")
    return DiagnosticsSeries(meta=meta, records=records)


def snapshot_filename(field: str, index: int) -> str:
    return f"snap_{field}_{index:02d}.csv"


def write_report(
    path: str | Path,
    *,
    scenario_name: str,
    events: list[OutbreakEvent],
    summary: AsymptoticSummary | None,
    budget: list[BudgetStatus],
    monotone_flags: list[str],
    violations: list[tuple[float, str]],
    aborted: str | None = None,
) -> Path:
    """Structured text report: outbreak events, long-time summary, checks."""
    lines = [f"scenario: {scenario_name}", ""]
    if aborted:
        lines += [f"RUN ABORTED: {aborted}", ""]
    lines.append("outbreak events (infected-host total crossing threshold):")
    if events:
        for ev in events:
            lines.append(
                f"  subregion {ev.subregion_id} (center {ev.center[0]:g},{ev.center[1]:g} km): "
                f"onset t = {ev.t_onset:.3f} months (threshold {ev.threshold:g} hosts)"
            )
    else:
        lines.append("  none")
    lines.append("")
    if summary is not None:
        lines.append(f"long-time summary (window {summary.window:g} months):")
        for sub in summary.subregions:
            verdict = "converged" if sub.s_converged else "NOT CONVERGED"
            lines.append(
                f"  subregion {sub.subregion_id}: S* = {sub.s_star:.6g} hosts "
                f"(rel change {sub.s_rel_change:.2e}, {verdict}); "
                f"E {sub.e_final:.3e}/{sub.e_peak:.3e}, "
                f"I {sub.i_final:.3e}/{sub.i_peak:.3e} (final/peak totals)"
            )
        lines.append(
            f"  infected vectors: total {summary.vi_final:.3e}/{summary.vi_peak:.3e}, "
            f"max {summary.vi_max_final:.3e}/{summary.vi_max_peak:.3e} (final/peak)"
        )
        lines.append("")
    lines.append("host budget (cumulative lam*intE + delta*intI vs initial totals):")
    for b in budget:
        status = "ok" if b.ok else "VIOLATED"
        lines.append(
            f"  subregion {b.subregion_id}: lhs(final) = {b.lhs_final:.6g}, "
            f"weighted bound {b.rhs_weighted:.6g} ({status}); "
            f"unweighted reference {b.rhs_unweighted:.6g} "
            f"(min residual {b.residual_unweighted:.6g})"
        )
    lines.append("")
    lines.append(
        "monotone susceptible totals: "
        + ("ok" if not monotone_flags else f"VIOLATED {monotone_flags}")
    )
    lines.append(f"invariant violations during run: {len(violations)}")
    for t, flag in violations[:50]:
        lines.append(f"  t={t:.4f}: {flag}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path
