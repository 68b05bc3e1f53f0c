"""Runtime verification of the model's analytic guarantees plus epidemic
summaries (totals, outbreak onsets, long-time limits).

The solver calls ``check_bounds`` every step and accumulates the budget and
monotonicity data; the series-level checks here re-verify the same guarantees
on the recorded time series, so they can also run on a diagnostics CSV read
back from disk.

Host budget bookkeeping: with the SEIR rates used here, the weighted total
2S+2E+I decreases exactly by ``lam*int E + delta*int I``, so the accumulated
left-hand side can never exceed the *weighted* initial total 2S0+2E0+I0.  The
unweighted initial total S0+E0+I0 is also reported: it bounds the
delta-int-I part alone and is the traditional way this budget is quoted, but
it is exceeded whenever most hosts pass through the infection pipeline.  The
enforced runtime invariant is the weighted one; both residuals are recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SimState


@dataclass(frozen=True)
class SubregionRecord:
    subregion_id: int
    s_total: float
    e_total: float
    i_total: float
    e_max: float
    i_max: float
    budget_lhs: float  # lam * int0^t (E total) + delta * int0^t (I total)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    vs_total: float
    vi_total: float
    v_total: float
    v_max: float
    vi_max: float
    outflow_cum: float
    subregions: tuple[SubregionRecord, ...]
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SeriesMeta:
    subregion_ids: tuple[int, ...]
    centers: tuple[tuple[float, float], ...]
    initial_host_totals: dict[int, tuple[float, float, float]]  # (S0, E0, I0) totals
    v_bound: float
    lam: float
    delta: float


@dataclass
class DiagnosticsSeries:
    meta: SeriesMeta
    records: list[DiagnosticsRecord] = field(default_factory=list)

    def budget_rhs(self, subregion_id: int) -> tuple[float, float]:
        """(unweighted, weighted) initial-total bounds for one subregion."""
        s0, e0, i0 = self.meta.initial_host_totals[subregion_id]
        return s0 + e0 + i0, 2.0 * s0 + 2.0 * e0 + i0

    def column(self, getter) -> np.ndarray:
        return np.array([getter(r) for r in self.records])

    def sub_column(self, subregion_id: int, attr: str) -> np.ndarray:
        idx = self.meta.subregion_ids.index(subregion_id)
        return np.array([getattr(r.subregions[idx], attr) for r in self.records])


@dataclass(frozen=True)
class OutbreakEvent:
    subregion_id: int
    center: tuple[float, float]
    t_onset: float
    threshold: float


NONNEG_EPS_FACTOR = 1e-12
BOUND_SLACK = 1e-9


def check_bounds(
    state: SimState,
    v_bound: float,
    host_scales: list[float],
) -> list[str]:
    """Nonnegativity and the a-priori sup bound on the total vector density.

    ``host_scales`` gives the per-subregion magnitude (initial sup of
    S+E+I) used to scale the negative-value tolerance.  Returns the violated
    flags; an empty list means the state is clean.  Non-finite values flag as
    "finite".
    """
    flags: list[str] = []
    vec_eps = NONNEG_EPS_FACTOR * max(1.0, v_bound)
    vs_min = float(state.vs.min())
    vi_min = float(state.vi.min())
    v_max = float((state.vs + state.vi).max())
    if not (math.isfinite(vs_min) and math.isfinite(vi_min) and math.isfinite(v_max)):
        return ["finite"]
    if vs_min < -vec_eps:
        flags.append("nonneg:vs")
    if vi_min < -vec_eps:
        flags.append("nonneg:vi")
    if v_max > v_bound * (1.0 + BOUND_SLACK):
        flags.append("bound:v")
    for k, (host, scale) in enumerate(zip(state.hosts, host_scales)):
        eps = NONNEG_EPS_FACTOR * max(1.0, scale)
        lo = min(float(host.s.min()), float(host.e.min()), float(host.i.min()))
        if not math.isfinite(lo):
            return ["finite"]
        if lo < -eps:
            flags.append(f"nonneg:host{k}")
    return flags


@dataclass(frozen=True)
class BudgetStatus:
    subregion_id: int
    lhs_final: float
    rhs_unweighted: float
    rhs_weighted: float
    residual_unweighted: float  # min over t of rhs_unweighted - lhs(t)
    residual_weighted: float
    ok: bool  # weighted inequality held for every record


def check_host_budget(series: DiagnosticsSeries, tol_rel: float = 1e-6) -> list[BudgetStatus]:
    """Verify the cumulative-infection budget for every subregion and time."""
    out = []
    for j in series.meta.subregion_ids:
        lhs = series.sub_column(j, "budget_lhs")
        rhs_u, rhs_w = series.budget_rhs(j)
        res_u = float((rhs_u - lhs).min()) if lhs.size else rhs_u
        res_w = float((rhs_w - lhs).min()) if lhs.size else rhs_w
        tol = tol_rel * max(rhs_u, 1.0)
        out.append(
            BudgetStatus(
                subregion_id=j,
                lhs_final=float(lhs[-1]) if lhs.size else 0.0,
                rhs_unweighted=rhs_u,
                rhs_weighted=rhs_w,
                residual_unweighted=res_u,
                residual_weighted=res_w,
                ok=res_w >= -tol,
            )
        )
    return out


def check_monotone_susceptibles(series: DiagnosticsSeries, tol_factor: float = 1e-10) -> list[str]:
    """Each subregion's susceptible total must be non-increasing in time."""
    flags = []
    for j in series.meta.subregion_ids:
        s = series.sub_column(j, "s_total")
        if s.size < 2:
            continue
        tol = tol_factor * max(float(s[0]), 1.0)
        if float(np.diff(s).max()) > tol:
            flags.append(f"monotone:s_{j}")
    return flags


def detect_outbreak(series: DiagnosticsSeries, threshold: float = 1.0) -> list[OutbreakEvent]:
    """First time each subregion's infected-host total crosses ``threshold``.

    Linear interpolation between consecutive records; at most one event per
    subregion.  Subregions that never cross produce no event.
    """
    if threshold <= 0:
        raise ValueError(f"outbreak threshold must be positive, got {threshold}")
    events = []
    times = series.column(lambda r: r.t)
    for j, center in zip(series.meta.subregion_ids, series.meta.centers):
        i_tot = series.sub_column(j, "i_total")
        above = np.nonzero(i_tot >= threshold)[0]
        if above.size == 0:
            continue
        k = int(above[0])
        if k == 0:
            t_star = float(times[0])
        else:
            i0, i1 = float(i_tot[k - 1]), float(i_tot[k])
            t0, t1 = float(times[k - 1]), float(times[k])
            frac = (threshold - i0) / (i1 - i0) if i1 > i0 else 1.0
            t_star = t0 + frac * (t1 - t0)
        events.append(
            OutbreakEvent(subregion_id=j, center=center, t_onset=t_star, threshold=threshold)
        )
    return events


@dataclass(frozen=True)
class SubregionAsymptotics:
    subregion_id: int
    s_star: float
    s_rel_change: float
    s_converged: bool
    e_final: float
    e_peak: float
    i_final: float
    i_peak: float
    e_max_final: float
    i_max_final: float


@dataclass(frozen=True)
class AsymptoticSummary:
    window: float
    subregions: tuple[SubregionAsymptotics, ...]
    vi_final: float
    vi_peak: float
    vi_max_final: float
    vi_max_peak: float
    converged: bool


def asymptotic_summary(
    series: DiagnosticsSeries,
    window: float = 2.0,
    rel_tol: float = 1e-3,
) -> AsymptoticSummary:
    """Long-time limits: S* estimates from the final record after a windowed
    relative-change test, plus terminal-versus-peak decay of E, I and V_i."""
    if not series.records:
        raise ValueError("empty diagnostics series")
    times = series.column(lambda r: r.t)
    t_end = float(times[-1])
    k_ref = int(np.searchsorted(times, t_end - window, side="left"))
    k_ref = min(k_ref, len(times) - 1)
    subs = []
    all_converged = True
    for j in series.meta.subregion_ids:
        s = series.sub_column(j, "s_total")
        e = series.sub_column(j, "e_total")
        i = series.sub_column(j, "i_total")
        s_star = float(s[-1])
        denom = max(s_star, 1e-12 * max(float(s[0]), 1.0), 1e-300)
        rel_change = abs(s_star - float(s[k_ref])) / denom
        converged = rel_change < rel_tol
        all_converged = all_converged and converged
        subs.append(
            SubregionAsymptotics(
                subregion_id=j,
                s_star=s_star,
                s_rel_change=rel_change,
                s_converged=converged,
                e_final=float(e[-1]),
                e_peak=float(e.max()),
                i_final=float(i[-1]),
                i_peak=float(i.max()),
                e_max_final=float(series.sub_column(j, "e_max")[-1]),
                i_max_final=float(series.sub_column(j, "i_max")[-1]),
            )
        )
    vi = series.column(lambda r: r.vi_total)
    vi_max = series.column(lambda r: r.vi_max)
    return AsymptoticSummary(
        window=window,
        subregions=tuple(subs),
        vi_final=float(vi[-1]),
        vi_peak=float(vi.max()),
        vi_max_final=float(vi_max[-1]),
        vi_max_peak=float(vi_max.max()),
        converged=all_converged,
    )
