"""Operator-split explicit time integration of the coupled system.

Step sequence: (1) incidence and reactions for vectors and hosts, (2) vector
diffusion, (3) vector advection, (4) host diffusion when the diffusive host
mode is on.  Each sub-step is a monotone explicit update, so under the
combined stability limit the scheme preserves nonnegativity and the a-priori
sup bound on the total vector density; the run loop asserts both every step.

The step size is fixed once per run from worst-case bounds: the advection CFL
``(|wx|+|wy|) dt / h``, the diffusion limit ``4 D_max dt / h^2`` and the
reaction limit ``dt * max(beta*, lam, delta, sigma*Vbound, alpha*Ibound,
m*Vbound)`` must all stay below ``cfl_safety``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .diagnostics import (
    DiagnosticsRecord,
    DiagnosticsSeries,
    SeriesMeta,
    SubregionRecord,
    check_bounds,
)
from .errors import ConfigError, InvariantViolation, StabilityError
from .grid import Grid, Mask
from .hosts import host_reaction, mask_stencil, masked_diffusion_tendency
from .model import ModelParams, ParamBounds, SimState, param_bounds, validate_params
from .vectors import advection_tendency, diffusion_tendency, face_diffusivity, incidence, vector_reaction

HOST_MODES = ("nondiffusive", "diffusive")


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    dt_max: float = 0.05
    cfl_safety: float = 0.9
    output_stride: int = 25
    host_mode: str = "nondiffusive"

    def __post_init__(self):
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ConfigError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.dt_max <= 0:
            raise ConfigError(f"dt_max must be positive, got {self.dt_max}")
        if self.output_stride < 1:
            raise ConfigError(f"output_stride must be >= 1, got {self.output_stride}")
        if self.host_mode not in HOST_MODES:
            raise ConfigError(f"host_mode must be one of {HOST_MODES}, got {self.host_mode!r}")


@dataclass(frozen=True)
class StabilityLimits:
    dt_advection: float
    dt_diffusion: float
    dt_reaction: float
    dt_max: float
    v_bound: float
    i_bound: float

    @property
    def dt(self) -> float:
        return min(self.dt_advection, self.dt_diffusion, self.dt_reaction, self.dt_max)


def stability_limits(
    state: SimState,
    params: ModelParams,
    grid: Grid,
    cfg: SolverConfig,
    bounds: ParamBounds | None = None,
) -> StabilityLimits:
    """Worst-case step-size limits for the whole run, from a-priori bounds.

    ``Vbound = max(beta_max / m_min, max V(0))`` bounds the total vector
    density for all time; ``Ibound`` bounds infected hosts via the pointwise
    decrease of S+E+I.
    """
    if bounds is None:
        bounds = param_bounds(params)
    h = grid.cell_size
    safety = cfg.cfl_safety
    v0_max = float((state.vs + state.vi).max()) if state.vs.size else 0.0
    v_bound = max(bounds.beta_max / bounds.m_min, v0_max)
    i_bound = 0.0
    for host in state.hosts:
        if host.s.size:
            i_bound = max(i_bound, float((host.s + host.e + host.i).max()))

    speed = abs(params.velocity[0]) + abs(params.velocity[1])
    dt_adv = safety * h / speed if speed > 0 else math.inf

    d_max = bounds.d_max
    if params.host_diff_se is not None:
        d_max = max(d_max, max((float(a.max()) for a in params.host_diff_se), default=0.0))
    if params.host_diff_i is not None:
        d_max = max(d_max, max((float(a.max()) for a in params.host_diff_i), default=0.0))
    dt_diff = safety * h * h / (4.0 * d_max) if d_max > 0 else math.inf

    sigma_max = max((float(a.max()) for a in params.sigma), default=0.0)
    alpha_max = max((float(a.max()) for a in params.alpha), default=0.0)
    rate = max(
        bounds.beta_max,
        params.lam,
        params.delta,
        sigma_max * v_bound,
        alpha_max * i_bound,
        bounds.m_max * v_bound,
    )
    dt_react = safety / rate if rate > 0 else math.inf

    return StabilityLimits(
        dt_advection=dt_adv,
        dt_diffusion=dt_diff,
        dt_reaction=dt_react,
        dt_max=cfg.dt_max,
        v_bound=v_bound,
        i_bound=i_bound,
    )


class _Stepper:
    """Owns the per-run work buffers and advances a state in place by dt."""

    def __init__(self, params: ModelParams, grid: Grid, masks: list[Mask], cfg: SolverConfig, dt: float):
        self.params = params
        self.grid = grid
        self.masks = masks
        self.dt = dt
        self.h = grid.cell_size
        self.diffusive = cfg.host_mode == "diffusive"
        self.faces = face_diffusivity(params.d)
        self.stencils = [mask_stencil(m) for m in masks] if self.diffusive else None
        self.outflow_cum = 0.0
        shape = grid.shape
        ny, nx = shape
        self._f = np.zeros(shape)
        self._rvs = np.empty(shape)
        self._rvi = np.empty(shape)
        self._tend = np.empty(shape)
        self._vwork = (np.empty(shape), np.empty(shape))
        self._dwork = (np.empty((ny, nx - 1)), np.empty((ny - 1, nx)))

    def advance(self, state: SimState) -> None:
        dt = self.dt
        params = self.params
        flat_vi = state.vi.reshape(-1)
        vi_cells = [flat_vi[m.flat].copy() for m in self.masks]

        # (1) incidence + reactions, all rates from the pre-step state
        f = incidence(state, params, self.masks, out=self._f)
        rvs, rvi = vector_reaction(
            state, params, f, out_vs=self._rvs, out_vi=self._rvi, work=self._vwork
        )
        for host, mask, vi_c, sigma in zip(state.hosts, self.masks, vi_cells, params.sigma):
            ds, de, di = host_reaction(host.s, host.e, host.i, vi_c, sigma, params.lam, params.delta)
            host.vi_integral += dt * vi_c
            host.s += dt * ds
            host.e += dt * de
            host.i += dt * di
        rvs *= dt
        state.vs += rvs
        rvi *= dt
        state.vi += rvi

        # (2) vector diffusion
        for arr in (state.vs, state.vi):
            tend = diffusion_tendency(arr, self.faces, self.h, out=self._tend, work=self._dwork)
            tend *= dt
            arr += tend

        # (3) vector advection
        if params.velocity != (0.0, 0.0):
            for arr in (state.vs, state.vi):
                tend, outflow = advection_tendency(
                    arr, params.velocity, self.h, self.grid.boundary_mode, out=self._tend
                )
                tend *= dt
                arr += tend
                self.outflow_cum += dt * outflow

        # (4) host diffusion
        if self.diffusive:
            for host, stencil, dse, di_ in zip(
                state.hosts, self.stencils, params.host_diff_se, params.host_diff_i
            ):
                host.s += dt * masked_diffusion_tendency(host.s, stencil, dse, self.h)
                host.e += dt * masked_diffusion_tendency(host.e, stencil, dse, self.h)
                host.i += dt * masked_diffusion_tendency(host.i, stencil, di_, self.h)


def step(
    state: SimState,
    params: ModelParams,
    grid: Grid,
    masks: list[Mask],
    cfg: SolverConfig,
    dt: float | None = None,
) -> SimState:
    """One explicit step; returns a new state.  Rejects dt beyond the
    stability limit."""
    bounds = validate_params(params, masks, diffusive=cfg.host_mode == "diffusive")
    limits = stability_limits(state, params, grid, cfg, bounds)
    if dt is None:
        dt = limits.dt
    if not math.isfinite(dt) or dt <= 0:
        raise StabilityError(f"step size must be positive and finite, got {dt}")
    if dt > limits.dt * (1.0 + 1e-12):
        raise StabilityError(
            f"dt={dt:g} exceeds the stability limit {limits.dt:g} "
            f"(advection {limits.dt_advection:g}, diffusion {limits.dt_diffusion:g}, "
            f"reaction {limits.dt_reaction:g}, dt_max {limits.dt_max:g})"
        )
    new = state.copy()
    stepper = _Stepper(params, grid, masks, cfg, dt)
    stepper.advance(new)
    new.t = state.t + dt
    return new


@dataclass
class Sinks:
    """Optional streaming consumers; records/snapshots are immutable copies."""

    on_record: Callable[[DiagnosticsRecord], None] | None = None
    on_snapshot: Callable[[SimState], None] | None = None
    snapshot_times: tuple[float, ...] = ()


@dataclass
class RunResult:
    series: DiagnosticsSeries
    final_state: SimState
    violations: list[tuple[float, str]]
    dt: float
    n_steps: int
    limits: StabilityLimits
    outflow_cum: float


def _host_sups(state: SimState) -> list[float]:
    return [float((h.s + h.e + h.i).max()) if h.s.size else 0.0 for h in state.hosts]


def run(
    initial: SimState,
    params: ModelParams,
    grid: Grid,
    masks: list[Mask],
    cfg: SolverConfig,
    sinks: Sinks | None = None,
    policy: str = "abort",
) -> RunResult:
    """Integrate to ``cfg.t_end``, emitting records every ``output_stride``
    steps and snapshots as their times are crossed.

    Every step is checked against the analytic invariants (nonnegativity, the
    sup bound on V, monotone susceptible totals, the weighted host budget).
    ``policy="abort"`` raises on the first violation after flushing a final
    record through the sinks; ``policy="warn"`` keeps going and collects the
    violations.  Non-finite values always abort.  Deterministic for a fixed
    configuration.
    """
    if policy not in ("abort", "warn"):
        raise ConfigError(f"policy must be 'abort' or 'warn', got {policy!r}")
    if sinks is None:
        sinks = Sinks()
    bounds = validate_params(params, masks, diffusive=cfg.host_mode == "diffusive")
    limits = stability_limits(initial, params, grid, cfg, bounds)
    span = cfg.t_end - initial.t
    if span < 0:
        raise ConfigError(f"t_end={cfg.t_end} lies before the initial time {initial.t}")
    n_steps = 0 if span == 0 else int(math.ceil(span / limits.dt - 1e-9))
    dt = span / n_steps if n_steps else 0.0

    state = initial.copy()
    t0 = state.t
    area = grid.cell_area
    host_scales = _host_sups(initial)
    ids = tuple(m.subregion.id for m in masks)
    meta = SeriesMeta(
        subregion_ids=ids,
        centers=tuple(m.subregion.center for m in masks),
        initial_host_totals={
            m.subregion.id: (
                float(h.s.sum()) * area,
                float(h.e.sum()) * area,
                float(h.i.sum()) * area,
            )
            for m, h in zip(masks, initial.hosts)
        },
        v_bound=limits.v_bound,
        lam=params.lam,
        delta=params.delta,
    )
    series = DiagnosticsSeries(meta=meta)
    budget_lhs = {j: 0.0 for j in ids}
    budget_rhs_w = {j: 2.0 * s + 2.0 * e + i for j, (s, e, i) in meta.initial_host_totals.items()}
    budget_tol = {j: 1e-6 * max(sum(meta.initial_host_totals[j]), 1.0) for j in ids}
    prev_s_tot = {j: meta.initial_host_totals[j][0] for j in ids}
    mono_tol = {j: 1e-10 * max(meta.initial_host_totals[j][0], 1.0) for j in ids}

    stepper = _Stepper(params, grid, masks, cfg, dt)
    violations: list[tuple[float, str]] = []
    pending_flags: list[str] = []

    snap_times = sorted(sinks.snapshot_times)
    snap_idx = 0

    def fire_snapshots():
        nonlocal snap_idx
        while snap_idx < len(snap_times) and state.t >= snap_times[snap_idx] - 1e-9:
            if sinks.on_snapshot is not None:
                sinks.on_snapshot(state.copy())
            snap_idx += 1

    def make_record(flags: tuple[str, ...]) -> DiagnosticsRecord:
        v = state.vs + state.vi
        subs = tuple(
            SubregionRecord(
                subregion_id=m.subregion.id,
                s_total=float(h.s.sum()) * area,
                e_total=float(h.e.sum()) * area,
                i_total=float(h.i.sum()) * area,
                e_max=float(h.e.max()) if h.e.size else 0.0,
                i_max=float(h.i.max()) if h.i.size else 0.0,
                budget_lhs=budget_lhs[m.subregion.id],
            )
            for m, h in zip(masks, state.hosts)
        )
        return DiagnosticsRecord(
            t=state.t,
            vs_total=float(state.vs.sum()) * area,
            vi_total=float(state.vi.sum()) * area,
            v_total=float(v.sum()) * area,
            v_max=float(v.max()),
            vi_max=float(state.vi.max()),
            outflow_cum=stepper.outflow_cum,
            subregions=subs,
            flags=flags,
        )

    def emit_record():
        nonlocal pending_flags
        rec = make_record(tuple(pending_flags))
        pending_flags = []
        series.records.append(rec)
        if sinks.on_record is not None:
            sinks.on_record(rec)
        return rec

    flags0 = check_bounds(state, limits.v_bound, host_scales)
    pending_flags.extend(flags0)
    violations.extend((t0, fl) for fl in flags0)
    fire_snapshots()
    emit_record()
    if flags0 and policy == "abort":
        raise InvariantViolation(f"initial state violates invariants: {flags0}")

    for n in range(1, n_steps + 1):
        for mask, host in zip(masks, state.hosts):
            j = mask.subregion.id
            budget_lhs[j] += dt * area * (
                params.lam * float(host.e.sum()) + params.delta * float(host.i.sum())
            )
        stepper.advance(state)
        state.t = t0 + n * dt

        flags = check_bounds(state, limits.v_bound, host_scales)
        nonfinite = "finite" in flags
        for mask, host in zip(masks, state.hosts):
            j = mask.subregion.id
            s_tot = float(host.s.sum()) * area
            if s_tot > prev_s_tot[j] + mono_tol[j]:
                flags.append(f"monotone:s_{j}")
            prev_s_tot[j] = s_tot
            if budget_lhs[j] > budget_rhs_w[j] + budget_tol[j]:
                flags.append(f"budget:{j}")
        if flags:
            pending_flags.extend(flags)
            violations.extend((state.t, fl) for fl in flags)

        fire_snapshots()
        last = n == n_steps
        if flags or last or n % cfg.output_stride == 0:
            emit_record()
        if nonfinite:
            raise StabilityError(f"non-finite values detected at t={state.t:g}")
        if flags and policy == "abort":
            raise InvariantViolation(f"invariant violation at t={state.t:g}: {flags}")

    return RunResult(
        series=series,
        final_state=state,
        violations=violations,
        dt=dt,
        n_steps=n_steps,
        limits=limits,
        outflow_cum=stepper.outflow_cum,
    )
