"""Scenario configuration: schema, YAML loading/writing, validation.

Keys carry explicit units (``_km``, ``_per_month``, ...) so a config is
unambiguous without external documentation.  ``load_config`` rejects unknown
keys, reports YAML parse errors with line numbers, and runs every model
assumption check on the assembled coefficient fields, naming the violated
assumption (e.g. "A6: ...") in the error.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import AssumptionError, ConfigError
from .grid import DomainSpec, Grid, Mask, SubregionSpec, build_grid, build_masks
from .model import (
    BumpInit,
    ConstantInit,
    GaussianBump,
    HostInit,
    ModelParams,
    ScaledInit,
    SimState,
    VectorInit,
    build_initial_state,
    validate_params,
)
from .solver import HOST_MODES, SolverConfig

SNAPSHOT_FIELDS = (
    "vector_susceptible",
    "vector_infected",
    "host_susceptible",
    "host_exposed",
    "host_infected",
)


@dataclass(frozen=True)
class DiagnosticsConfig:
    outbreak_threshold: float = 1.0  # hosts
    policy: str = "abort"  # "abort" in test mode, "warn" to keep going


@dataclass(frozen=True)
class ParamsConfig:
    """Coefficient values; per-subregion entries accept a single number or a
    mapping from subregion id to number."""

    vector_diffusion: float = 1.0
    transport_velocity: tuple[float, float] = (0.0, 0.0)
    vector_birth: float = 1.0
    vector_mortality: float = 1e-3
    host_infection: float | dict[int, float] = 1.0
    vector_infection: float | dict[int, float] = 5e-3
    incubation_exit: float = 4.0
    removal: float = 1.0
    host_mode: str = "nondiffusive"
    host_diffusion_se: float | dict[int, float] | None = None
    host_diffusion_i: float | dict[int, float] | None = None


@dataclass(frozen=True)
class InitialConfig:
    vector: VectorInit
    hosts: dict[int, HostInit]


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "run"
    snapshot_times: tuple[float, ...] = ()
    snapshot_fields: tuple[str, ...] = ("vector_infected", "host_susceptible")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    domain: DomainSpec
    subregions: tuple[SubregionSpec, ...]
    params: ParamsConfig
    initial: InitialConfig
    solver: SolverConfig
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    output: OutputConfig = OutputConfig()
    description: str = ""


@dataclass(frozen=True)
class Scenario:
    """A config compiled to concrete arrays, ready to run."""

    config: ScenarioConfig
    grid: Grid
    masks: list[Mask]
    params: ModelParams
    initial: SimState


# --- dict -> dataclass parsing ------------------------------------------------

_REQUIRED = object()


class _Section:
    """Mapping view that tracks consumed keys and rejects leftovers."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen: set = set()

    def take(self, key, default=_REQUIRED):
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if default is _REQUIRED:
            raise ConfigError(f"{self.path}: missing required key '{key}'")
        return default

    def sub(self, key, required=True):
        raw = self.take(key, default=None)
        if raw is None:
            if required:
                raise ConfigError(f"{self.path}: missing required section '{key}'")
            return None
        return _Section(raw, f"{self.path}.{key}")

    def finish(self):
        unknown = set(self.data) - self.seen
        if unknown:
            raise ConfigError(f"{self.path}: unknown keys {sorted(map(str, unknown))}")


def _floatval(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"{path}: expected [x, y], got {value!r}")
    return (_floatval(value[0], path), _floatval(value[1], path))


def _per_subregion(value, path: str):
    if value is None:
        return None
    if isinstance(value, dict):
        return {int(k): _floatval(v, f"{path}[{k}]") for k, v in value.items()}
    return _floatval(value, path)


def _parse_init(raw, path: str, *, host: bool):
    sec = _Section(raw, path)
    kinds = [
        k
        for k in ("constant_per_km2", "bump", "scale_of_susceptible", "scaled_copy_of_infected_hosts")
        if k in sec.data
    ]
    if len(kinds) != 1:
        raise ConfigError(
            f"{path}: exactly one initializer kind expected "
            f"(constant_per_km2 | bump | scale_of_susceptible | "
            f"scaled_copy_of_infected_hosts)"
        )
    kind = kinds[0]
    if kind == "constant_per_km2":
        init = ConstantInit(_floatval(sec.take(kind), path))
    elif kind == "bump":
        b = sec.sub("bump")
        init = BumpInit(
            GaussianBump(
                amplitude=_floatval(b.take("amplitude_per_km2"), b.path),
                center=_pair(b.take("center_km"), b.path),
                width=_floatval(b.take("width_km2", 1.0), b.path),
            )
        )
        b.finish()
    elif kind == "scale_of_susceptible":
        if not host:
            raise ConfigError(f"{path}: scale_of_susceptible is only valid for host compartments")
        init = ScaledInit(_floatval(sec.take(kind), path))
    else:
        if host:
            raise ConfigError(
                f"{path}: scaled_copy_of_infected_hosts is only valid for the infected-vector field"
            )
        s = sec.sub(kind)
        init = ScaledInit(
            factor=_floatval(s.take("factor", 1.0), s.path),
            source_subregion=int(s.take("subregion")),
        )
        s.finish()
    sec.finish()
    return init


def from_dict(data: dict, name_hint: str = "scenario") -> ScenarioConfig:
    root = _Section(data, "config")
    name = str(root.take("name", name_hint))
    description = str(root.take("description", ""))

    dom = root.sub("domain")
    domain = DomainSpec(
        origin=_pair(dom.take("origin_km", [0.0, 0.0]), dom.path),
        extent=_pair(dom.take("extent_km"), dom.path),
        cell_size=_floatval(dom.take("cell_size_km"), dom.path),
        boundary_mode=str(dom.take("boundary_mode", "outflow")),
    )
    dom.finish()

    raw_subs = root.take("subregions", [])
    if not isinstance(raw_subs, list):
        raise ConfigError("config.subregions: expected a list")
    subs = []
    for k, raw in enumerate(raw_subs):
        s = _Section(raw, f"config.subregions[{k}]")
        subs.append(
            SubregionSpec(
                id=int(s.take("id")),
                center=_pair(s.take("center_km"), s.path),
                radius=_floatval(s.take("radius_km"), s.path),
            )
        )
        s.finish()

    p = root.sub("params")
    params = ParamsConfig(
        vector_diffusion=_floatval(p.take("vector_diffusion_km2_per_month"), p.path),
        transport_velocity=_pair(p.take("transport_velocity_km_per_month", [0.0, 0.0]), p.path),
        vector_birth=_floatval(p.take("vector_birth_per_month"), p.path),
        vector_mortality=_floatval(p.take("vector_mortality_km2_per_month_per_vector"), p.path),
        host_infection=_per_subregion(
            p.take("host_infection_km2_per_month_per_vector", 1.0), p.path
        ),
        vector_infection=_per_subregion(
            p.take("vector_infection_km2_per_month_per_host", 5e-3), p.path
        ),
        incubation_exit=_floatval(p.take("incubation_exit_per_month"), p.path),
        removal=_floatval(p.take("removal_per_month"), p.path),
        host_mode=str(p.take("host_mode", "nondiffusive")),
        host_diffusion_se=_per_subregion(p.take("host_diffusion_se_km2_per_month", None), p.path),
        host_diffusion_i=_per_subregion(p.take("host_diffusion_i_km2_per_month", None), p.path),
    )
    p.finish()
    if params.host_mode not in HOST_MODES:
        raise ConfigError(f"config.params.host_mode must be one of {HOST_MODES}")

    ini = root.sub("initial")
    vec = VectorInit(
        susceptible=_parse_init(
            ini.take("vector_susceptible"), f"{ini.path}.vector_susceptible", host=False
        ),
        infected=_parse_init(
            ini.take("vector_infected"), f"{ini.path}.vector_infected", host=False
        ),
    )
    hosts_raw = ini.take("hosts", {})
    if not isinstance(hosts_raw, dict):
        raise ConfigError(f"{ini.path}.hosts: expected a mapping of subregion id to compartments")
    hosts = {}
    for key, raw in hosts_raw.items():
        jid = int(key)
        hs = _Section(raw, f"{ini.path}.hosts[{jid}]")
        hosts[jid] = HostInit(
            susceptible=_parse_init(hs.take("susceptible"), f"{hs.path}.susceptible", host=True),
            exposed=_parse_init(hs.take("exposed"), f"{hs.path}.exposed", host=True),
            infected=_parse_init(hs.take("infected"), f"{hs.path}.infected", host=True),
        )
        hs.finish()
    ini.finish()
    initial = InitialConfig(vector=vec, hosts=hosts)

    sol = root.sub("solver")
    solver = SolverConfig(
        t_end=_floatval(sol.take("t_end_months"), sol.path),
        dt_max=_floatval(sol.take("dt_max_months", 0.05), sol.path),
        cfl_safety=_floatval(sol.take("cfl_safety", 0.9), sol.path),
        output_stride=int(sol.take("output_stride_steps", 25)),
        host_mode=params.host_mode,
    )
    sol.finish()

    diag = root.sub("diagnostics", required=False)
    if diag is None:
        diagnostics = DiagnosticsConfig()
    else:
        diagnostics = DiagnosticsConfig(
            outbreak_threshold=_floatval(diag.take("outbreak_threshold_hosts", 1.0), diag.path),
            policy=str(diag.take("policy", "abort")),
        )
        diag.finish()
    if diagnostics.policy not in ("abort", "warn"):
        raise ConfigError("config.diagnostics.policy must be 'abort' or 'warn'")
    if diagnostics.outbreak_threshold <= 0:
        raise ConfigError("config.diagnostics.outbreak_threshold_hosts must be positive")

    out = root.sub("output", required=False)
    if out is None:
        output = OutputConfig()
    else:
        fields = out.take("snapshot_fields", list(OutputConfig().snapshot_fields))
        if not isinstance(fields, list) or not all(f in SNAPSHOT_FIELDS for f in fields):
            raise ConfigError(f"config.output.snapshot_fields entries must be in {SNAPSHOT_FIELDS}")
        times = out.take("snapshot_times_months", [])
        if not isinstance(times, list):
            raise ConfigError("config.output.snapshot_times_months: expected a list")
        output = OutputConfig(
            directory=str(out.take("directory", "run")),
            snapshot_times=tuple(_floatval(t, f"{out.path}.snapshot_times_months") for t in times),
            snapshot_fields=tuple(str(f) for f in fields),
        )
        out.finish()

    root.finish()
    return ScenarioConfig(
        name=name,
        domain=domain,
        subregions=tuple(subs),
        params=params,
        initial=initial,
        solver=solver,
        diagnostics=diagnostics,
        output=output,
        description=description,
    )


# --- dataclass -> dict --------------------------------------------------------

def _init_to_dict(init) -> dict:
    if isinstance(init, ConstantInit):
        return {"constant_per_km2": init.value}
    if isinstance(init, BumpInit):
        return {
            "bump": {
                "amplitude_per_km2": init.bump.amplitude,
                "center_km": list(init.bump.center),
                "width_km2": init.bump.width,
            }
        }
    if isinstance(init, ScaledInit):
        if init.source_subregion is None:
            return {"scale_of_susceptible": init.factor}
        return {
            "scaled_copy_of_infected_hosts": {
                "subregion": init.source_subregion,
                "factor": init.factor,
            }
        }
    raise TypeError(f"unknown initializer {init!r}")


def to_dict(cfg: ScenarioConfig) -> dict:
    p = cfg.params
    return {
        "name": cfg.name,
        "description": cfg.description,
        "domain": {
            "origin_km": list(cfg.domain.origin),
            "extent_km": list(cfg.domain.extent),
            "cell_size_km": cfg.domain.cell_size,
            "boundary_mode": cfg.domain.boundary_mode,
        },
        "subregions": [
            {"id": s.id, "center_km": list(s.center), "radius_km": s.radius}
            for s in cfg.subregions
        ],
        "params": {
            "vector_diffusion_km2_per_month": p.vector_diffusion,
            "transport_velocity_km_per_month": list(p.transport_velocity),
            "vector_birth_per_month": p.vector_birth,
            "vector_mortality_km2_per_month_per_vector": p.vector_mortality,
            "host_infection_km2_per_month_per_vector": p.host_infection,
            "vector_infection_km2_per_month_per_host": p.vector_infection,
            "incubation_exit_per_month": p.incubation_exit,
            "removal_per_month": p.removal,
            "host_mode": p.host_mode,
            "host_diffusion_se_km2_per_month": p.host_diffusion_se,
            "host_diffusion_i_km2_per_month": p.host_diffusion_i,
        },
        "initial": {
            "vector_susceptible": _init_to_dict(cfg.initial.vector.susceptible),
            "vector_infected": _init_to_dict(cfg.initial.vector.infected),
            "hosts": {
                jid: {
                    "susceptible": _init_to_dict(h.susceptible),
                    "exposed": _init_to_dict(h.exposed),
                    "infected": _init_to_dict(h.infected),
                }
                for jid, h in sorted(cfg.initial.hosts.items())
            },
        },
        "solver": {
            "t_end_months": cfg.solver.t_end,
            "dt_max_months": cfg.solver.dt_max,
            "cfl_safety": cfg.solver.cfl_safety,
            "output_stride_steps": cfg.solver.output_stride,
        },
        "diagnostics": {
            "outbreak_threshold_hosts": cfg.diagnostics.outbreak_threshold,
            "policy": cfg.diagnostics.policy,
        },
        "output": {
            "directory": cfg.output.directory,
            "snapshot_times_months": list(cfg.output.snapshot_times),
            "snapshot_fields": list(cfg.output.snapshot_fields),
        },
    }


# --- compile and validate ------------------------------------------------------

def compile_scenario(cfg: ScenarioConfig) -> Scenario:
    """Build grid, masks, coefficient fields and the initial state, running
    every assumption check that applies to discrete data."""
    grid = build_grid(cfg.domain)
    if grid.nx < 4 or grid.ny < 4:
        raise ConfigError(
            f"scenario grids need at least 4 cells per axis, got {grid.nx}x{grid.ny}"
        )
    masks = build_masks(grid, list(cfg.subregions))
    p = cfg.params
    if p.vector_birth < 0:
        raise AssumptionError("A5", "vector birth rate beta must be nonnegative")
    if p.vector_mortality <= 0:
        raise AssumptionError("A6", "vector mortality m must be >= m_* > 0")
    if p.vector_diffusion <= 0:
        raise AssumptionError("A2", "vector diffusivity D must be >= D_m > 0")
    diffusive = p.host_mode == "diffusive"
    if diffusive and (p.host_diffusion_se is None or p.host_diffusion_i is None):
        raise AssumptionError(
            "A8", "diffusive host mode requires host_diffusion_se and host_diffusion_i"
        )

    def resolve(value, what):
        if isinstance(value, dict):
            missing = {m.subregion.id for m in masks} - set(value)
            if missing:
                raise ConfigError(f"params.{what}: missing subregions {sorted(missing)}")
            unknown = set(value) - {m.subregion.id for m in masks}
            if unknown:
                raise ConfigError(f"params.{what}: unknown subregions {sorted(unknown)}")
        return value

    params = ModelParams.uniform(
        grid,
        masks,
        d=p.vector_diffusion,
        velocity=p.transport_velocity,
        beta=p.vector_birth,
        m=p.vector_mortality,
        sigma=resolve(p.host_infection, "host_infection"),
        alpha=resolve(p.vector_infection, "vector_infection"),
        lam=p.incubation_exit,
        delta=p.removal,
        host_diff_se=resolve(p.host_diffusion_se, "host_diffusion_se"),
        host_diff_i=resolve(p.host_diffusion_i, "host_diffusion_i"),
    )
    validate_params(params, masks, diffusive=diffusive)
    initial = build_initial_state(grid, masks, cfg.initial.vector, cfg.initial.hosts)
    for name, arr in (("vector_susceptible", initial.vs), ("vector_infected", initial.vi)):
        if float(arr.min()) < 0:
            raise AssumptionError("A12", f"initial {name} must be nonnegative")
    for host, mask in zip(initial.hosts, masks):
        if min(float(host.s.min()), float(host.e.min()), float(host.i.min())) < 0:
            raise AssumptionError(
                "A11", f"initial host fields on subregion {mask.subregion.id} must be nonnegative"
            )
    return Scenario(config=cfg, grid=grid, masks=masks, params=params, initial=initial)


def load_config(path: str | Path) -> ScenarioConfig:
    """Parse and fully validate a scenario file."""
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(io.StringIO(text))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}: parse error{where}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    cfg = from_dict(data, name_hint=path.stem)
    compile_scenario(cfg)  # full validation, including assumption checks
    return cfg


def write_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(to_dict(cfg), sort_keys=False))
