"""Deterministic structured-grid simulator for wind-aided vector-host
epidemics: a diffusing, wind-advected vector population with logistic
demographics coupled to SEIR host populations confined to disk habitats.
"""

from .config import (
    DiagnosticsConfig,
    InitialConfig,
    OutputConfig,
    ParamsConfig,
    Scenario,
    ScenarioConfig,
    compile_scenario,
    load_config,
    write_config,
)
from .diagnostics import (
    AsymptoticSummary,
    DiagnosticsRecord,
    DiagnosticsSeries,
    OutbreakEvent,
    asymptotic_summary,
    check_bounds,
    check_host_budget,
    check_monotone_susceptibles,
    detect_outbreak,
)
from .errors import (
    AssumptionError,
    ConfigError,
    ConvergenceError,
    InvariantViolation,
    StabilityError,
)
from .grid import (
    DomainSpec,
    Grid,
    Mask,
    SubregionSpec,
    build_grid,
    build_mask,
    build_masks,
    full_mask,
    integrate,
)
from .hosts import closed_form_susceptibles, host_reaction, mask_stencil, masked_diffusion_tendency
from .model import (
    BumpInit,
    ConstantInit,
    GaussianBump,
    HostInit,
    HostState,
    ModelParams,
    ParamBounds,
    ScaledInit,
    SimState,
    VectorInit,
    build_initial_state,
    carrying_capacity,
    param_bounds,
    state_totals,
    validate_params,
)
from .presets import PRESET_NAMES, preset_config
from .scenario import RunArtifacts, run_scenario
from .solver import RunResult, Sinks, SolverConfig, StabilityLimits, run, stability_limits, step
from .spectral import (
    EigenResult,
    PersistenceCheck,
    gradient_l2_norm,
    persistence_criterion,
    principal_eigenvalue,
    rayleigh_quotient,
)
from .vectors import (
    advection_tendency,
    diffusion_tendency,
    face_diffusivity,
    incidence,
    vector_reaction,
)

__version__ = "0.1.0"
