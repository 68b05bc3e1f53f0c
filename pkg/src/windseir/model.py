"""Model coefficients, simulation state, and initial-condition constructors.

Unit conventions (densities per km^2, time in months):

==================  =========================================
field               units
==================  =========================================
vector densities    vectors / km^2
host densities      hosts / km^2
diffusivity         km^2 / month
velocity            km / month (transport direction of mass)
birth rate beta     1 / month
mortality m         km^2 / (month * vector)
sigma (host inf.)   km^2 / (month * vector)
alpha (vector inf.) km^2 / (month * host)
lam, delta          1 / month
==================  =========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AssumptionError, ConfigError
from .grid import Grid, Mask, integrate


@dataclass(frozen=True)
class GaussianBump:
    """Isotropic bump ``A * exp(1 - r^2 / (2 w))`` with ``r`` the distance to
    ``center``; ``width`` has km^2 units.  Its integral over the plane is
    ``A * e * 2 pi * width``.
    """

    amplitude: float
    center: tuple[float, float]
    width: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigError(f"bump amplitude must be nonnegative, got {self.amplitude}")
        if self.width <= 0:
            raise ConfigError(f"bump width must be positive, got {self.width}")

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        r2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return self.amplitude * np.exp(1.0 - r2 / (2.0 * self.width))

    def plane_total(self) -> float:
        return self.amplitude * math.e * 2.0 * math.pi * self.width


@dataclass(frozen=True)
class ModelParams:
    """All model coefficients on one grid.

    ``d``, ``beta``, ``m`` are full-grid fields; ``sigma``/``alpha`` (and the
    optional host diffusivities) are per-subregion arrays over mask cells,
    aligned with the mask list they were built against.  ``velocity`` is the
    constant transport velocity of vector mass (divergence-free because it is
    constant).
    """

    d: np.ndarray
    velocity: tuple[float, float]
    beta: np.ndarray
    m: np.ndarray
    sigma: list[np.ndarray]
    alpha: list[np.ndarray]
    lam: float
    delta: float
    host_diff_se: list[np.ndarray] | None = None
    host_diff_i: list[np.ndarray] | None = None

    @staticmethod
    def uniform(
        grid: Grid,
        masks: list[Mask],
        *,
        d: float,
        velocity: tuple[float, float],
        beta: float,
        m: float,
        sigma: float | dict[int, float],
        alpha: float | dict[int, float],
        lam: float,
        delta: float,
        host_diff_se: float | dict[int, float] | None = None,
        host_diff_i: float | dict[int, float] | None = None,
    ) -> "ModelParams":
        """Spatially constant coefficients, the Table-2 style setup."""

        def per_mask(value, name):
            if value is None:
                return None
            out = []
            for mask in masks:
                v = value[mask.subregion.id] if isinstance(value, dict) else value
                out.append(np.full(mask.count, float(v)))
            return out

        return ModelParams(
            d=grid.full(d),
            velocity=(float(velocity[0]), float(velocity[1])),
            beta=grid.full(beta),
            m=grid.full(m),
            sigma=per_mask(sigma, "sigma"),
            alpha=per_mask(alpha, "alpha"),
            lam=float(lam),
            delta=float(delta),
            host_diff_se=per_mask(host_diff_se, "host_diff_se"),
            host_diff_i=per_mask(host_diff_i, "host_diff_i"),
        )


@dataclass(frozen=True)
class ParamBounds:
    d_min: float
    d_max: float
    beta_max: float
    m_min: float
    m_max: float


def param_bounds(params: ModelParams) -> ParamBounds:
    """Exact grid min/max of the coefficient fields.

    Raises an assumption error when strict positivity of the diffusivity or
    the mortality floor fails, since every a-priori bound downstream divides
    by them.
    """
    d_min = float(params.d.min())
    d_max = float(params.d.max())
    m_min = float(params.m.min())
    m_max = float(params.m.max())
    beta_max = float(params.beta.max())
    if d_min <= 0:
        raise AssumptionError("A2", f"diffusivity must satisfy D >= D_m > 0, min is {d_min}")
    if m_min <= 0:
        raise AssumptionError("A6", f"mortality must satisfy m >= m_* > 0, min is {m_min}")
    return ParamBounds(d_min=d_min, d_max=d_max, beta_max=beta_max, m_min=m_min, m_max=m_max)


def validate_params(params: ModelParams, masks: list[Mask], diffusive: bool = False) -> ParamBounds:
    """Run every coefficient assumption that is checkable on discrete data."""
    for name, arr in (("D", params.d), ("beta", params.beta), ("m", params.m)):
        if not np.isfinite(arr).all():
            raise ConfigError(f"{name} contains non-finite values")
    bounds = param_bounds(params)
    if float(params.beta.min()) < 0:
        raise AssumptionError("A5", "vector birth rate beta must be nonnegative")
    if not (params.lam > 0 and params.delta > 0):
        raise AssumptionError(
            "A9", f"lam and delta must be positive, got lam={params.lam}, delta={params.delta}"
        )
    if len(params.sigma) != len(masks) or len(params.alpha) != len(masks):
        raise ConfigError("sigma/alpha must be given for every subregion")
    for mask, sig, alp in zip(masks, params.sigma, params.alpha):
        if sig.size != mask.count or alp.size != mask.count:
            raise ConfigError(f"sigma/alpha arrays do not match mask {mask.subregion.id}")
        if float(sig.min()) <= 0 or float(alp.min()) <= 0:
            raise AssumptionError(
                "A10",
                f"sigma and alpha must be >= a positive floor on subregion "
                f"{mask.subregion.id}",
            )
    if diffusive:
        if params.host_diff_se is None or params.host_diff_i is None:
            raise AssumptionError("A8", "diffusive host mode requires host diffusivities")
        for mask, dse, di in zip(masks, params.host_diff_se, params.host_diff_i):
            if float(dse.min()) <= 0 or float(di.min()) <= 0:
                raise AssumptionError(
                    "A8",
                    f"host diffusivities must be >= D_* > 0 on subregion "
                    f"{mask.subregion.id}",
                )
    return bounds


def carrying_capacity(params: ModelParams) -> np.ndarray:
    """Pointwise logistic equilibrium beta(x) / m(x) of the vector density."""
    if float(params.m.min()) <= 0:
        raise AssumptionError("A6", "carrying capacity requires m > 0 everywhere")
    return params.beta / params.m


@dataclass
class HostState:
    """One subregion's compartments on its mask cells (1-D arrays).

    ``vi_integral`` accumulates the per-cell time integral of the infected
    vector density, which drives the closed-form susceptible solution in
    non-diffusive mode.
    """

    s: np.ndarray
    e: np.ndarray
    i: np.ndarray
    vi_integral: np.ndarray

    def copy(self) -> "HostState":
        return HostState(self.s.copy(), self.e.copy(), self.i.copy(), self.vi_integral.copy())


@dataclass
class SimState:
    """Vector fields on the full grid plus per-subregion host compartments."""

    t: float
    vs: np.ndarray
    vi: np.ndarray
    hosts: list[HostState]

    def copy(self) -> "SimState":
        return SimState(
            t=self.t,
            vs=self.vs.copy(),
            vi=self.vi.copy(),
            hosts=[h.copy() for h in self.hosts],
        )

    def total_vector(self) -> np.ndarray:
        return self.vs + self.vi


# --- initial-condition constructors ------------------------------------------

@dataclass(frozen=True)
class ConstantInit:
    value: float


@dataclass(frozen=True)
class BumpInit:
    bump: GaussianBump


@dataclass(frozen=True)
class ScaledInit:
    """Scaled copy of an already-built compartment.

    For host compartments the source is that subregion's susceptible field;
    for the infected-vector field the source is one subregion's infected-host
    field scattered onto the grid.
    """

    factor: float
    source_subregion: int | None = None


HostCompartmentInit = ConstantInit | BumpInit | ScaledInit


@dataclass(frozen=True)
class HostInit:
    susceptible: HostCompartmentInit
    exposed: HostCompartmentInit
    infected: HostCompartmentInit


@dataclass(frozen=True)
class VectorInit:
    susceptible: HostCompartmentInit
    infected: HostCompartmentInit


def _eval_on_cells(init, x, y, mask: Mask | None, susceptible: np.ndarray | None, what: str):
    if isinstance(init, ConstantInit):
        if init.value < 0:
            raise ConfigError(f"{what}: constant initializer must be nonnegative")
        return np.full(x.shape, float(init.value))
    if isinstance(init, BumpInit):
        if mask is not None:
            cx, cy = init.bump.center
            sx, sy = mask.subregion.center
            if (cx - sx) ** 2 + (cy - sy) ** 2 > mask.subregion.radius**2:
                raise ConfigError(
                    f"{what}: bump center {init.bump.center} lies outside "
                    f"subregion {mask.subregion.id}"
                )
        return init.bump.evaluate(x, y)
    if isinstance(init, ScaledInit):
        if init.factor < 0:
            raise ConfigError(f"{what}: scale factor must be nonnegative")
        if susceptible is None:
            raise ConfigError(f"{what}: scaled initializer has no source here")
        return init.factor * susceptible
    raise ConfigError(f"{what}: unknown initializer {init!r}")


def build_initial_state(
    grid: Grid,
    masks: list[Mask],
    vector_init: VectorInit,
    host_inits: dict[int, HostInit],
) -> SimState:
    """State at t = 0 from per-compartment constructors.

    Host fields exist only on their mask cells; the infected-vector field may
    be seeded as a scaled copy of one subregion's infected hosts, scattered to
    the full grid.
    """
    if set(host_inits) != {m.subregion.id for m in masks}:
        raise ConfigError(
            f"host initializers {sorted(host_inits)} do not match subregions "
            f"{sorted(m.subregion.id for m in masks)}"
        )
    xx, yy = grid.meshes()
    hosts: list[HostState] = []
    infected_by_id: dict[int, np.ndarray] = {}
    for mask in masks:
        init = host_inits[mask.subregion.id]
        mx = mask.gather(xx)
        my = mask.gather(yy)
        sid = f"subregion {mask.subregion.id}"
        s = _eval_on_cells(init.susceptible, mx, my, mask, None, f"{sid} susceptible")
        e = _eval_on_cells(init.exposed, mx, my, mask, s, f"{sid} exposed")
        i = _eval_on_cells(init.infected, mx, my, mask, s, f"{sid} infected")
        hosts.append(HostState(s=s, e=e, i=i, vi_integral=np.zeros_like(s)))
        infected_by_id[mask.subregion.id] = i

    vs = _eval_on_cells(vector_init.susceptible, xx, yy, None, None, "vector susceptible")
    vinit = vector_init.infected
    if isinstance(vinit, ScaledInit):
        if vinit.source_subregion not in infected_by_id:
            raise ConfigError(
                f"vector infected: scaled copy names unknown subregion "
                f"{vinit.source_subregion}"
            )
        if vinit.factor < 0:
            raise ConfigError("vector infected: scale factor must be nonnegative")
        mask = next(m for m in masks if m.subregion.id == vinit.source_subregion)
        vi = mask.scatter(vinit.factor * infected_by_id[vinit.source_subregion], grid.shape)
    else:
        vi = _eval_on_cells(vinit, xx, yy, None, None, "vector infected")

    return SimState(t=0.0, vs=vs, vi=vi, hosts=hosts)


def state_totals(state: SimState, grid: Grid, masks: list[Mask]) -> dict[str, float]:
    """Quadrature totals of every compartment (hosts per subregion)."""
    out = {
        "vs": integrate(state.vs, grid),
        "vi": integrate(state.vi, grid),
    }
    area = grid.cell_area
    for mask, host in zip(masks, state.hosts):
        j = mask.subregion.id
        out[f"s_{j}"] = float(host.s.sum()) * area
        out[f"e_{j}"] = float(host.e.sum()) * area
        out[f"i_{j}"] = float(host.i.sum()) * area
    return out
