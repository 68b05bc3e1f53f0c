"""Bundled bluetongue scenarios.

Three sheep sites sit on the line y = 30 km: disks of radius 5 km centered at
x = 25, 50 and 125 km.  Infection starts only in the first site; uninfected
midges are uniform at carrying capacity (1000 per km^2).  The presets differ
only in the wind-driven transport speed of the midges:

* ``bluetongue_c0``  - no wind; all three sites present.
* ``bluetongue_c10`` - 10 km/month toward +x; sites at x = 25 and 50.
* ``bluetongue_c20`` - 20 km/month toward +x; sites at x = 25 and 125.

Shared coefficients: midge diffusion 1 km^2/month, birth 1/month, logistic
mortality 1/1000 km^2/(month*midge); sheep infection rate 1.0 per infected
midge, midge infection rate 0.005 per infected sheep; incubation exit
4/month, removal 1/month.  Hosts do not diffuse.
"""

from __future__ import annotations

from .config import (
    DiagnosticsConfig,
    InitialConfig,
    OutputConfig,
    ParamsConfig,
    ScenarioConfig,
)
from .errors import ConfigError
from .grid import DomainSpec, SubregionSpec
from .model import BumpInit, ConstantInit, GaussianBump, HostInit, ScaledInit, VectorInit
from .solver import SolverConfig

SITE_CENTERS = {1: (25.0, 30.0), 2: (50.0, 30.0), 3: (125.0, 30.0)}
SITE_RADIUS = 5.0


def _site(jid: int) -> SubregionSpec:
    return SubregionSpec(id=jid, center=SITE_CENTERS[jid], radius=SITE_RADIUS)


def _seed_site() -> HostInit:
    """First site: bump of 30/km^2 with 1% already exposed and infected."""
    return HostInit(
        susceptible=BumpInit(GaussianBump(amplitude=30.0, center=SITE_CENTERS[1], width=1.0)),
        exposed=ScaledInit(0.01),
        infected=ScaledInit(0.01),
    )


def _clean_site(jid: int) -> HostInit:
    return HostInit(
        susceptible=BumpInit(GaussianBump(amplitude=31.0, center=SITE_CENTERS[jid], width=1.0)),
        exposed=ConstantInit(0.0),
        infected=ConstantInit(0.0),
    )


def _preset(
    name: str,
    speed: float,
    site_ids: tuple[int, ...],
    snapshot_times: tuple[float, ...],
    description: str,
) -> ScenarioConfig:
    hosts = {1: _seed_site()}
    for jid in site_ids:
        if jid != 1:
            hosts[jid] = _clean_site(jid)
    return ScenarioConfig(
        name=name,
        description=description,
        domain=DomainSpec(
            origin=(0.0, 0.0), extent=(150.0, 60.0), cell_size=0.5, boundary_mode="outflow"
        ),
        subregions=tuple(_site(j) for j in site_ids),
        params=ParamsConfig(
            vector_diffusion=1.0,
            transport_velocity=(speed, 0.0),
            vector_birth=1.0,
            vector_mortality=1e-3,
            host_infection=1.0,
            vector_infection=5e-3,
            incubation_exit=4.0,
            removal=1.0,
            host_mode="nondiffusive",
        ),
        initial=InitialConfig(
            vector=VectorInit(
                susceptible=ConstantInit(1000.0),
                infected=ScaledInit(factor=1.0, source_subregion=1),
            ),
            hosts=hosts,
        ),
        solver=SolverConfig(t_end=12.0, dt_max=0.05, cfl_safety=0.9, output_stride=25),
        diagnostics=DiagnosticsConfig(outbreak_threshold=1.0, policy="abort"),
        output=OutputConfig(
            directory=name,
            snapshot_times=snapshot_times,
            snapshot_fields=("vector_infected", "host_susceptible"),
        ),
    )


def _build_presets() -> dict[str, ScenarioConfig]:
    return {
        "bluetongue_c0": _preset(
            "bluetongue_c0",
            0.0,
            (1, 2, 3),
            (0.0, 0.5, 1.0, 2.0, 6.0, 12.0),
            "no wind: the epidemic stays in the first site",
        ),
        "bluetongue_c10": _preset(
            "bluetongue_c10",
            10.0,
            (1, 2),
            (0.0, 2.0, 4.0, 5.0, 6.0, 10.0),
            "10 km/month wind carries infected midges to the site at x=50",
        ),
        "bluetongue_c20": _preset(
            "bluetongue_c20",
            20.0,
            (1, 3),
            (0.0, 3.0, 5.0, 6.0, 8.0, 10.0),
            "20 km/month wind carries infected midges to the site at x=125",
        ),
    }


PRESET_NAMES = tuple(sorted(_build_presets()))


def preset_config(name: str) -> ScenarioConfig:
    presets = _build_presets()
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}")
    return presets[name]
