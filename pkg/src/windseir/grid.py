"""Truncated rectangular domain, uniform cell-centered grid, and disk subregions.

All geometry is in kilometers.  Arrays are indexed ``[iy, ix]`` so a row of a
field corresponds to a horizontal line of cells; cell ``(iy, ix)`` is centered
at ``(x0 + (ix + 1/2) h, y0 + (iy + 1/2) h)``.  Grids and masks are immutable
after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

BOUNDARY_MODES = ("outflow", "zero_flux")


@dataclass(frozen=True)
class DomainSpec:
    """Rectangle ``[x0, x0+Lx] x [y0, y0+Ly]`` discretized with square cells.

    ``boundary_mode`` controls advective transport at the outer boundary:
    "outflow" lets mass leave through downwind faces (nothing enters),
    "zero_flux" closes the boundary completely.  Diffusion is always
    zero-flux at the outer boundary.
    """

    origin: tuple[float, float] = (0.0, 0.0)
    extent: tuple[float, float] = (150.0, 60.0)
    cell_size: float = 0.5
    boundary_mode: str = "outflow"


@dataclass(frozen=True)
class SubregionSpec:
    """Closed disk habitat for one host population."""

    id: int
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    cell_size: float
    origin: tuple[float, float]
    boundary_mode: str = "outflow"
    x_centers: np.ndarray = field(repr=False, compare=False, default=None)
    y_centers: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def extent(self) -> tuple[float, float]:
        return (self.nx * self.cell_size, self.ny * self.cell_size)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays (X, Y), each of shape (ny, nx)."""
        return np.meshgrid(self.x_centers, self.y_centers)


@dataclass(frozen=True)
class Mask:
    """Cells whose centers lie inside one subregion."""

    subregion: SubregionSpec
    inside: np.ndarray = field(repr=False, compare=False)
    flat: np.ndarray = field(repr=False, compare=False)  # flat indices, sorted

    @property
    def count(self) -> int:
        return self.flat.size

    def gather(self, grid_values: np.ndarray) -> np.ndarray:
        """Values of a full-grid field at the mask cells (1-D)."""
        return grid_values.reshape(-1)[self.flat]

    def scatter(self, cell_values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
        """Full-grid field equal to ``cell_values`` on the mask, 0 elsewhere."""
        out = np.zeros(shape[0] * shape[1])
        out[self.flat] = cell_values
        return out.reshape(shape)


def _cells_along(extent: float, h: float, axis: str) -> int:
    n = extent / h
    n_round = round(n)
    if n_round < 1 or abs(n - n_round) > 1e-9 * max(1.0, n):
        raise ConfigError(
            f"domain extent {extent} km along {axis} is not an integer "
            f"multiple of cell size {h} km"
        )
    return int(n_round)


def build_grid(spec: DomainSpec) -> Grid:
    """Build the uniform grid; rejects non-divisible extents and tiny grids."""
    if spec.cell_size <= 0:
        raise ConfigError(f"cell size must be positive, got {spec.cell_size}")
    if spec.boundary_mode not in BOUNDARY_MODES:
        raise ConfigError(
            f"boundary_mode must be one of {BOUNDARY_MODES}, got {spec.boundary_mode!r}"
        )
    if spec.extent[0] <= 0 or spec.extent[1] <= 0:
        raise ConfigError(f"domain extent must be positive, got {spec.extent}")
    nx = _cells_along(spec.extent[0], spec.cell_size, "x")
    ny = _cells_along(spec.extent[1], spec.cell_size, "y")
    if nx < 2 or ny < 2:
        raise ConfigError(f"grid must have at least 2 cells per axis, got {nx}x{ny}")
    h = spec.cell_size
    x0, y0 = spec.origin
    x = x0 + h * (np.arange(nx) + 0.5)
    y = y0 + h * (np.arange(ny) + 0.5)
    x.setflags(write=False)
    y.setflags(write=False)
    return Grid(
        nx=nx,
        ny=ny,
        cell_size=h,
        origin=spec.origin,
        boundary_mode=spec.boundary_mode,
        x_centers=x,
        y_centers=y,
    )


def check_subregions(grid: Grid, subs: list[SubregionSpec]) -> None:
    """Validate disjointness and containment of the host disks.

    Disks must be pairwise separated (positive boundary gap) and must sit at
    least two cells away from the outer boundary so masked dynamics never
    touch the domain edge.
    """
    ids = [s.id for s in subs]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"subregion ids must be unique, got {ids}")
    h = grid.cell_size
    x0, y0 = grid.origin
    x1 = x0 + grid.nx * h
    y1 = y0 + grid.ny * h
    for s in subs:
        if s.radius <= 0:
            raise ConfigError(f"subregion {s.id}: radius must be positive")
        cx, cy = s.center
        margin = s.radius + 2.0 * h
        if not (x0 + margin <= cx <= x1 - margin and y0 + margin <= cy <= y1 - margin):
            raise ConfigError(
                f"subregion {s.id} must lie inside the domain with a margin of "
                f"two cells beyond its radius"
            )
    for i, a in enumerate(subs):
        for b in subs[i + 1 :]:
            gap = float(np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1]))
            if gap <= a.radius + b.radius:
                raise ConfigError(
                    f"subregions {a.id} and {b.id} must be separated "
                    f"(center distance {gap:.3f} <= sum of radii)"
                )


def build_mask(grid: Grid, sub: SubregionSpec) -> Mask:
    """Cells whose centers lie within ``sub.radius`` of the disk center."""
    xx, yy = grid.meshes()
    inside = (xx - sub.center[0]) ** 2 + (yy - sub.center[1]) ** 2 <= sub.radius**2
    flat = np.flatnonzero(inside.reshape(-1))
    if flat.size == 0:
        raise ConfigError(
            f"subregion {sub.id} (radius {sub.radius} km) contains no cell "
            f"centers at cell size {grid.cell_size} km"
        )
    inside.setflags(write=False)
    flat.setflags(write=False)
    return Mask(subregion=sub, inside=inside, flat=flat)


def build_masks(grid: Grid, subs: list[SubregionSpec]) -> list[Mask]:
    check_subregions(grid, subs)
    return [build_mask(grid, s) for s in subs]


def full_mask(grid: Grid) -> Mask:
    """Mask covering every cell; lets whole-domain computations reuse the
    masked code paths (e.g. Dirichlet eigenproblems on the full rectangle)."""
    inside = np.ones(grid.shape, dtype=bool)
    flat = np.arange(grid.nx * grid.ny)
    x0, y0 = grid.origin
    lx, ly = grid.extent
    sub = SubregionSpec(
        id=0,
        center=(x0 + lx / 2.0, y0 + ly / 2.0),
        radius=float(np.hypot(lx, ly)) / 2.0,
    )
    inside.setflags(write=False)
    flat.setflags(write=False)
    return Mask(subregion=sub, inside=inside, flat=flat)


def integrate(values: np.ndarray, grid: Grid, mask: Mask | None = None) -> float:
    """Midpoint quadrature: sum of cell values times cell area.

    With a mask, only masked cells contribute.  ``values`` must live on
    ``grid``.
    """
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    if mask is None:
        return float(values.sum()) * grid.cell_area
    return float(values.reshape(-1)[mask.flat].sum()) * grid.cell_area
