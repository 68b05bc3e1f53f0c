"""Right-hand-side kernels for the vector population fields.

Every function here is a pure per-cell/per-face kernel over read-only inputs.
Discretization choices: conservative 5-point diffusion with harmonic-mean face
diffusivities and zero-flux outer boundary; first-order upwind advection in
conservative flux form (monotone, hence positivity preserving under the CFL
limit).  Kernels accept optional ``out`` buffers so the time loop can avoid
reallocation; called without them they allocate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, Mask
from .model import ModelParams, SimState


@dataclass(frozen=True)
class FaceDiffusivity:
    """Harmonic-mean diffusivity on cell faces; outer faces carry 0 (zero flux).

    ``tx`` has shape (ny, nx+1) for x-normal faces, ``ty`` (ny+1, nx).
    """

    tx: np.ndarray
    ty: np.ndarray


def harmonic_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    out = np.zeros(np.broadcast(a, b).shape)
    nz = s > 0
    out[nz] = 2.0 * (a * b)[nz] / s[nz]
    return out


def face_diffusivity(d: np.ndarray) -> FaceDiffusivity:
    ny, nx = d.shape
    tx = np.zeros((ny, nx + 1))
    ty = np.zeros((ny + 1, nx))
    tx[:, 1:-1] = harmonic_mean(d[:, :-1], d[:, 1:])
    ty[1:-1, :] = harmonic_mean(d[:-1, :], d[1:, :])
    tx.setflags(write=False)
    ty.setflags(write=False)
    return FaceDiffusivity(tx=tx, ty=ty)


def diffusion_tendency(
    field: np.ndarray,
    faces: FaceDiffusivity,
    h: float,
    out: np.ndarray | None = None,
    work: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Conservative flux divergence of ``D grad field``; zero-flux boundary.

    The tendencies telescope: their grid sum is exactly zero up to roundoff.
    ``work`` may supply two scratch arrays of shapes (ny, nx-1) and (ny-1, nx).
    """
    ny, nx = field.shape
    if out is None:
        out = np.zeros_like(field)
    else:
        out.fill(0.0)
    gx, gy = work if work is not None else (np.empty((ny, nx - 1)), np.empty((ny - 1, nx)))
    np.subtract(field[:, 1:], field[:, :-1], out=gx)
    gx *= faces.tx[:, 1:-1]
    np.subtract(field[1:, :], field[:-1, :], out=gy)
    gy *= faces.ty[1:-1, :]
    out[:, :-1] += gx
    out[:, 1:] -= gx
    out[:-1, :] += gy
    out[1:, :] -= gy
    out *= 1.0 / (h * h)
    return out


def advection_tendency(
    field: np.ndarray,
    velocity: tuple[float, float],
    h: float,
    boundary_mode: str = "outflow",
    out: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """First-order upwind divergence of ``velocity * field`` per cell.

    Returns ``(tendency, outflow_rate)`` where ``outflow_rate`` is the total
    mass per month leaving through the boundary (zero in "zero_flux" mode,
    where boundary faces are closed).  Interior contributions telescope, so
    the grid sum of ``tendency * h^2`` equals ``-outflow_rate``.
    """
    if out is None:
        out = np.zeros_like(field)
    else:
        out.fill(0.0)
    wx, wy = velocity
    open_boundary = boundary_mode == "outflow"
    outflow = 0.0

    if wx != 0.0:
        # upwind face flux: the face between columns i-1 and i carries
        # wx * field[:, i-1] when wx > 0, wx * field[:, i] otherwise
        flux = wx * (field[:, :-1] if wx > 0 else field[:, 1:])
        out[:, :-1] -= flux
        out[:, 1:] += flux
        if open_boundary:
            if wx > 0:
                edge = wx * field[:, -1]
                out[:, -1] -= edge
            else:
                edge = -wx * field[:, 0]
                out[:, 0] -= edge
            outflow += float(edge.sum()) * h
    if wy != 0.0:
        flux = wy * (field[:-1, :] if wy > 0 else field[1:, :])
        out[:-1, :] -= flux
        out[1:, :] += flux
        if open_boundary:
            if wy > 0:
                edge = wy * field[-1, :]
                out[-1, :] -= edge
            else:
                edge = -wy * field[0, :]
                out[0, :] -= edge
            outflow += float(edge.sum()) * h
    out *= 1.0 / h
    return out, outflow


def incidence(
    state: SimState,
    params: ModelParams,
    masks: list[Mask],
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Vector-infection rate field: ``alpha_j * I_j * V_s`` on each subregion,
    zero elsewhere."""
    if out is None:
        out = np.zeros_like(state.vs)
    else:
        out.fill(0.0)
    flat_vs = state.vs.reshape(-1)
    flat_out = out.reshape(-1)
    for mask, host, alpha in zip(masks, state.hosts, params.alpha):
        flat_out[mask.flat] = alpha * host.i * flat_vs[mask.flat]
    return out


def vector_reaction(
    state: SimState,
    params: ModelParams,
    f: np.ndarray,
    out_vs: np.ndarray | None = None,
    out_vi: np.ndarray | None = None,
    work: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise reaction rates for (V_s, V_i).

    dV_s = beta V - m V_s V - f,  dV_i = -m V_i V + f  with V = V_s + V_i.
    The incidence transfer cancels in the sum, leaving the logistic rate
    beta V - m V^2.
    """
    v, mv = work if work is not None else (np.empty_like(state.vs), np.empty_like(state.vs))
    np.add(state.vs, state.vi, out=v)
    np.multiply(params.m, v, out=mv)
    if out_vs is None:
        out_vs = np.empty_like(state.vs)
    if out_vi is None:
        out_vi = np.empty_like(state.vi)
    # out_vi first: it reuses mv as scratch for m V V_i
    np.multiply(mv, state.vi, out=out_vi)
    np.negative(out_vi, out=out_vi)
    out_vi += f
    np.multiply(params.beta, v, out=out_vs)
    mv *= state.vs
    out_vs -= mv
    out_vs -= f
    return out_vs, out_vi
