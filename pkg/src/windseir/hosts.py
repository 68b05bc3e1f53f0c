"""Per-subregion SEIR right-hand sides for the confined host populations.

Hosts never leave their disk: in diffusive mode the masked stencil treats
every face on the mask boundary as zero-flux, so each increment conserves the
mask total exactly.  In non-diffusive mode the susceptible equation has the
closed-form solution S(x,t) = S0(x) exp(-sigma(x) * int_0^t V_i(x,.)), used as
an oracle against the stepped field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Mask
from .vectors import harmonic_mean


def host_reaction(
    s: np.ndarray,
    e: np.ndarray,
    i: np.ndarray,
    vi_cells: np.ndarray,
    sigma: np.ndarray,
    lam: float,
    delta: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise SEIR rates on one subregion's mask cells.

    dS = -sigma S V_i, dE = sigma S V_i - lam E, dI = lam E - delta I.
    The compartment identity dS + dE + dI = -delta I holds exactly.
    """
    infection = sigma * s * vi_cells
    incubated = lam * e
    ds = -infection
    de = infection - incubated
    di = incubated - delta * i
    return ds, de, di


@dataclass(frozen=True)
class MaskStencil:
    """Interior faces of one mask: pairs of adjacent in-mask cell positions.

    ``ia``/``ib`` index into the mask-cell (1-D) arrays.  Faces that would
    cross the mask boundary are simply absent, which is the zero-flux
    (confinement) condition.
    """

    ia: np.ndarray
    ib: np.ndarray


def mask_stencil(mask: Mask) -> MaskStencil:
    inside = mask.inside
    ny, nx = inside.shape
    pos = np.full(ny * nx, -1, dtype=np.int64)
    pos[mask.flat] = np.arange(mask.count)
    pos = pos.reshape(ny, nx)

    pair_x = inside[:, :-1] & inside[:, 1:]
    pair_y = inside[:-1, :] & inside[1:, :]
    ia = np.concatenate([pos[:, :-1][pair_x], pos[:-1, :][pair_y]])
    ib = np.concatenate([pos[:, 1:][pair_x], pos[1:, :][pair_y]])
    ia.setflags(write=False)
    ib.setflags(write=False)
    return MaskStencil(ia=ia, ib=ib)


def masked_diffusion_tendency(
    values: np.ndarray,
    stencil: MaskStencil,
    d_cells: np.ndarray,
    h: float,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Conservative diffusion restricted to a mask; mask total of the result
    is zero to roundoff."""
    if out is None:
        out = np.zeros_like(values)
    else:
        out.fill(0.0)
    d_face = harmonic_mean(d_cells[stencil.ia], d_cells[stencil.ib])
    q = d_face * (values[stencil.ib] - values[stencil.ia]) / (h * h)
    np.add.at(out, stencil.ia, q)
    np.subtract.at(out, stencil.ib, q)
    return out


def closed_form_susceptibles(
    s0: np.ndarray,
    sigma: np.ndarray,
    vi_integral: np.ndarray,
) -> np.ndarray:
    """Exact-in-time susceptible field for the non-diffusive model, given the
    accumulated time integral of V_i on the mask cells."""
    return s0 * np.exp(-sigma * vi_integral)
