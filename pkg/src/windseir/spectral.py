"""Principal eigenvalue of ``u -> div(D grad u) + beta u`` with Dirichlet
boundary on a masked region, and the vector-persistence criterion.

The Dirichlet condition places the zero on the faces between mask cells and
outside cells (half-cell transmissibility ``2 D / h^2``), which keeps the
eigenvalue error second order in h.  The operator is symmetric, so a shifted
power iteration on ``T + s I`` with ``s = 8 D_max / h^2 + beta_max`` converges
to the largest eigenvalue: the shifted operator is entrywise nonnegative and
positive semidefinite, and on a connected mask the limit eigenfunction is
strictly positive (Perron-Frobenius).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .grid import Grid, Mask
from .vectors import harmonic_mean


@dataclass(frozen=True)
class DirichletOperator:
    """Matrix-free discretization of T on one mask."""

    tx: np.ndarray  # (ny, nx+1) face transmissibilities (D units)
    ty: np.ndarray  # (ny+1, nx)
    beta: np.ndarray
    inside: np.ndarray  # float 0/1
    h: float

    def apply(self, u: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """T u, zero outside the mask (u must vanish there already)."""
        ny, nx = u.shape
        gx = np.zeros((ny, nx + 1))
        gx[:, 1:-1] = u[:, 1:] - u[:, :-1]
        gx[:, 0] = u[:, 0]
        gx[:, -1] = -u[:, -1]
        gx *= self.tx
        gy = np.zeros((ny + 1, nx))
        gy[1:-1, :] = u[1:, :] - u[:-1, :]
        gy[0, :] = u[0, :]
        gy[-1, :] = -u[-1, :]
        gy *= self.ty
        if out is None:
            out = np.empty_like(u)
        np.subtract(gx[:, 1:], gx[:, :-1], out=out)
        out += gy[1:, :]
        out -= gy[:-1, :]
        out *= 1.0 / (self.h * self.h)
        out += self.beta * u
        out *= self.inside
        return out


def dirichlet_operator(d: np.ndarray, beta: np.ndarray, mask: Mask, h: float) -> DirichletOperator:
    inside = mask.inside
    ny, nx = inside.shape
    insf = inside.astype(float)

    def face_t(d_a, d_b, in_a, in_b):
        both = in_a & in_b
        only_a = in_a & ~in_b
        only_b = in_b & ~in_a
        t = np.zeros(d_a.shape)
        t[both] = harmonic_mean(d_a[both], d_b[both])
        t[only_a] = 2.0 * d_a[only_a]
        t[only_b] = 2.0 * d_b[only_b]
        return t

    tx = np.zeros((ny, nx + 1))
    tx[:, 1:-1] = face_t(d[:, :-1], d[:, 1:], inside[:, :-1], inside[:, 1:])
    tx[:, 0] = 2.0 * d[:, 0] * insf[:, 0]
    tx[:, -1] = 2.0 * d[:, -1] * insf[:, -1]
    ty = np.zeros((ny + 1, nx))
    ty[1:-1, :] = face_t(d[:-1, :], d[1:, :], inside[:-1, :], inside[1:, :])
    ty[0, :] = 2.0 * d[0, :] * insf[0, :]
    ty[-1, :] = 2.0 * d[-1, :] * insf[-1, :]
    return DirichletOperator(tx=tx, ty=ty, beta=beta, inside=insf, h=h)


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    eigenfunction: np.ndarray  # unit discrete L2 norm, zero off the mask
    iterations: int
    residual: float  # discrete L2 norm of T u - lambda1 u


def rayleigh_quotient(u: np.ndarray, d: np.ndarray, beta: np.ndarray, mask: Mask, h: float) -> float:
    """Discrete quotient <u, T u> / <u, u>; maximal at the principal
    eigenfunction.  Values off the mask are ignored (treated as zero)."""
    op = dirichlet_operator(d, beta, mask, h)
    uu = u * mask.inside
    denom = float((uu * uu).sum())
    if denom == 0.0:
        raise ValueError("rayleigh_quotient of the zero function")
    return float((uu * op.apply(uu)).sum()) / denom


def principal_eigenvalue(
    d: np.ndarray,
    beta: np.ndarray,
    mask: Mask,
    h: float,
    tol: float = 1e-8,
    max_iter: int = 2_000_000,
) -> EigenResult:
    """Largest eigenvalue of the Dirichlet operator via shifted power
    iteration; stops when the Rayleigh quotient changes by less than ``tol``.

    Raises ConvergenceError after ``max_iter`` iterations.
    """
    op = dirichlet_operator(d, beta, mask, h)
    shift = 8.0 * float(d.max()) / (h * h) + max(float(beta.max()), 0.0)
    u = mask.inside.astype(float)
    u /= math.sqrt(float((u * u).sum()))
    w = np.empty_like(u)
    rq_prev = math.inf
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        op.apply(u, out=w)
        w += shift * u
        rq = float((u * w).sum()) - shift
        norm = math.sqrt(float((w * w).sum()))
        if norm == 0.0:
            raise ConvergenceError("power iteration collapsed to the zero vector")
        np.divide(w, norm, out=u)
        if abs(rq - rq_prev) <= tol:
            converged = True
            break
        rq_prev = rq
    if not converged:
        raise ConvergenceError(
            f"power iteration did not converge within {max_iter} iterations "
            f"(last Rayleigh-quotient change {abs(rq - rq_prev):.3e})"
        )
    if float(u.sum()) < 0:
        u = -u
    lam = float((u * op.apply(u)).sum()) / float((u * u).sum())
    eigenfunction = u / h  # unit vector norm -> unit discrete L2 norm
    resid_field = op.apply(eigenfunction) - lam * eigenfunction
    residual = h * math.sqrt(float((resid_field * resid_field).sum()))
    return EigenResult(
        lambda1=lam, eigenfunction=eigenfunction, iterations=iterations, residual=residual
    )


@dataclass(frozen=True)
class PersistenceCheck:
    lhs: float  # domain integral of beta
    rhs: float  # pi^2 D_max / 2
    satisfied: bool  # strict inequality


def persistence_criterion(beta: np.ndarray, grid: Grid, d_max: float) -> PersistenceCheck:
    """Sufficient condition for vector persistence without wind: the domain
    integral of the birth rate must exceed ``pi^2 D_max / 2``."""
    if float(beta.min()) < 0:
        raise ValueError("persistence criterion requires beta >= 0")
    lhs = float(beta.sum()) * grid.cell_area
    rhs = math.pi**2 * d_max / 2.0
    return PersistenceCheck(lhs=lhs, rhs=rhs, satisfied=lhs > rhs)


def gradient_l2_norm(values: np.ndarray, h: float) -> float:
    """Discrete L2 norm of the gradient of a sampled field (central
    differences, one-sided at the boundary)."""
    gy, gx = np.gradient(values, h)
    return math.sqrt(float((gx * gx + gy * gy).sum()) * h * h)
