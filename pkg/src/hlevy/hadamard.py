"""First and second derivatives of ordered eigenvalues in matrix coordinates.

Everything is derived from the basis-free variation formulas for a simple
eigenvalue lambda_m of X = U diag(lambda) U*:

    d lambda_m [Y]      = (U* Y U)_mm = tr(u_m u_m^* Y),
    d^2 lambda_m [Y, Z] = sum_{j != m} 2 Re[(U* Y U)_mj (U* Z U)_jm]
                          / (lambda_m - lambda_j),

evaluated on the coordinate direction matrices. Central finite differences
arbitrate the conventions: the diagonal first partial is |U_km|^2 (not its
doubled variant) and the y-partial carries the sign implied by putting
x + iy in the upper triangle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    SpectralDecomposition,
    coordinate_directions,
    coordinate_weights,
    eig_hermitian,
    frobenius_norm,
    vectorize,
)
from .model import CovarianceOperator

HESSIAN_GAP_RTOL = 1e-9
STENCIL_GAP_FACTOR = 10.0


class GapError(ValueError):
    """Spectrum not simple enough for eigenvalue derivatives."""


class StencilError(RuntimeError):
    """Finite-difference stencil would straddle an eigenvalue near-collision."""


def _require_simple(dec: SpectralDecomposition, what: str) -> None:
    if dec.dim > 1 and dec.min_gap <= dec.gap_tolerance:
        pair = int(np.argmin(dec.gaps))
        raise GapError(
            f"{what} needs a simple spectrum; eigenvalues {pair} and {pair + 1} "
            f"are {dec.min_gap:.3e} apart (tolerance {dec.gap_tolerance:.3e})"
        )


@dataclass(frozen=True)
class EigenGradient:
    """Gradient of the m-th ordered eigenvalue.

    `grad` holds the partials in coordinate order; `matrix_form` is the
    spectral projector u_m u_m^*, whose trace pairing with any Hermitian Y
    gives the directional derivative.
    """

    m: int
    grad: np.ndarray
    matrix_form: np.ndarray


@dataclass(frozen=True)
class EigenSecondDerivatives:
    """Pure second partials of the m-th eigenvalue.

    `d2_xx` covers the x-coordinates (d diagonal entries first, then the
    upper pairs row-major); `d2_yy` covers the y-coordinates in pair order.
    """

    m: int
    d2_xx: np.ndarray
    d2_yy: np.ndarray


def eigenvalue_gradient(dec: SpectralDecomposition, m: int) -> EigenGradient:
    _require_simple(dec, "eigenvalue gradient")
    u = dec.U[:, m]
    from .model import _rank_one

    P = _rank_one(u)
    grad = coordinate_weights(dec.dim) * vectorize(P)
    grad.flags.writeable = False
    return EigenGradient(m=m, grad=grad, matrix_form=P)


def _perturbation_rows(dec: SpectralDecomposition, m: int) -> np.ndarray:
    """Row m of U* D_a U for every coordinate direction D_a; shape (d^2, d)."""
    U = dec.U
    d = dec.dim
    rows = np.empty((d * d, d), dtype=complex)
    conj_um = U[:, m].conj()
    for k in range(d):
        rows[k] = conj_um[k] * U[k, :]
    a = d
    for k in range(d):
        for h in range(k + 1, d):
            s = conj_um[k] * U[h, :]
            t = conj_um[h] * U[k, :]
            rows[a] = s + t
            rows[a + 1] = 1j * (s - t)
            a += 2
    return rows


def eigenvalue_hessian(dec: SpectralDecomposition, m: int) -> np.ndarray:
    """Full d^2 x d^2 coordinate Hessian of the m-th eigenvalue."""
    _require_simple(dec, "eigenvalue Hessian")
    lam = dec.lambdas
    denom = lam[m] - lam
    scale = max(1.0, dec.norm)
    small = np.abs(denom) <= HESSIAN_GAP_RTOL * scale
    small[m] = False
    if np.any(small):
        j = int(np.flatnonzero(small)[0])
        raise GapError(
            f"eigenvalue Hessian denominator collapses: |lambda_{m} - lambda_{j}| "
            f"= {abs(denom[j]):.3e} below {HESSIAN_GAP_RTOL * scale:.3e}"
        )
    g = np.zeros(dec.dim)
    mask = np.arange(dec.dim) != m
    g[mask] = 1.0 / denom[mask]
    V = _perturbation_rows(dec, m)
    H = 2.0 * ((V * g) @ V.conj().T).real
    return (H + H.T) / 2.0


def eigenvalue_second_partials(dec: SpectralDecomposition, m: int) -> EigenSecondDerivatives:
    H = eigenvalue_hessian(dec, m)
    diag = H.diagonal()
    d = dec.dim
    d2_xx = np.concatenate([diag[:d], diag[d::2]])
    d2_yy = diag[d + 1 :: 2].copy()
    return EigenSecondDerivatives(m=m, d2_xx=d2_xx, d2_yy=d2_yy)


def drift_term(dec: SpectralDecomposition, cov: CovarianceOperator, m: int) -> float:
    """Ito drift of the m-th eigenvalue: half the covariance-contracted Hessian.

    For the gue(sigma2) operator this reduces to
    sigma2 * sum_{j != m} 1 / (lambda_m - lambda_j).
    """
    if cov.is_zero:
        return 0.0
    H = eigenvalue_hessian(dec, m)
    return 0.5 * float(np.sum(cov.matrix * H))


def gue_drift_closed_form(dec: SpectralDecomposition, sigma2: float, m: int) -> float:
    lam = dec.lambdas
    mask = np.arange(lam.size) != m
    return sigma2 * float(np.sum(1.0 / (lam[m] - lam[mask])))


@dataclass(frozen=True)
class FDReport:
    """Central-difference verification of the first and second partials."""

    m: int
    h: float
    grad_err: float
    grad_err_fine: float
    grad_order: float
    hess_err: float
    hess_err_fine: float
    hess_order: float
    scale: float

    @property
    def order_estimate(self) -> float:
        return self.grad_order


def _lambda_at(X: np.ndarray, m: int) -> float:
    return float(eig_hermitian(X).lambdas[m])


def fd_check(X: np.ndarray, m: int, h: float) -> FDReport:
    """Compare analytic partials with central differences at steps (h, h/10).

    Gradients are differenced at h and h/10; the pure second partials at
    10h and h. Raises StencilError when the smallest gap is within reach of
    the widest stencil (10h times the direction norm).
    """
    dec = eig_hermitian(X)
    _require_simple(dec, "finite-difference check")
    scale = max(1.0, frobenius_norm(X))
    h_hess = 10.0 * h
    # crossing risk tracks the absolute stencil excursion, not ||X||
    if dec.min_gap <= STENCIL_GAP_FACTOR * h_hess:
        raise StencilError(
            f"minimum gap {dec.min_gap:.3e} is inside the stencil guard "
            f"{STENCIL_GAP_FACTOR * h_hess:.3e} at step {h:.1e}"
        )
    d = dec.dim
    grad = eigenvalue_gradient(dec, m).grad
    hess_diag = eigenvalue_hessian(dec, m).diagonal()
    lam0 = float(dec.lambdas[m])
    dirs = coordinate_directions(d)

    grad_errs = np.empty((2, d * d))
    hess_errs = np.empty((2, d * d))
    for a in range(d * d):
        D = dirs[a]
        vals = {}
        for step in (h, h / 10.0, h_hess):
            vals[step] = (_lambda_at(X + step * D, m), _lambda_at(X - step * D, m))
        for row, step in enumerate((h, h / 10.0)):
            up, dn = vals[step]
            grad_errs[row, a] = abs((up - dn) / (2.0 * step) - grad[a])
        for row, step in enumerate((h_hess, h)):
            up, dn = vals[step]
            hess_errs[row, a] = abs((up - 2.0 * lam0 + dn) / (step * step) - hess_diag[a])

    ge, gef = float(grad_errs[0].max()), float(grad_errs[1].max())
    he, hef = float(hess_errs[0].max()), float(hess_errs[1].max())
    return FDReport(
        m=m,
        h=h,
        grad_err=ge,
        grad_err_fine=gef,
        grad_order=float(np.log10(ge / gef)) if gef > 0 else float("inf"),
        hess_err=he,
        hess_err_fine=hef,
        hess_order=float(np.log10(he / hef)) if hef > 0 else float("inf"),
        scale=scale,
    )
