"""Complex Hermitian linear algebra with a deterministic spectral decomposition.

Matrices are plain complex numpy arrays; `hermitian_matrix` validates and
exactly symmetrizes input, and every other routine assumes exact Hermitian
symmetry. The real-coordinate layout used throughout the package is

    (x_11, ..., x_dd, x_12, y_12, x_13, y_13, ..., x_(d-1)d, y_(d-1)d)

where the upper-triangle entry (i < j) of the matrix is x_ij + 1j*y_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITIAN_ATOL = 1e-14
PIVOT_TOL = 1e-12
GAP_RTOL = 1e-9
_JACOBI_OFF_RTOL = 1e-14
_JACOBI_MAX_SWEEPS = 64


class ConvergenceError(RuntimeError):
    """Eigensolver failed to reach the off-diagonal threshold."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def hermitian_matrix(entries) -> np.ndarray:
    """Validate and exactly symmetrize a d x d Hermitian matrix.

    Raises ValueError if the input is not square, not finite, or deviates
    from Hermitian symmetry by more than 1e-14 in any entry. The returned
    array is exactly Hermitian (bitwise) and read-only.
    """
    X = np.asarray(entries, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X.view(float))):
        raise ValueError("matrix entries must be finite")
    dev = np.max(np.abs(X - X.conj().T))
    if dev > HERMITIAN_ATOL:
        raise ValueError(f"matrix is not Hermitian: max |X - X*| = {dev:.3e} > {HERMITIAN_ATOL:.0e}")
    return _symmetrize(X)


def _symmetrize(X: np.ndarray) -> np.ndarray:
    # (X + X*)/2 assembled so the result is Hermitian bit-for-bit.
    S = (X + X.conj().T) / 2.0
    U = np.triu(S, 1)
    M = U + U.conj().T + np.diag(S.diagonal().real)
    M.flags.writeable = False
    return M


@lru_cache(maxsize=64)
def _pair_indices(d: int):
    iu = np.triu_indices(d, 1)  # row-major over i < j
    return iu[0].copy(), iu[1].copy()


@lru_cache(maxsize=64)
def coordinate_weights(d: int) -> np.ndarray:
    """Pairing weights: tr(XY) = sum_a w_a * xhat_a * yhat_a (1 diag, 2 off-diag)."""
    w = np.full(d * d, 2.0)
    w[:d] = 1.0
    w.flags.writeable = False
    return w


@lru_cache(maxsize=16)
def coordinate_directions(d: int) -> np.ndarray:
    """Hermitian direction matrices D_a with X = sum_a xhat_a * D_a.

    Order matches `vectorize`: E_kk for the diagonals, then E_kh + E_hk and
    1j*(E_kh - E_hk) for each pair k < h in row-major order.
    """
    out = np.zeros((d * d, d, d), dtype=complex)
    for k in range(d):
        out[k, k, k] = 1.0
    rows, cols = _pair_indices(d)
    for p, (k, h) in enumerate(zip(rows, cols)):
        a = d + 2 * p
        out[a, k, h] = 1.0
        out[a, h, k] = 1.0
        out[a + 1, k, h] = 1.0j
        out[a + 1, h, k] = -1.0j
    out.flags.writeable = False
    return out


def dual_basis(d: int) -> np.ndarray:
    """Basis dual to the coordinates under the trace pairing: tr(B_a X) = xhat_a."""
    B = coordinate_directions(d) / coordinate_weights(d)[:, None, None]
    B.flags.writeable = False
    return B


def vectorize(X: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix: diagonals, then (x_ij, y_ij) for i<j."""
    d = X.shape[0]
    rows, cols = _pair_indices(d)
    v = np.empty(d * d)
    v[:d] = X.diagonal().real
    upper = X[rows, cols]
    v[d::2] = upper.real
    v[d + 1 :: 2] = upper.imag
    return v


def devectorize(v) -> np.ndarray:
    """Exact inverse of `vectorize`. Rejects lengths that are not perfect squares."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a flat coordinate vector")
    d = math.isqrt(v.size)
    if d * d != v.size or d < 1:
        raise ValueError(f"coordinate vector length {v.size} is not a positive perfect square")
    X = np.zeros((d, d), dtype=complex)
    X[np.diag_indices(d)] = v[:d]
    rows, cols = _pair_indices(d)
    upper = v[d::2] + 1j * v[d + 1 :: 2]
    X[rows, cols] = upper
    X[cols, rows] = upper.conj()
    X.flags.writeable = False
    return X


def frobenius_norm(X: np.ndarray) -> float:
    """sqrt(tr(X*X)); equals the weighted coordinate norm sum x_ii^2 + 2 sum (x_ij^2 + y_ij^2)."""
    return float(np.linalg.norm(X))


def trace_inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Real trace pairing tr(XY); equals the coordinate dot product with off-diagonal weight 2."""
    _check_same_dim(X, Y)
    return float(np.einsum("ij,ji->", X, Y).real)


def commutator_norm(X: np.ndarray, Y: np.ndarray) -> float:
    """Frobenius norm of XY - YX."""
    _check_same_dim(X, Y)
    return float(np.linalg.norm(X @ Y - Y @ X))


def numerical_rank(X: np.ndarray, tol: float) -> int:
    """Number of eigenvalues with |lambda| > tol * max(1, ||X||_F)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = eig_hermitian(X).lambdas
    return int(np.sum(np.abs(lam) > tol * max(1.0, frobenius_norm(X))))


def _check_same_dim(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ordered eigensystem U diag(lambdas) U* with a deterministic phase convention.

    lambdas are descending; each column of U is phased so its pivot entry
    (row m for column m, or the largest-modulus row when |U[m, m]| < 1e-12,
    in which case `vg_fallback` is set) is real and nonnegative. `simple` is
    true when the smallest gap exceeds 1e-9 * max(1, ||X||_F) = the stored
    `gap_tolerance`.
    """

    lambdas: np.ndarray
    U: np.ndarray
    gaps: np.ndarray
    simple: bool
    vg_fallback: bool
    norm: float
    gap_tolerance: float

    @property
    def dim(self) -> int:
        return self.lambdas.size

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min()) if self.gaps.size else math.inf

    def eigenvector(self, m: int) -> np.ndarray:
        return self.U[:, m]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.lambdas) @ self.U.conj().T


def eig_hermitian(X: np.ndarray) -> SpectralDecomposition:
    """Spectral decomposition by cyclic complex Jacobi rotations.

    Deterministic for identical input: fixed sweep order, off-diagonal
    threshold 1e-14 * max(1, ||X||_F), at most 64 sweeps. Raises
    ConvergenceError (carrying the residual off-norm) if the threshold is
    not reached.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    d = X.shape[0]
    fro = float(np.linalg.norm(X))
    scale = max(1.0, fro)
    A = np.array((X + X.conj().T) / 2.0, dtype=complex)
    V = np.eye(d, dtype=complex)

    if d == 2:
        w, V = _eig2(A, _JACOBI_OFF_RTOL * scale)
    else:
        if d > 2:
            threshold = _JACOBI_OFF_RTOL * scale
            skip = threshold / (d * d)
            rows, cols = _pair_indices(d)
            for _ in range(_JACOBI_MAX_SWEEPS):
                off = math.sqrt(2.0 * float(np.sum(np.abs(A[rows, cols]) ** 2)))
                if off <= threshold:
                    break
                for p in range(d - 1):
                    for q in range(p + 1, d):
                        if abs(A[p, q]) > skip:
                            _rotate(A, V, p, q)
            else:
                off = math.sqrt(2.0 * float(np.sum(np.abs(A[rows, cols]) ** 2)))
                if off > threshold:
                    raise ConvergenceError(
                        f"Jacobi sweeps exhausted with off-diagonal norm {off:.3e}", residual=off
                    )
        w = A.diagonal().real.copy()
    order = _descending_order(w, V)
    lambdas = w[order]
    U = V[:, order]
    vg_fallback = _phase_normalize(U)
    gaps = lambdas[:-1] - lambdas[1:] if d > 1 else np.empty(0)
    gap_tol = GAP_RTOL * scale
    simple = bool(gaps.min() > gap_tol) if d > 1 else True
    for arr in (lambdas, U, gaps):
        arr.flags.writeable = False
    return SpectralDecomposition(
        lambdas=lambdas,
        U=U,
        gaps=gaps,
        simple=simple,
        vg_fallback=vg_fallback,
        norm=fro,
        gap_tolerance=gap_tol,
    )


def _eig2(A: np.ndarray, threshold: float):
    # the single Jacobi rotation is exact for d = 2; scalar arithmetic only
    a = A[0, 0].real
    b = A[1, 1].real
    apq = complex(A[0, 1])
    r = abs(apq)
    if r <= threshold:
        return np.array([a, b]), np.eye(2, dtype=complex)
    alpha = apq / r
    tau = (b - a) / (2.0 * r)
    if tau == 0.0:
        t = 1.0
    else:
        t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    w = np.array([a - t * r, b + t * r])
    ac = alpha.conjugate()
    V = np.array([[c + 0j, s + 0j], [-s * ac, c * ac]])
    return w, V


def _rotate(A: np.ndarray, V: np.ndarray, p: int, q: int) -> None:
    apq = A[p, q]
    r = abs(apq)
    if r == 0.0:
        return
    alpha = apq / r  # unit phase of the pivot entry
    tau = (A[q, q].real - A[p, p].real) / (2.0 * r)
    if tau == 0.0:
        t = 1.0
    else:
        t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
    c = 1.0 / math.hypot(1.0, t)
    s = t * c
    ca = s * alpha.conjugate()
    # A <- W* A W with W the complex rotation on the (p, q) plane.
    Ap = A[:, p].copy()
    Aq = A[:, q].copy()
    A[:, p] = c * Ap - ca * Aq
    A[:, q] = s * Ap + c * alpha.conjugate() * Aq
    Rp = A[p, :].copy()
    Rq = A[q, :].copy()
    A[p, :] = c * Rp - s * alpha * Rq
    A[q, :] = s * Rp + c * alpha * Rq
    A[p, q] = 0.0
    A[q, p] = 0.0
    A[p, p] = A[p, p].real
    A[q, q] = A[q, q].real
    Vp = V[:, p].copy()
    Vq = V[:, q].copy()
    V[:, p] = c * Vp - ca * Vq
    V[:, q] = s * Vp + c * alpha.conjugate() * Vq


def _descending_order(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    order = np.argsort(-w, kind="stable")
    # Exact ties are ordered by the row index of the column's largest entry.
    i = 0
    d = w.size
    while i < d - 1:
        j = i + 1
        while j < d and w[order[j]] == w[order[i]]:
            j += 1
        if j - i > 1:
            tied = sorted(order[i:j], key=lambda k: int(np.argmax(np.abs(V[:, k]))))
            order[i:j] = tied
        i = j
    return order


def _phase_normalize(U: np.ndarray) -> bool:
    fallback = False
    d = U.shape[0]
    for m in range(d):
        pivot = U[m, m]
        if abs(pivot) < PIVOT_TOL:
            fallback = True
            pivot = U[int(np.argmax(np.abs(U[:, m]))), m]
            if pivot == 0.0:
                continue
        U[:, m] *= pivot.conjugate() / abs(pivot)
    return fallback
