"""Ordered eigenvalues and coherently phased eigenvector frames along a path.

At a jump time the path contributes two rows: the left limit (is_pre) and
the post-jump state. Frames are phase-aligned between consecutive
continuous rows only; across a jump the post frame starts fresh, since a
phase relation through the discontinuity would be meaningless. Alignment is
a unit-modulus scalar per column and never touches the eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SpectralDecomposition, eig_hermitian
from .paths import SamplePath

_ALIGN_TOL = 1e-12


@dataclass(frozen=True)
class EigenPath:
    """Per-row spectral data for every recorded (and pre-jump) time."""

    times: np.ndarray
    lambdas: np.ndarray
    frames: np.ndarray
    states: np.ndarray
    is_jump: np.ndarray
    is_pre: np.ndarray
    row_min_gap: np.ndarray
    row_simple: np.ndarray
    degenerate_times: tuple
    min_gap: float

    @property
    def dim(self) -> int:
        return self.lambdas.shape[1]

    @property
    def n_rows(self) -> int:
        return self.times.size

    def decomposition(self, row: int) -> SpectralDecomposition:
        lam = self.lambdas[row]
        gaps = lam[:-1] - lam[1:] if lam.size > 1 else np.empty(0)
        scale = max(1.0, float(np.linalg.norm(self.states[row])))
        return SpectralDecomposition(
            lambdas=lam,
            U=self.frames[row],
            gaps=gaps,
            simple=bool(self.row_simple[row]),
            vg_fallback=False,
            norm=float(np.linalg.norm(self.states[row])),
            gap_tolerance=1e-9 * scale,
        )


def align_frames(prev: SpectralDecomposition, next_dec: SpectralDecomposition) -> SpectralDecomposition:
    """Re-phase next_dec's columns to maximize Re<u_m(prev), u_m(next)>.

    Only the column phases change; eigenvalue order is untouched. Columns
    nearly orthogonal to their predecessors are left alone.
    """
    if prev.dim != next_dec.dim:
        raise ValueError("frame dimensions differ")
    U = next_dec.U.copy()
    for m in range(U.shape[1]):
        z = np.vdot(prev.U[:, m], U[:, m])
        if abs(z) > _ALIGN_TOL:
            U[:, m] *= z.conjugate() / abs(z)
    U.flags.writeable = False
    return SpectralDecomposition(
        lambdas=next_dec.lambdas,
        U=U,
        gaps=next_dec.gaps,
        simple=next_dec.simple,
        vg_fallback=next_dec.vg_fallback,
        norm=next_dec.norm,
        gap_tolerance=next_dec.gap_tolerance,
    )


def eigen_path(path: SamplePath) -> EigenPath:
    """Decompose every recorded time, including left limits at jumps.

    Degenerate (non-simple) rows are flagged and kept. Raises RuntimeError
    naming the time if the eigensolver fails anywhere.
    """
    rows_t, rows_lam, rows_U, rows_X = [], [], [], []
    rows_jump, rows_pre, rows_gap, rows_simple = [], [], [], []
    degenerate = []
    prev_dec = None

    def decompose(X, t, aligned_to):
        try:
            dec = eig_hermitian(X)
        except Exception as exc:
            raise RuntimeError(f"eigendecomposition failed at t={t!r}: {exc}") from exc
        if aligned_to is not None:
            dec = align_frames(aligned_to, dec)
        return dec

    def emit(t, X, dec, is_jump, is_pre):
        rows_t.append(t)
        rows_lam.append(dec.lambdas)
        rows_U.append(dec.U)
        rows_X.append(X)
        rows_jump.append(is_jump)
        rows_pre.append(is_pre)
        rows_gap.append(dec.min_gap)
        rows_simple.append(dec.simple)
        if not dec.simple:
            degenerate.append(t)

    for i in range(path.times.size):
        t = float(path.times[i])
        rec = path.jump_at(i)
        if rec is None:
            dec = decompose(path.states[i], t, prev_dec)
            emit(t, path.states[i], dec, False, False)
            prev_dec = dec
        else:
            pre_dec = decompose(rec.X_pre, t, prev_dec)
            emit(t, rec.X_pre, pre_dec, True, True)
            post_dec = decompose(rec.X_post, t, None)  # fresh frame across the jump
            emit(t, rec.X_post, post_dec, True, False)
            prev_dec = post_dec

    return EigenPath(
        times=np.array(rows_t),
        lambdas=np.array(rows_lam),
        frames=np.array(rows_U),
        states=np.array(rows_X),
        is_jump=np.array(rows_jump, dtype=bool),
        is_pre=np.array(rows_pre, dtype=bool),
        row_min_gap=np.array(rows_gap),
        row_simple=np.array(rows_simple, dtype=bool),
        degenerate_times=tuple(degenerate),
        min_gap=float(min(rows_gap)) if rows_gap else math.inf,
    )
