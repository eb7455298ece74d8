import dataclasses

import numpy as np
import pytest

from hlevy.linalg import eig_hermitian, frobenius_norm, hermitian_matrix
from hlevy.model import CovarianceOperator, LevyTriplet, PointMass, RankOneUniform
from hlevy.paths import SimulationConfig, simulate_path
from hlevy.tracking import align_frames, eigen_path


def test_pure_drift_eigenvalues_linear():
    psi = np.diag([2.0, 1.0]).astype(complex)
    triplet = LevyTriplet(CovarianceOperator.zero(2), None, psi)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=10, seed=3))
    ep = eigen_path(path)
    for t, lam in zip(ep.times, ep.lambdas):
        assert np.allclose(lam, [2.0 * t, 1.0 * t], atol=1e-12)


def test_gue_path_simple_spectrum():
    triplet = LevyTriplet(CovarianceOperator.gue(3, 1.0), None)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=64, seed=7))
    ep = eigen_path(path)
    # t = 0 is identically zero, hence degenerate; all others simple a.s.
    assert ep.degenerate_times == (0.0,)
    assert np.all(ep.row_min_gap[1:] > 0)
    assert np.all(np.diff(ep.lambdas, axis=1) <= 0)


def test_jump_rows_present_and_ordered():
    nu = RankOneUniform(dim=2, rate=4.0, radial=PointMass(0.9))
    triplet = LevyTriplet(CovarianceOperator.gue(2, 1.0), nu)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=16, seed=11))
    assert len(path.jumps) > 0
    ep = eigen_path(path)
    for rec in path.jumps:
        rows = np.flatnonzero(ep.times == rec.t)
        assert rows.size == 2
        pre_row, post_row = int(rows[0]), int(rows[1])
        assert ep.is_pre[pre_row] and not ep.is_pre[post_row]
        assert np.all(np.diff(ep.lambdas[pre_row]) <= 0)
        assert np.all(np.diff(ep.lambdas[post_row]) <= 0)
        lam_pre = eig_hermitian(rec.X_pre).lambdas
        assert np.allclose(ep.lambdas[pre_row], lam_pre, atol=1e-13)


def test_reconstruction_residual_along_path():
    nu = RankOneUniform(dim=3, rate=3.0, radial=PointMass(0.5))
    triplet = LevyTriplet(CovarianceOperator.gue(3, 1.0), nu)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=32, seed=13))
    ep = eigen_path(path)
    for row in range(ep.n_rows):
        X = ep.states[row]
        rec = (ep.frames[row] * ep.lambdas[row]) @ ep.frames[row].conj().T
        assert np.linalg.norm(rec - X) <= 1e-12 * max(1.0, np.linalg.norm(X))


def test_align_frames_identity_and_phase():
    rng = np.random.default_rng(17)
    Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    X = hermitian_matrix((Z + Z.conj().T) / 2)
    dec = eig_hermitian(X)
    same = align_frames(dec, dec)
    assert np.array_equal(same.U, dec.U)
    # multiply a column by a phase and check it is rotated back
    U2 = dec.U.copy()
    U2[:, 1] *= np.exp(1j * 0.7)
    twisted = align_frames(dec, dataclasses.replace(dec, U=U2))
    assert np.allclose(twisted.U, dec.U, atol=1e-13)


def test_align_frames_perturbation_scale():
    rng = np.random.default_rng(19)
    Z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    X = hermitian_matrix((Z + Z.conj().T) / 2)
    dec = eig_hermitian(X)
    delta = 1e-8
    R = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    E = hermitian_matrix((R + R.conj().T) / 2)
    Y = hermitian_matrix(X + delta * E)
    aligned = align_frames(dec, eig_hermitian(Y))
    dist = np.linalg.norm(aligned.U - dec.U)
    bound = 40.0 * delta * frobenius_norm(E) / dec.min_gap
    assert dist <= bound


def test_hoffman_wielandt_along_continuous_path():
    # one million continuous steps across a batch of paths: zero violations
    triplet = LevyTriplet(CovarianceOperator.gue(2, 1.0), None)
    violations = 0
    total = 0
    for p in range(100):
        path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=10_000, seed=23), p)
        ep = eigen_path(path)
        dl = np.linalg.norm(np.diff(ep.lambdas, axis=0), axis=1)
        dx = np.linalg.norm(np.diff(ep.states, axis=0), axis=(1, 2))
        total += dl.size
        violations += int(np.sum(dl > dx + 1e-12))
    assert total >= 1_000_000
    assert violations == 0
