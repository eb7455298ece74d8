import math

import numpy as np
import pytest

from hlevy.linalg import eig_hermitian, vectorize
from hlevy.model import (
    CovarianceOperator,
    LevyTriplet,
    PointMass,
    RankOneUniform,
)
from hlevy.paths import (
    JumpRecord,
    SamplePath,
    SimulationConfig,
    pre_jump_state,
    simulate_dyson_entrywise,
    simulate_path,
)


def gue_triplet(d=2, sigma2=1.0, nu=None, psi=None):
    return LevyTriplet(CovarianceOperator.gue(d, sigma2), nu, psi)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(t_max=0.0, steps=4, seed=1)
    with pytest.raises(ValueError):
        SimulationConfig(t_max=1.0, steps=0, seed=1)
    with pytest.raises(ValueError):
        SimulationConfig(t_max=1.0, steps=4, seed=1, cutoff=0.0)


def test_pure_drift_path_exact():
    psi = np.diag([2.0, 1.0]).astype(complex)
    triplet = LevyTriplet(CovarianceOperator.zero(2), None, psi)
    cfg = SimulationConfig(t_max=1.0, steps=10, seed=3)
    path = simulate_path(triplet, cfg)
    for t, X in zip(path.times, path.states):
        assert np.allclose(X, t * psi, atol=1e-15)
    assert not np.any(path.states[0])
    assert path.jumps == ()


def test_reproducibility_bit_identical():
    nu = RankOneUniform(dim=2, rate=3.0, radial=PointMass(0.5))
    triplet = gue_triplet(nu=nu)
    cfg = SimulationConfig(t_max=1.0, steps=16, seed=11)
    a = simulate_path(triplet, cfg, path_index=4)
    b = simulate_path(triplet, cfg, path_index=4)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)
    assert len(a.jumps) == len(b.jumps)
    for ra, rb in zip(a.jumps, b.jumps):
        assert ra.t == rb.t and np.array_equal(ra.delta, rb.delta)
    c = simulate_path(triplet, cfg, path_index=5)
    assert not np.array_equal(a.states, c.states)


def test_jump_ledger_exactness_and_telescoping():
    nu = RankOneUniform(dim=3, rate=4.0, radial=PointMass(0.8))
    triplet = gue_triplet(d=3, nu=nu, psi=np.diag([1.0, 0.0, -1.0]))
    cfg = SimulationConfig(t_max=1.0, steps=32, seed=17)
    path = simulate_path(triplet, cfg)
    assert len(path.jumps) > 0
    for rec in path.jumps:
        # X_post is the rounded sum X_pre + delta, so the identity holds to an ulp
        scale = max(1.0, np.abs(rec.X_post).max())
        assert np.abs(rec.X_post - rec.X_pre - rec.delta).max() <= 4e-16 * scale
        assert rec.rank == 1
    # telescoping: summing recorded increments reproduces X(T)
    total = np.zeros((3, 3), dtype=complex)
    for i in range(1, path.times.size):
        rec = path.jump_at(i)
        if rec is not None:
            total = total + (rec.X_pre - path.states[i - 1]) + rec.delta
        else:
            total = total + (path.states[i] - path.states[i - 1])
    assert np.max(np.abs(total - path.states[-1])) <= 1e-12


def test_grid_refinement_keeps_jump_ledger():
    nu = RankOneUniform(dim=2, rate=5.0, radial=PointMass(0.6))
    triplet = gue_triplet(nu=nu)
    coarse = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=8, seed=23))
    fine = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=16, seed=23))
    finest = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=256, seed=23))
    assert len(coarse.jumps) > 0
    for a, b in ((coarse, fine), (coarse, finest)):
        assert [r.t for r in a.jumps] == [r.t for r in b.jumps]
        for ra, rb in zip(a.jumps, b.jumps):
            assert np.array_equal(ra.delta, rb.delta)


def test_jump_times_inserted_exactly():
    nu = RankOneUniform(dim=2, rate=6.0, radial=PointMass(1.2))
    triplet = gue_triplet(nu=nu)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=4, seed=29))
    for rec in path.jumps:
        assert rec.t in path.times


def test_gue_terminal_entrywise_variance():
    triplet = gue_triplet(d=2, sigma2=1.0)
    cfg = SimulationConfig(t_max=1.0, steps=1, seed=31)
    n = 100_000
    coords = np.empty((n, 4))
    for i in range(n):
        coords[i] = vectorize(simulate_path(triplet, cfg, path_index=i).states[-1])
    target = np.array([1.0, 1.0, 0.5, 0.5])
    se = target * math.sqrt(2.0 / n)
    assert np.all(np.abs(coords.var(axis=0) - target) <= 4 * se)


def test_dyson_entrywise_basics():
    cfg = SimulationConfig(t_max=1.0, steps=8, seed=37)
    zero = simulate_dyson_entrywise(2, 0.0, cfg)
    assert not np.any(zero.states)
    n = 20_000
    vals = np.array(
        [
            simulate_dyson_entrywise(1, 1.0, SimulationConfig(t_max=1.0, steps=1, seed=41), i).states[-1][0, 0].real
            for i in range(n)
        ]
    )
    assert abs(vals.var() - 1.0) <= 4 * math.sqrt(2.0 / n)
    assert abs(vals.mean()) <= 4 / math.sqrt(n)


def _ks_statistic(a, b):
    # two-sample Kolmogorov-Smirnov statistic by merged-grid ecdf comparison
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(np.sort(a), allv, side="right") / a.size
    cdf_b = np.searchsorted(np.sort(b), allv, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def test_dyson_entrywise_matches_gue_construction():
    n = 10_000
    cfg = SimulationConfig(t_max=1.0, steps=1, seed=43)
    triplet = gue_triplet(d=2, sigma2=1.0)
    gaps_a = np.empty(n)
    gaps_b = np.empty(n)
    for i in range(n):
        lam_a = eig_hermitian(simulate_dyson_entrywise(2, 1.0, cfg, i).states[-1]).lambdas
        lam_b = eig_hermitian(simulate_path(triplet, cfg, i).states[-1]).lambdas
        gaps_a[i] = lam_a[0] - lam_a[1]
        gaps_b[i] = lam_b[0] - lam_b[1]
    # 1% critical value for equal-size two-sample KS
    crit = 1.628 * math.sqrt(2.0 / n)
    assert _ks_statistic(gaps_a, gaps_b) < crit


def test_pre_jump_state():
    nu = RankOneUniform(dim=2, rate=5.0, radial=PointMass(0.7))
    triplet = gue_triplet(nu=nu)
    path = simulate_path(triplet, SimulationConfig(t_max=1.0, steps=8, seed=47))
    assert len(path.jumps) > 0
    rec = path.jumps[0]
    assert np.array_equal(pre_jump_state(path, rec.t), rec.X_pre)
    t_regular = float(path.times[1])
    if path.jump_at(1) is None:
        assert np.array_equal(pre_jump_state(path, t_regular), path.states[1])
    assert np.array_equal(pre_jump_state(path, 0.0), path.states[0])
    with pytest.raises(ValueError):
        pre_jump_state(path, 0.123456789)


def test_flags_attached():
    nu = RankOneUniform(dim=2, rate=1.0, radial=PointMass(1.0))
    pure_jump = LevyTriplet(CovarianceOperator.zero(2), nu)
    path = simulate_path(pure_jump, SimulationConfig(t_max=1.0, steps=4, seed=53))
    assert not path.flags.absolutely_continuous
    path2 = simulate_path(gue_triplet(nu=nu), SimulationConfig(t_max=1.0, steps=4, seed=53))
    assert path2.flags.absolutely_continuous
