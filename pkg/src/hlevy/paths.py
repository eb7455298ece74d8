"""Sample paths of a Hermitian Levy process on [0, t_max].

Construction order matters for reproducibility: the jump stream (times and
sizes) is drawn first from its own generator, so the jump ledger is
independent of the grid resolution; the Gaussian bridge then fills the grid
cells, split exactly at jump times so every recorded left limit includes the
pre-jump diffusion. Jumps with ||y|| <= cutoff are dropped and the
compensator of the (cutoff, 1] band is absorbed into the effective drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import commutator_norm, eig_hermitian, numerical_rank
from .model import LevyTriplet, ValidityFlags, compensator_drift, gaussian_increment, model_validity_flags

JUMP_RANK_TOL = 1e-10
_TIME_MERGE_RTOL = 1e-15


def path_generator(master_seed: int, path_index: int, stream: int = 0):
    """Counter-based generator split deterministically by (seed, path, stream)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(path_index, stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimulationConfig:
    t_max: float
    steps: int
    seed: int
    cutoff: float = 1e-3
    paths: int = 1

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not 0.0 < self.cutoff <= 1.0:
            raise ValueError("cutoff must lie in (0, 1]")
        if self.paths < 1:
            raise ValueError("paths must be at least 1")


@dataclass(frozen=True)
class JumpRecord:
    t: float
    X_pre: np.ndarray
    X_post: np.ndarray
    delta: np.ndarray
    rank: int
    commutator: float
    delta_lambda: np.ndarray


@dataclass(frozen=True)
class SamplePath:
    """Recorded states on the grid augmented with exact jump times.

    `states[i]` is X(times[i]) (post-jump at jump times); the matching
    JumpRecord stores the left limit. `cutoff` is the small-jump threshold
    the path was simulated with.
    """

    times: np.ndarray
    states: np.ndarray
    jumps: tuple
    flags: ValidityFlags
    cutoff: float
    jump_indices: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def jump_at(self, index: int):
        return self.jump_indices.get(index)


def _merged_times(t_max: float, steps: int, jump_times) -> tuple[np.ndarray, set]:
    grid = np.linspace(0.0, t_max, steps + 1)
    tol = _TIME_MERGE_RTOL * t_max
    times = list(grid)
    jump_set = set()
    for tj in jump_times:
        # replace a grid point that coincides with the jump time (never t=0)
        idx = int(np.argmin(np.abs(grid - tj)))
        if idx > 0 and abs(grid[idx] - tj) <= tol:
            times[idx] = tj
        else:
            times.append(tj)
        jump_set.add(tj)
    times = np.array(sorted(set(times)))
    return times, jump_set


def simulate_path(triplet: LevyTriplet, cfg: SimulationConfig, path_index: int = 0) -> SamplePath:
    """One path from the drift + Gaussian + big-jump decomposition; X(0) = 0."""
    d = triplet.dim
    rng_jumps = path_generator(cfg.seed, path_index, 0)
    rng_gauss = path_generator(cfg.seed, path_index, 1)

    events = []
    psi_eff = np.asarray(triplet.Psi, dtype=complex)
    if triplet.nu is not None:
        events = triplet.nu.sample_events(rng_jumps, 0.0, cfg.t_max, cfg.cutoff)
        psi_eff = psi_eff - compensator_drift(triplet.nu, cfg.cutoff)

    jump_by_time = {t: y for t, y in events}
    times, jump_set = _merged_times(cfg.t_max, cfg.steps, [t for t, _ in events])

    has_gauss = not triplet.A.is_zero
    states = np.zeros((times.size, d, d), dtype=complex)
    jumps = []
    jump_indices = {}
    X = np.zeros((d, d), dtype=complex)
    for i in range(1, times.size):
        dt = times[i] - times[i - 1]
        inc = psi_eff * dt
        if has_gauss and dt > 0:
            inc = inc + gaussian_increment(triplet.A, dt, rng_gauss)
        X_pre = X + inc
        t = float(times[i])
        if t in jump_set:
            delta = jump_by_time[t]
            X_post = X_pre + delta
            lam_pre = eig_hermitian(X_pre).lambdas
            lam_post = eig_hermitian(X_post).lambdas
            rec = JumpRecord(
                t=t,
                X_pre=X_pre,
                X_post=X_post,
                delta=delta,
                rank=numerical_rank(delta, JUMP_RANK_TOL),
                commutator=commutator_norm(X_post, X_pre),
                delta_lambda=lam_post - lam_pre,
            )
            jump_indices[i] = rec
            jumps.append(rec)
            X = X_post
        else:
            X = X_pre
        states[i] = X
    states.flags.writeable = False
    return SamplePath(
        times=times,
        states=states,
        jumps=tuple(jumps),
        flags=model_validity_flags(triplet),
        cutoff=cfg.cutoff,
        jump_indices=jump_indices,
    )


def simulate_dyson_entrywise(d: int, sigma2: float, cfg: SimulationConfig, path_index: int = 0) -> SamplePath:
    """Hermitian Brownian motion built entry by entry.

    Diagonal entries are Brownian motions with variance sigma2 * t; the real
    and imaginary parts of each upper entry have variance sigma2 * t / 2.
    Distributionally identical to simulate_path with the gue(sigma2)
    operator and no jumps.
    """
    rng = path_generator(cfg.seed, path_index, 1)
    times = np.linspace(0.0, cfg.t_max, cfg.steps + 1)
    states = np.zeros((times.size, d, d), dtype=complex)
    scale_diag = np.sqrt(sigma2)
    scale_off = np.sqrt(sigma2 / 2.0)
    X = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    for i in range(1, times.size):
        sdt = np.sqrt(times[i] - times[i - 1])
        inc = np.zeros((d, d), dtype=complex)
        inc[np.diag_indices(d)] = scale_diag * sdt * rng.standard_normal(d)
        if d > 1:
            re = rng.standard_normal(iu[0].size)
            im = rng.standard_normal(iu[0].size)
            upper = scale_off * sdt * (re + 1j * im)
            inc[iu] = upper
            inc[iu[1], iu[0]] = upper.conj()
        X = X + inc
        states[i] = X
    states.flags.writeable = False
    flags = ValidityFlags(sigma2 > 0, sigma2 > 0, "entrywise Hermitian Brownian motion")
    return SamplePath(
        times=times,
        states=states,
        jumps=(),
        flags=flags,
        cutoff=cfg.cutoff,
        jump_indices={},
    )


def pre_jump_state(path: SamplePath, t: float) -> np.ndarray:
    """X(t-): the stored left limit at jump times, otherwise the state itself."""
    hits = np.flatnonzero(path.times == t)
    if hits.size == 0:
        raise ValueError(f"time {t!r} is not recorded on this path")
    idx = int(hits[0])
    rec = path.jump_at(idx)
    return rec.X_pre if rec is not None else path.states[idx]
