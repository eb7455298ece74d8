"""Levy triplet specification for Hermitian matrix processes.

A triplet (A, nu, Psi) consists of a Gaussian covariance operator on
Hermitian matrices, an optional jump-measure family, and a Hermitian drift.
Covariance operators come in three named forms (gue, kronecker,
trace_identity) plus explicit coordinate covariances; jump measures come
from a closed catalog of five parametric families. Everything is analytic:
intensities, compensators, and the absolute-continuity flags are computed
in closed form per family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    coordinate_directions,
    coordinate_weights,
    devectorize,
    dual_basis,
    frobenius_norm,
    hermitian_matrix,
    vectorize,
)


class ModelError(ValueError):
    """A jump-measure or covariance specification is unusable as given."""


class QuadratureRequiredError(ModelError):
    """No closed form exists; the offending integral is spelled out."""

    def __init__(self, integrand: str):
        super().__init__(f"no closed form; needs numeric quadrature of {integrand}")
        self.integrand = integrand


# ---------------------------------------------------------------------------
# Radial measures on (0, infinity)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointMass:
    """Unit point mass at r0 > 0."""

    r0: float

    name = "point_mass"
    absolutely_continuous = False
    diverges_at_zero = False

    def __post_init__(self):
        if self.r0 <= 0:
            raise ModelError("point_mass radius must be positive")

    def density_repr(self) -> str:
        return f"delta(u - {self.r0})"

    def mass_above(self, a: float) -> float:
        return 1.0 if self.r0 > a else 0.0

    def sample_above(self, a: float, rng, n: int) -> np.ndarray:
        if self.r0 <= a:
            raise ModelError(f"point_mass({self.r0}) has no mass above {a}")
        return np.full(n, self.r0)

    def moment1(self, a: float, b: float) -> float:
        return self.r0 if a < self.r0 <= b else 0.0

    def moment2(self, a: float, b: float) -> float:
        return self.r0 ** 2 if a < self.r0 <= b else 0.0


@dataclass(frozen=True)
class Exponential:
    """Probability density beta * exp(-beta u) on (0, infinity)."""

    beta: float

    name = "exponential"
    absolutely_continuous = True
    diverges_at_zero = False

    def __post_init__(self):
        if self.beta <= 0:
            raise ModelError("exponential rate must be positive")

    def density_repr(self) -> str:
        return f"{self.beta} * exp(-{self.beta} u)"

    def mass_above(self, a: float) -> float:
        return math.exp(-self.beta * a)

    def sample_above(self, a: float, rng, n: int) -> np.ndarray:
        # memorylessness: the normalized restriction above a is a + Exp(beta)
        return a + rng.exponential(1.0 / self.beta, size=n)

    def _m1_tail(self, a: float) -> float:
        return (a + 1.0 / self.beta) * math.exp(-self.beta * a)

    def _m2_tail(self, a: float) -> float:
        b = self.beta
        return (a * a + 2.0 * a / b + 2.0 / (b * b)) * math.exp(-b * a)

    def moment1(self, a: float, b: float) -> float:
        return max(self._m1_tail(a) - self._m1_tail(b), 0.0) if a < b else 0.0

    def moment2(self, a: float, b: float) -> float:
        return max(self._m2_tail(a) - self._m2_tail(b), 0.0) if a < b else 0.0


@dataclass(frozen=True)
class StableTruncated:
    """Unnormalized density u^(-1-alpha) on (r_min, r_max); infinite mass iff r_min = 0."""

    alpha: float
    r_min: float
    r_max: float

    name = "stable_truncated"
    absolutely_continuous = True

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ModelError("stable exponent must lie in (0, 2)")
        if self.r_min < 0 or self.r_max <= self.r_min:
            raise ModelError("stable support requires 0 <= r_min < r_max")

    @property
    def diverges_at_zero(self) -> bool:
        return self.r_min == 0.0

    def density_repr(self) -> str:
        return f"u^(-1-{self.alpha}) on ({self.r_min}, {self.r_max})"

    def mass_above(self, a: float) -> float:
        lo = max(a, self.r_min)
        if lo >= self.r_max:
            return 0.0
        if lo == 0.0:
            return math.inf
        return (lo ** -self.alpha - self.r_max ** -self.alpha) / self.alpha

    def sample_above(self, a: float, rng, n: int) -> np.ndarray:
        lo = max(a, self.r_min)
        if lo <= 0.0 or lo >= self.r_max:
            raise ModelError(f"cannot sample stable radial above {a}")
        lo_p = lo ** -self.alpha
        hi_p = self.r_max ** -self.alpha
        u = rng.random(n)
        return (lo_p - u * (lo_p - hi_p)) ** (-1.0 / self.alpha)

    def moment1(self, a: float, b: float) -> float:
        lo, hi = max(a, self.r_min), min(b, self.r_max)
        if lo >= hi:
            return 0.0
        if self.alpha == 1.0:
            return math.log(hi / lo)
        return (hi ** (1.0 - self.alpha) - lo ** (1.0 - self.alpha)) / (1.0 - self.alpha)

    def moment2(self, a: float, b: float) -> float:
        lo, hi = max(a, self.r_min), min(b, self.r_max)
        if lo >= hi:
            return 0.0
        return (hi ** (2.0 - self.alpha) - lo ** (2.0 - self.alpha)) / (2.0 - self.alpha)


# ---------------------------------------------------------------------------
# Covariance operators
# ---------------------------------------------------------------------------

_COV_ASYM_RTOL = 1e-10
_COV_PSD_RTOL = 1e-12


class CovarianceOperator:
    """Positive symmetric operator A on Hermitian matrices.

    `matrix` is the d^2 x d^2 covariance of vectorize(B_A(1)), built from
    C_ab = tr(B_a A B_b) over the dual coordinate basis. `pair_coefficients`
    is the operator's matrix representation in the convention that doubles
    the off-diagonal coordinates (matrix times the pairing weights).
    """

    def __init__(self, dim: int, form: str, params: dict):
        self.dim = int(dim)
        self.form = form
        self.params = params
        if self.dim < 1:
            raise ModelError("dimension must be positive")
        self._matrix = self._build_matrix()
        self._validate_matrix()
        self._factor = None

    # -- constructors -------------------------------------------------

    @classmethod
    def gue(cls, dim: int, sigma2: float) -> "CovarianceOperator":
        if sigma2 < 0:
            raise ModelError("gue variance must be nonnegative")
        return cls(dim, "gue", {"sigma2": float(sigma2)})

    @classmethod
    def kronecker(cls, sigma1_matrix, sigma2_matrix) -> "CovarianceOperator":
        S1 = hermitian_matrix(sigma1_matrix)
        S2 = hermitian_matrix(sigma2_matrix)
        if S1.shape != S2.shape:
            raise ModelError("kronecker factors must share a dimension")
        for name, S in (("sigma1", S1), ("sigma2", S2)):
            if np.linalg.eigvalsh(S).min() < -1e-12 * max(1.0, frobenius_norm(S)):
                raise ModelError(f"kronecker factor {name} is not nonnegative definite")
        return cls(S1.shape[0], "kronecker", {"sigma1_matrix": S1, "sigma2_matrix": S2})

    @classmethod
    def trace_identity(cls, dim: int, sigma2: float) -> "CovarianceOperator":
        if sigma2 < 0:
            raise ModelError("trace_identity variance must be nonnegative")
        return cls(dim, "trace_identity", {"sigma2": float(sigma2)})

    @classmethod
    def explicit(cls, matrix) -> "CovarianceOperator":
        C = np.asarray(matrix, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise ModelError("explicit covariance must be a square matrix")
        d = math.isqrt(C.shape[0])
        if d * d != C.shape[0]:
            raise ModelError("explicit covariance size must be a perfect square")
        return cls(d, "explicit", {"matrix": C})

    @classmethod
    def zero(cls, dim: int) -> "CovarianceOperator":
        return cls.gue(dim, 0.0)

    # -- structure ----------------------------------------------------

    def _build_matrix(self) -> np.ndarray:
        d = self.dim
        n = d * d
        if self.form == "gue":
            s2 = self.params["sigma2"]
            diag = np.full(n, s2 / 2.0)
            diag[:d] = s2
            return np.diag(diag)
        if self.form == "trace_identity":
            C = np.zeros((n, n))
            C[:d, :d] = self.params["sigma2"]
            return C
        if self.form == "kronecker":
            S1 = self.params["sigma1_matrix"]
            S2 = self.params["sigma2_matrix"]
            B = dual_basis(d)
            raw = np.einsum("aij,jk,bkl,li->ab", B, S1, B, S2, optimize=True)
            scale = max(1.0, float(np.abs(raw).max()))
            asym = max(float(np.abs(raw.imag).max()), float(np.abs(raw - raw.T.conj()).max()))
            if asym > _COV_ASYM_RTOL * scale:
                raise ModelError(
                    "kronecker pair does not define a symmetric covariance "
                    f"(asymmetry {asym:.3e}); use commuting or equal factors"
                )
            return (raw.real + raw.real.T) / 2.0
        if self.form == "explicit":
            return self.params["matrix"].copy()
        raise ModelError(f"unknown covariance form {self.form!r}")

    def _validate_matrix(self) -> None:
        C = self._matrix
        scale = max(1.0, float(np.abs(C).max()))
        if float(np.abs(C - C.T).max()) > _COV_ASYM_RTOL * scale:
            raise ModelError("covariance matrix is not symmetric")
        self._matrix = (C + C.T) / 2.0
        w = np.linalg.eigvalsh(self._matrix)
        if w.min() < -_COV_PSD_RTOL * max(1.0, float(np.abs(w).max())):
            raise ModelError(f"covariance matrix is not positive semidefinite (min eig {w.min():.3e})")
        self._matrix.flags.writeable = False

    @property
    def matrix(self) -> np.ndarray:
        """Coordinate covariance of vectorize(B(1))."""
        return self._matrix

    @property
    def pair_coefficients(self) -> np.ndarray:
        """Operator matrix in the doubled off-diagonal convention (gue: sigma2 * identity)."""
        return self._matrix * coordinate_weights(self.dim)[None, :]

    @property
    def is_zero(self) -> bool:
        return not np.any(self._matrix)

    def apply(self, theta: np.ndarray) -> np.ndarray:
        """Operator action A(theta) on a Hermitian matrix."""
        if self.form == "gue":
            return self.params["sigma2"] * np.asarray(theta, dtype=complex)
        if self.form == "kronecker":
            return self.params["sigma1_matrix"] @ theta @ self.params["sigma2_matrix"]
        if self.form == "trace_identity":
            return self.params["sigma2"] * np.trace(theta) * np.eye(self.dim, dtype=complex)
        return devectorize(self.pair_coefficients @ vectorize(theta))

    def _sampling_factor(self) -> np.ndarray:
        if self._factor is None:
            d, n = self.dim, self.dim ** 2
            if self.form == "gue":
                s = math.sqrt(self.params["sigma2"])
                diag = np.full(n, s / math.sqrt(2.0))
                diag[:d] = s
                self._factor = np.diag(diag)
            elif self.form == "trace_identity":
                col = np.zeros((n, 1))
                col[:d, 0] = math.sqrt(self.params["sigma2"])
                self._factor = col
            else:
                w, V = np.linalg.eigh(self._matrix)
                w = np.clip(w, 0.0, None)
                keep = w > 0.0
                self._factor = V[:, keep] * np.sqrt(w[keep])
                if self._factor.shape[1] == 0:
                    self._factor = np.zeros((n, 1))
        return self._factor


def covariance_matrix(op: CovarianceOperator) -> np.ndarray:
    return op.matrix


def gaussian_increment(op: CovarianceOperator, dt: float, rng) -> np.ndarray:
    """Centered Gaussian Hermitian increment with coordinate covariance dt * matrix."""
    if dt <= 0:
        raise ModelError("dt must be positive")
    L = op._sampling_factor()
    z = rng.standard_normal(L.shape[1])
    return devectorize(math.sqrt(dt) * (L @ z))


# ---------------------------------------------------------------------------
# Jump-measure families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionDVerdict:
    status: str  # holds | fails | not_applicable
    reason: str
    density: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "holds"


def _uniform_sphere(rng, d: int) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    nrm = np.linalg.norm(z)
    while nrm == 0.0:
        z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        nrm = np.linalg.norm(z)
    return z / nrm


def _rank_one(u: np.ndarray) -> np.ndarray:
    # fused-multiply-add can leave outer(u, conj(u)) off-Hermitian by an ulp
    from .linalg import _symmetrize

    return _symmetrize(np.outer(u, u.conj()))


def _signs(rng, n: int) -> np.ndarray:
    return np.where(rng.random(n) < 0.5, 1.0, -1.0)


def _radial_verdict(radial, context: str) -> ConditionDVerdict:
    density = radial.density_repr()
    if not radial.absolutely_continuous:
        return ConditionDVerdict(
            "fails", f"{context}: radial component {radial.name} is not absolutely continuous", density
        )
    if radial.diverges_at_zero:
        return ConditionDVerdict(
            "holds", f"{context}: radial density integrates to infinity near zero", density
        )
    return ConditionDVerdict(
        "fails", f"{context}: radial density has finite total mass (finite activity)", density
    )


class JumpFamily:
    """Base class for the closed catalog of jump-measure families."""

    dim: int
    name: str

    def intensity(self, cutoff: float) -> float:
        raise NotImplementedError

    def sample_sizes(self, rng, n: int, cutoff: float) -> list:
        """iid jump matrices from the normalized restriction to ||y|| > cutoff."""
        raise NotImplementedError

    def compensator(self, cutoff: float) -> np.ndarray:
        """Closed-form integral of y over cutoff < ||y|| <= 1."""
        raise NotImplementedError

    def condition_d(self) -> ConditionDVerdict:
        raise NotImplementedError

    @property
    def symmetric(self) -> bool:
        return False

    def sample_events(self, rng, t0: float, t1: float, cutoff: float) -> list:
        """Jump (time, matrix) pairs on (t0, t1], times strictly increasing."""
        lam = self.intensity(cutoff)
        if not math.isfinite(lam):
            raise ModelError(f"{self.name}: infinite jump intensity above cutoff {cutoff}")
        n = int(rng.poisson(lam * (t1 - t0))) if lam > 0 else 0
        if n == 0:
            return []
        times = t0 + (t1 - t0) * np.sort(rng.random(n))
        return list(zip(times.tolist(), self.sample_sizes(rng, n, cutoff)))


@dataclass(frozen=True)
class RankOneUniform(JumpFamily):
    """Jumps r * u u^* with u uniform on the complex unit sphere.

    `rate` scales the whole measure (the spherical component is normalized
    to total mass one). With `sign_symmetric` the radial magnitude carries
    an independent fair sign, making the measure symmetric.
    """

    dim: int
    rate: float
    radial: object
    sign_symmetric: bool = False

    name = "rank_one_uniform"

    def intensity(self, cutoff: float) -> float:
        return self.rate * self.radial.mass_above(cutoff)

    def sample_sizes(self, rng, n, cutoff):
        r = self.radial.sample_above(cutoff, rng, n)
        if self.sign_symmetric:
            r = r * _signs(rng, n)
        return [r[i] * _rank_one(_uniform_sphere(rng, self.dim)) for i in range(n)]

    def compensator(self, cutoff: float) -> np.ndarray:
        if self.sign_symmetric:
            return np.zeros((self.dim, self.dim), dtype=complex)
        # isotropy: the mean of u u^* over the sphere is I/d
        m1 = self.rate * self.radial.moment1(cutoff, 1.0)
        return (m1 / self.dim) * np.eye(self.dim, dtype=complex)

    def condition_d(self) -> ConditionDVerdict:
        return _radial_verdict(self.radial, self.name)

    @property
    def symmetric(self) -> bool:
        return self.sign_symmetric


@dataclass(frozen=True)
class ScalarJumpSpec:
    """One-dimensional compound jump coordinate: rate, radial magnitude, optional sign."""

    rate: float
    radial: object
    sign_symmetric: bool = False


@dataclass(frozen=True)
class DiagonalIndependent(JumpFamily):
    """Independent one-dimensional jump processes on the diagonal of a fixed frame U."""

    unitary: np.ndarray
    coords: tuple

    name = "diagonal_independent"

    def __post_init__(self):
        U = np.asarray(self.unitary, dtype=complex)
        d = U.shape[0]
        if U.shape != (d, d) or len(self.coords) != d:
            raise ModelError("diagonal_independent needs a d x d frame and d coordinate specs")
        if np.linalg.norm(U.conj().T @ U - np.eye(d)) > 1e-10:
            raise ModelError("diagonal_independent frame must be unitary")
        object.__setattr__(self, "unitary", U)

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def _column_projector(self, i: int) -> np.ndarray:
        return _rank_one(self.unitary[:, i])

    def intensity(self, cutoff: float) -> float:
        return sum(c.rate * c.radial.mass_above(cutoff) for c in self.coords)

    def sample_events(self, rng, t0, t1, cutoff):
        events = []
        for i, c in enumerate(self.coords):
            lam = c.rate * c.radial.mass_above(cutoff)
            if not math.isfinite(lam):
                raise ModelError(f"{self.name}: infinite intensity in coordinate {i}")
            n = int(rng.poisson(lam * (t1 - t0))) if lam > 0 else 0
            if n == 0:
                continue
            times = t0 + (t1 - t0) * np.sort(rng.random(n))
            sizes = c.radial.sample_above(cutoff, rng, n)
            if c.sign_symmetric:
                sizes = sizes * _signs(rng, n)
            P = self._column_projector(i)
            events.extend((t, s * P) for t, s in zip(times.tolist(), sizes))
        events.sort(key=lambda e: e[0])
        return events

    def sample_sizes(self, rng, n, cutoff):
        # mixture over coordinates weighted by their restricted intensities
        lams = np.array([c.rate * c.radial.mass_above(cutoff) for c in self.coords])
        total = lams.sum()
        if total <= 0:
            return []
        picks = rng.choice(len(self.coords), size=n, p=lams / total)
        out = []
        for i in picks:
            c = self.coords[i]
            s = float(c.radial.sample_above(cutoff, rng, 1)[0])
            if c.sign_symmetric and rng.random() < 0.5:
                s = -s
            out.append(s * self._column_projector(int(i)))
        return out

    def compensator(self, cutoff: float) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, c in enumerate(self.coords):
            if c.sign_symmetric:
                continue
            out = out + c.rate * c.radial.moment1(cutoff, 1.0) * self._column_projector(i)
        return out

    def condition_d(self) -> ConditionDVerdict:
        verdicts = [_radial_verdict(c.radial, f"{self.name}[{i}]") for i, c in enumerate(self.coords)]
        bad = next((v for v in verdicts if not v.holds), None)
        if bad is None:
            return ConditionDVerdict("holds", "every coordinate radial is divergent", verdicts[0].density)
        return ConditionDVerdict("fails", bad.reason, bad.density)

    @property
    def symmetric(self) -> bool:
        return all(c.sign_symmetric for c in self.coords)


@dataclass(frozen=True)
class ScaledIdentityLaw:
    """Deterministic jump c * I."""

    c: float
    name = "scaled_identity"

    def sample(self, rng, d: int) -> np.ndarray:
        return self.c * np.eye(d, dtype=complex)

    def norm(self, d: int) -> float:
        return abs(self.c) * math.sqrt(d)

    @property
    def symmetric(self) -> bool:
        return self.c == 0.0


@dataclass(frozen=True)
class GUEMatrixLaw:
    """Centered Hermitian Gaussian jump with gue(sigma2) covariance; symmetric."""

    sigma2: float
    name = "gue_matrix"
    symmetric = True

    def sample(self, rng, d: int) -> np.ndarray:
        return gaussian_increment(CovarianceOperator.gue(d, self.sigma2), 1.0, rng)


@dataclass(frozen=True)
class CallableLaw:
    """User-supplied Hermitian sampler; mark `symmetric` only for sign-symmetric laws."""

    sampler: object
    symmetric: bool = False
    name: str = "callable"

    def sample(self, rng, d: int) -> np.ndarray:
        return hermitian_matrix(self.sampler(rng))


@dataclass(frozen=True)
class FullRankCompoundPoisson(JumpFamily):
    """Compound Poisson with a user-specified Hermitian jump law."""

    dim: int
    rate: float
    law: object

    name = "full_rank_cp"

    def intensity(self, cutoff: float) -> float:
        if isinstance(self.law, ScaledIdentityLaw):
            return self.rate if self.law.norm(self.dim) > cutoff else 0.0
        # continuous matrix laws put mass O(cutoff^(d^2)) below the cutoff
        return self.rate

    def sample_sizes(self, rng, n, cutoff):
        out = []
        for _ in range(n):
            y = self.law.sample(rng, self.dim)
            if frobenius_norm(y) > cutoff:
                out.append(y)
        return out

    def sample_events(self, rng, t0, t1, cutoff):
        # thinning: candidates below the cutoff are dropped with their times
        n = int(rng.poisson(self.rate * (t1 - t0))) if self.rate > 0 else 0
        if n == 0:
            return []
        times = t0 + (t1 - t0) * np.sort(rng.random(n))
        events = []
        for t in times.tolist():
            y = self.law.sample(rng, self.dim)
            if frobenius_norm(y) > cutoff:
                events.append((t, y))
        return events

    def compensator(self, cutoff: float) -> np.ndarray:
        if self.law.symmetric:
            return np.zeros((self.dim, self.dim), dtype=complex)
        if isinstance(self.law, ScaledIdentityLaw):
            if cutoff < self.law.norm(self.dim) <= 1.0:
                return self.rate * self.law.c * np.eye(self.dim, dtype=complex)
            return np.zeros((self.dim, self.dim), dtype=complex)
        raise QuadratureRequiredError(
            f"integral of y over {cutoff} < ||y|| <= 1 against rate * law({self.law.name})"
        )

    def condition_d(self) -> ConditionDVerdict:
        return ConditionDVerdict(
            "fails", f"{self.name}: compound Poisson measure has finite total mass"
        )

    @property
    def symmetric(self) -> bool:
        return bool(self.law.symmetric)


@dataclass(frozen=True)
class QuadraticVariationLevy(JumpFamily):
    """Jumps (r v)(r v)^* = r^2 v v^*: the quadratic variation of a vector jump process."""

    dim: int
    rate: float
    radial: object

    name = "qv_vector_levy"

    def intensity(self, cutoff: float) -> float:
        # ||r^2 v v^*|| = r^2, so the cutoff acts at sqrt(cutoff) on the radial
        return self.rate * self.radial.mass_above(math.sqrt(cutoff))

    def sample_sizes(self, rng, n, cutoff):
        r = self.radial.sample_above(math.sqrt(cutoff), rng, n)
        return [(r[i] ** 2) * _rank_one(_uniform_sphere(rng, self.dim)) for i in range(n)]

    def compensator(self, cutoff: float) -> np.ndarray:
        m2 = self.rate * self.radial.moment2(math.sqrt(cutoff), 1.0)
        return (m2 / self.dim) * np.eye(self.dim, dtype=complex)

    def condition_d(self) -> ConditionDVerdict:
        return _radial_verdict(self.radial, self.name)


@dataclass(frozen=True)
class QuadraticVariationDifference(JumpFamily):
    """Difference of two independent quadratic-variation processes."""

    plus: QuadraticVariationLevy
    minus: QuadraticVariationLevy

    name = "qv_difference"

    def __post_init__(self):
        if self.plus.dim != self.minus.dim:
            raise ModelError("qv_difference parts must share a dimension")

    @property
    def dim(self) -> int:
        return self.plus.dim

    def intensity(self, cutoff: float) -> float:
        return self.plus.intensity(cutoff) + self.minus.intensity(cutoff)

    def sample_events(self, rng, t0, t1, cutoff):
        ev = [(t, y) for t, y in self.plus.sample_events(rng, t0, t1, cutoff)]
        ev += [(t, -y) for t, y in self.minus.sample_events(rng, t0, t1, cutoff)]
        ev.sort(key=lambda e: e[0])
        return ev

    def sample_sizes(self, rng, n, cutoff):
        lp = self.plus.intensity(cutoff)
        lm = self.minus.intensity(cutoff)
        total = lp + lm
        if total <= 0:
            return []
        out = []
        for _ in range(n):
            if rng.random() < lp / total:
                out.append(self.plus.sample_sizes(rng, 1, cutoff)[0])
            else:
                out.append(-self.minus.sample_sizes(rng, 1, cutoff)[0])
        return out

    def compensator(self, cutoff: float) -> np.ndarray:
        return self.plus.compensator(cutoff) - self.minus.compensator(cutoff)

    def condition_d(self) -> ConditionDVerdict:
        a, b = self.plus.condition_d(), self.minus.condition_d()
        if a.holds and b.holds:
            return ConditionDVerdict("holds", "both quadratic-variation radials are divergent", a.density)
        bad = a if not a.holds else b
        return ConditionDVerdict("fails", bad.reason, bad.density)

    @property
    def symmetric(self) -> bool:
        return self.plus.rate == self.minus.rate and self.plus.radial == self.minus.radial


# ---------------------------------------------------------------------------
# Triplet and module-level operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevyTriplet:
    A: CovarianceOperator
    nu: JumpFamily | None
    Psi: np.ndarray = field(default=None)

    def __post_init__(self):
        d = self.A.dim
        psi = np.zeros((d, d), dtype=complex) if self.Psi is None else hermitian_matrix(self.Psi)
        object.__setattr__(self, "Psi", psi)
        if psi.shape != (d, d):
            raise ModelError("drift dimension does not match the covariance operator")
        if self.nu is not None and self.nu.dim != d:
            raise ModelError("jump-measure dimension does not match the covariance operator")
        if self.A.is_zero and self.nu is None and not np.any(psi):
            raise ModelError("degenerate triplet: no Gaussian part, no jumps, no drift")

    @property
    def dim(self) -> int:
        return self.A.dim


def sample_jumps(nu: JumpFamily, t0: float, t1: float, cutoff: float, rng) -> list:
    """Jump (time, matrix) pairs of the restricted measure ||y|| > cutoff on (t0, t1]."""
    if t1 <= t0:
        raise ModelError("need t1 > t0")
    if not 0.0 < cutoff <= 1.0:
        raise ModelError("cutoff must lie in (0, 1]")
    return nu.sample_events(rng, t0, t1, cutoff)


def compensator_drift(nu: JumpFamily | None, cutoff: float) -> np.ndarray:
    """Drift owed per unit time when jumps in (cutoff, 1] are simulated uncompensated."""
    if nu is None:
        raise ModelError("no jump measure present")
    if not 0.0 < cutoff <= 1.0:
        raise ModelError("cutoff must lie in (0, 1]")
    return nu.compensator(cutoff)


def condition_d_check(nu: JumpFamily | None) -> ConditionDVerdict:
    if nu is None:
        return ConditionDVerdict("not_applicable", "no jump measure present")
    return nu.condition_d()


@dataclass(frozen=True)
class ValidityFlags:
    absolutely_continuous: bool
    simple_spectrum_as: bool
    reason: str


def model_validity_flags(triplet: LevyTriplet) -> ValidityFlags:
    """Advisory absolute-continuity / simple-spectrum flags for a triplet.

    A nonzero Gaussian part is sufficient; without one the divergence
    condition on the jump measure decides (nondegeneracy is assumed for the
    catalog families, which are isotropic or full-frame by construction).
    """
    if not triplet.A.is_zero:
        return ValidityFlags(True, True, "Gaussian component present")
    verdict = condition_d_check(triplet.nu)
    if verdict.holds:
        return ValidityFlags(True, True, f"divergence condition holds: {verdict.reason}")
    return ValidityFlags(False, False, f"no Gaussian component and {verdict.reason}")
