"""Model specification files.

A model file is JSON with keys `dim`, `gaussian`, `jumps` (optional),
`drift` (optional, d^2 reals in coordinate order), and `seed`. The parsed
document is canonically re-serialized (sorted keys, compact separators) and
that exact string is echoed into every output file header, so re-analysis
can verify it is looking at the run it thinks it is.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import devectorize
from .model import (
    CovarianceOperator,
    DiagonalIndependent,
    Exponential,
    FullRankCompoundPoisson,
    GUEMatrixLaw,
    LevyTriplet,
    ModelError,
    PointMass,
    QuadraticVariationDifference,
    QuadraticVariationLevy,
    RankOneUniform,
    ScalarJumpSpec,
    ScaledIdentityLaw,
    StableTruncated,
)

GAUSSIAN_FORMS = ("gue", "kronecker", "trace_identity", "explicit", "none")
JUMP_FAMILIES = (
    "rank_one_uniform",
    "diagonal_independent",
    "full_rank_cp",
    "qv_vector_levy",
    "qv_difference",
)
RADIAL_TYPES = ("point_mass", "exponential", "stable_truncated")
CP_LAWS = ("scaled_identity", "gue_matrix")


class ConfigError(ValueError):
    """Invalid model configuration; the message names the offending key."""


@dataclass(frozen=True)
class ModelConfig:
    dim: int
    seed: int
    cutoff: float
    triplet: LevyTriplet
    echo: str
    raw: dict


def canonical_echo(raw: dict) -> str:
    return json.dumps(raw, sort_keys=True, separators=(",", ":"))


def _need(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"missing key {context}.{key}")
    return mapping[key]


def _number(mapping: dict, key: str, context: str) -> float:
    v = _need(mapping, key, context)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{context}.{key} must be a number, got {v!r}")
    return float(v)


def _complex_matrix(data, context: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context} must be a nested array of reals or [re, im] pairs") from exc
    if arr.ndim == 2:
        return arr.astype(complex)
    if arr.ndim == 3 and arr.shape[2] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    raise ConfigError(f"{context} must be d x d reals or d x d x 2 [re, im] pairs")


def _parse_radial(data, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context} must be an object")
    kind = _need(data, "type", context)
    if kind == "point_mass":
        return PointMass(_number(data, "r0", context))
    if kind == "exponential":
        return Exponential(_number(data, "beta", context))
    if kind == "stable_truncated":
        return StableTruncated(
            _number(data, "alpha", context),
            _number(data, "r_min", context),
            _number(data, "r_max", context),
        )
    raise ConfigError(f"{context}.type must be one of {RADIAL_TYPES}, got {kind!r}")


def _parse_gaussian(data, dim: int) -> CovarianceOperator:
    if data is None:
        return CovarianceOperator.zero(dim)
    if not isinstance(data, dict):
        raise ConfigError("gaussian must be an object or null")
    form = _need(data, "form", "gaussian")
    if form == "none":
        return CovarianceOperator.zero(dim)
    if form == "gue":
        return CovarianceOperator.gue(dim, _number(data, "sigma2", "gaussian"))
    if form == "trace_identity":
        return CovarianceOperator.trace_identity(dim, _number(data, "sigma2", "gaussian"))
    if form == "kronecker":
        s1 = _complex_matrix(_need(data, "sigma1_matrix", "gaussian"), "gaussian.sigma1_matrix")
        s2 = _complex_matrix(_need(data, "sigma2_matrix", "gaussian"), "gaussian.sigma2_matrix")
        return CovarianceOperator.kronecker(s1, s2)
    if form == "explicit":
        return CovarianceOperator.explicit(np.asarray(_need(data, "matrix", "gaussian"), dtype=float))
    raise ConfigError(f"gaussian.form must be one of {GAUSSIAN_FORMS}, got {form!r}")


def _parse_jumps(data, dim: int):
    if data is None:
        return None, 1e-3
    if not isinstance(data, dict):
        raise ConfigError("jumps must be an object or null")
    family = _need(data, "family", "jumps")
    cutoff = float(data.get("cutoff", 1e-3))
    if family == "rank_one_uniform":
        nu = RankOneUniform(
            dim=dim,
            rate=_number(data, "rate", "jumps"),
            radial=_parse_radial(_need(data, "radial", "jumps"), "jumps.radial"),
            sign_symmetric=bool(data.get("sign_symmetric", False)),
        )
    elif family == "diagonal_independent":
        coords_data = _need(data, "coords", "jumps")
        if not isinstance(coords_data, list) or len(coords_data) != dim:
            raise ConfigError(f"jumps.coords must be a list of {dim} coordinate specs")
        coords = tuple(
            ScalarJumpSpec(
                rate=_number(c, "rate", f"jumps.coords[{i}]"),
                radial=_parse_radial(_need(c, "radial", f"jumps.coords[{i}]"), f"jumps.coords[{i}].radial"),
                sign_symmetric=bool(c.get("sign_symmetric", False)),
            )
            for i, c in enumerate(coords_data)
        )
        unitary = data.get("unitary", "identity")
        U = np.eye(dim, dtype=complex) if unitary == "identity" else _complex_matrix(unitary, "jumps.unitary")
        nu = DiagonalIndependent(unitary=U, coords=coords)
    elif family == "full_rank_cp":
        law_data = _need(data, "law", "jumps")
        kind = _need(law_data, "type", "jumps.law")
        if kind == "scaled_identity":
            law = ScaledIdentityLaw(_number(law_data, "c", "jumps.law"))
        elif kind == "gue_matrix":
            law = GUEMatrixLaw(_number(law_data, "sigma2", "jumps.law"))
        else:
            raise ConfigError(f"jumps.law.type must be one of {CP_LAWS}, got {kind!r}")
        nu = FullRankCompoundPoisson(dim=dim, rate=_number(data, "rate", "jumps"), law=law)
    elif family == "qv_vector_levy":
        nu = QuadraticVariationLevy(
            dim=dim,
            rate=_number(data, "rate", "jumps"),
            radial=_parse_radial(_need(data, "radial", "jumps"), "jumps.radial"),
        )
    elif family == "qv_difference":
        def part(key):
            p = _need(data, key, "jumps")
            return QuadraticVariationLevy(
                dim=dim,
                rate=_number(p, "rate", f"jumps.{key}"),
                radial=_parse_radial(_need(p, "radial", f"jumps.{key}"), f"jumps.{key}.radial"),
            )

        nu = QuadraticVariationDifference(part("plus"), part("minus"))
    else:
        raise ConfigError(f"jumps.family must be one of {JUMP_FAMILIES}, got {family!r}")
    if not 0.0 < cutoff <= 1.0:
        raise ConfigError("jumps.cutoff must lie in (0, 1]")
    return nu, cutoff


def parse_model_config(raw: dict) -> ModelConfig:
    if not isinstance(raw, dict):
        raise ConfigError("model configuration must be a JSON object")
    dim = _need(raw, "dim", "config")
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError(f"config.dim must be a positive integer, got {dim!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"config.seed must be an integer, got {seed!r}")
    cov = _parse_gaussian(raw.get("gaussian"), dim)
    nu, cutoff = _parse_jumps(raw.get("jumps"), dim)
    drift = raw.get("drift")
    psi = None
    if drift is not None:
        arr = np.asarray(drift, dtype=float)
        if arr.shape != (dim * dim,):
            raise ConfigError(f"config.drift must hold {dim * dim} reals in coordinate order")
        psi = devectorize(arr)
    try:
        triplet = LevyTriplet(cov, nu, psi)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    return ModelConfig(dim=dim, seed=seed, cutoff=cutoff, triplet=triplet, echo=canonical_echo(raw), raw=raw)


def load_model_config(path) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    return parse_model_config(raw)
