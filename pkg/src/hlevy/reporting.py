"""File formats: path and eigenpath tables, jump reports, manifests.

All floats are written with 17 significant digits so values survive the
round trip exactly. Data files start with a `# config: <echo>` comment
carrying the canonical model echo; analysis commands refuse files whose
echo does not match the run manifest.
"""

from __future__ import annotations

import hashlib
import json
import time

import numpy as np

from .linalg import commutator_norm, devectorize, eig_hermitian, numerical_rank, vectorize
from .model import ValidityFlags
from .paths import JUMP_RANK_TOL, JumpRecord, SamplePath


def fmt(x: float) -> str:
    return f"{x:.17g}"


class EchoMismatchError(ValueError):
    """Output file does not belong to the manifest being analyzed."""


# -- path files ---------------------------------------------------------------


def write_path_csv(path: SamplePath, fh, echo: str) -> None:
    d = path.dim
    fh.write(f"# config: {echo}\n")
    fh.write("t," + ",".join(f"c{i}" for i in range(d * d)) + ",is_jump\n")

    def row(t, X, flag):
        fh.write(fmt(t) + "," + ",".join(fmt(v) for v in vectorize(X)) + f",{flag}\n")

    for i in range(path.times.size):
        t = float(path.times[i])
        rec = path.jump_at(i)
        if rec is None:
            row(t, path.states[i], 0)
        else:
            row(t, rec.X_pre, 0)
            row(t, rec.X_post, 1)


def read_path_csv(fh, flags: ValidityFlags, cutoff: float):
    """Rebuild a SamplePath (with exact jump records) from a path file."""
    echo = None
    header = None
    rows = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("# config: "):
            echo = line[len("# config: ") :]
            continue
        if header is None:
            header = line.split(",")
            continue
        parts = line.split(",")
        rows.append((float(parts[0]), np.array([float(v) for v in parts[1:-1]]), int(parts[-1])))
    if header is None:
        raise ValueError("path file has no header row")
    times = []
    states = []
    jump_indices = {}
    i = 0
    while i < len(rows):
        t, coords, flag = rows[i]
        if i + 1 < len(rows) and rows[i + 1][0] == t and rows[i + 1][2] == 1:
            X_pre = devectorize(coords)
            X_post = devectorize(rows[i + 1][1])
            delta = X_post - X_pre
            rec = JumpRecord(
                t=t,
                X_pre=X_pre,
                X_post=X_post,
                delta=delta,
                rank=numerical_rank(delta, JUMP_RANK_TOL),
                commutator=commutator_norm(X_post, X_pre),
                delta_lambda=eig_hermitian(X_post).lambdas - eig_hermitian(X_pre).lambdas,
            )
            jump_indices[len(times)] = rec
            times.append(t)
            states.append(X_post)
            i += 2
        else:
            times.append(t)
            states.append(devectorize(coords))
            i += 1
    path = SamplePath(
        times=np.array(times),
        states=np.array(states),
        jumps=tuple(jump_indices[k] for k in sorted(jump_indices)),
        flags=flags,
        cutoff=cutoff,
        jump_indices=jump_indices,
    )
    return echo, path


def write_eigenpath_csv(eigen, fh, echo: str) -> None:
    d = eigen.dim
    fh.write(f"# config: {echo}\n")
    fh.write("t," + ",".join(f"lambda_{m + 1}" for m in range(d)) + ",min_gap,is_jump,is_pre\n")
    for i in range(eigen.n_rows):
        fh.write(
            fmt(float(eigen.times[i]))
            + ","
            + ",".join(fmt(v) for v in eigen.lambdas[i])
            + f",{fmt(float(eigen.row_min_gap[i]))},{int(eigen.is_jump[i])},{int(eigen.is_pre[i])}\n"
        )


# -- jump reports ---------------------------------------------------------------


def jump_record_line(t: float, commutator: float, cls) -> str:
    verdicts = {}
    for name, res in cls.verdicts.items():
        verdicts[name] = {"passed": bool(res.passed), "margin": res.margin}
    payload = {
        "t": t,
        "rank": cls.rank,
        "commutator": commutator,
        "commutative": bool(cls.commutative),
        "jumped_count": cls.jumped_count,
        "min_cross_gap": cls.min_cross_gap,
        "hw_margin": cls.verdicts["hoffman_wielandt"].margin,
        "verdicts": verdicts,
    }
    return json.dumps(payload, sort_keys=True)


def write_jump_report(fh, echo: str, lines: list, summary: dict) -> None:
    fh.write(json.dumps({"config_echo": echo}, sort_keys=True) + "\n")
    for line in lines:
        fh.write(line + "\n")
    fh.write(json.dumps({"summary": summary}, sort_keys=True) + "\n")


# -- manifests ------------------------------------------------------------------


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(version: str, echo: str, seed: int, paths: int, sim: dict, files: dict) -> dict:
    return {
        "code_version": version,
        "config_echo": echo,
        "master_seed": seed,
        "per_path_streams": {
            "scheme": "SeedSequence(master_seed, spawn_key=(path_index, stream)) with Philox",
            "streams": {"jumps": 0, "gaussian": 1},
            "paths": paths,
        },
        "simulation": sim,
        "created_unix": time.time(),
        "files": files,
    }


def write_manifest(manifest: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def check_echo(expected: str, found: str | None, filename) -> None:
    if found != expected:
        raise EchoMismatchError(f"{filename}: config echo does not match the run manifest")
