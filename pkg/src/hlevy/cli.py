"""Batch front door: simulate, analyze jumps, verify dynamics.

Exit codes: 0 success, 2 configuration error, 3 validation failure (an
acceptance property did not hold), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_model_config, parse_model_config
from .hadamard import StencilError, fd_check
from .jumps import SecularSolverError, classify_jump
from .linalg import ConvergenceError, eig_hermitian, hermitian_matrix
from .model import ModelError, model_validity_flags
from .paths import SimulationConfig, path_generator, simulate_path
from .reporting import (
    EchoMismatchError,
    build_manifest,
    check_echo,
    file_digest,
    fmt,
    jump_record_line,
    read_manifest,
    read_path_csv,
    write_eigenpath_csv,
    write_jump_report,
    write_manifest,
    write_path_csv,
)
from .tracking import eigen_path
from .verify import dyson_drift_estimate, martingale_bv_split, reconstruct, refinement_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

EXCLUSION_BUDGET = 1e-3


class ValidationFailure(RuntimeError):
    pass


def cmd_simulate(args) -> int:
    cfg = load_model_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    sim = SimulationConfig(t_max=args.t_max, steps=args.steps, seed=seed, cutoff=cfg.cutoff, paths=args.paths)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for p in range(args.paths):
        path = simulate_path(cfg.triplet, sim, p)
        ep = eigen_path(path)
        path_file = out / f"path_{p:04d}.csv"
        eig_file = out / f"eigenpath_{p:04d}.csv"
        with open(path_file, "w", encoding="utf-8") as fh:
            write_path_csv(path, fh, cfg.echo)
        with open(eig_file, "w", encoding="utf-8") as fh:
            write_eigenpath_csv(ep, fh, cfg.echo)
        files[path_file.name] = file_digest(path_file)
        files[eig_file.name] = file_digest(eig_file)
    manifest = build_manifest(
        version=__version__,
        echo=cfg.echo,
        seed=seed,
        paths=args.paths,
        sim={"t_max": args.t_max, "steps": args.steps, "cutoff": cfg.cutoff},
        files=files,
    )
    manifest["config"] = cfg.raw
    write_manifest(manifest, out / "manifest.json")
    print(f"simulate: wrote {args.paths} path(s) to {out}")
    return EXIT_OK


def _load_run(run_dir: Path):
    manifest = read_manifest(run_dir / "manifest.json")
    cfg = parse_model_config(manifest["config"])
    if cfg.echo != manifest["config_echo"]:
        raise ConfigError("manifest config echo is inconsistent with its config")
    return manifest, cfg


def cmd_jumps(args) -> int:
    run_dir = Path(args.run)
    manifest, cfg = _load_run(run_dir)
    validity = model_validity_flags(cfg.triplet)
    lines = []
    hw_fail = 0
    disjoint_fail = 0
    sim_fail = 0
    sim_total = 0
    disjoint_total = 0
    n_jumps = 0
    jumped_hist = Counter()
    for name in sorted(manifest["files"]):
        if not name.startswith("path_"):
            continue
        with open(run_dir / name, "r", encoding="utf-8") as fh:
            echo, path = read_path_csv(fh, validity, cfg.cutoff)
        check_echo(cfg.echo, echo, name)
        for rec in path.jumps:
            lam_pre = eig_hermitian(rec.X_pre).lambdas
            lam_post = eig_hermitian(rec.X_post).lambdas
            cls = classify_jump(rec, lam_pre, lam_post)
            n_jumps += 1
            jumped_hist[cls.jumped_count] += 1
            if not cls.verdicts["hoffman_wielandt"].passed:
                hw_fail += 1
            if validity.absolutely_continuous and "disjoint_spectra" in cls.verdicts:
                disjoint_total += 1
                if not cls.verdicts["disjoint_spectra"].passed:
                    disjoint_fail += 1
            if validity.absolutely_continuous and "simultaneity" in cls.verdicts:
                sim_total += 1
                if not cls.verdicts["simultaneity"].passed:
                    sim_fail += 1
            lines.append(jump_record_line(rec.t, rec.commutator, cls))
    summary = {
        "jump_count": n_jumps,
        "hoffman_wielandt_pass_rate": 1.0 - hw_fail / n_jumps if n_jumps else 1.0,
        "jumped_count_histogram": {str(k): v for k, v in sorted(jumped_hist.items())},
        "absolutely_continuous": validity.absolutely_continuous,
    }
    if disjoint_total:
        summary["disjoint_pass_rate"] = 1.0 - disjoint_fail / disjoint_total
    if sim_total:
        summary["simultaneity_pass_rate"] = 1.0 - sim_fail / sim_total
    out_file = Path(args.out) if args.out else run_dir / "jump_report.ndjson"
    with open(out_file, "w", encoding="utf-8") as fh:
        write_jump_report(fh, cfg.echo, lines, summary)
    for key, value in summary.items():
        print(f"{key}: {value}")
    failed = hw_fail > 0 or (validity.absolutely_continuous and (disjoint_fail > 0 or sim_fail > 0))
    if failed:
        raise ValidationFailure("jump checks failed; see the report")
    return EXIT_OK


def cmd_verify(args) -> int:
    run_dir = Path(args.run)
    manifest, cfg = _load_run(run_dir)
    sim = manifest["simulation"]
    levels = [int(sim["steps"]) * (2 ** k) for k in range(args.refine + 1)]
    medians = refinement_study(
        cfg.triplet,
        t_max=float(sim["t_max"]),
        cutoff=cfg.cutoff,
        seed=manifest["master_seed"],
        levels=levels,
        n_paths=args.paths,
    )

    # exclusion statistics and split additivity on the recorded resolution
    base = SimulationConfig(
        t_max=float(sim["t_max"]), steps=int(sim["steps"]), seed=manifest["master_seed"], cutoff=cfg.cutoff
    )
    excluded = 0
    total = 0
    sup_base = []
    for p in range(args.paths):
        path = simulate_path(cfg.triplet, base, p)
        ep = eigen_path(path)
        for m in range(cfg.dim):
            rep = reconstruct(ep, path, cfg.triplet, m)
            excluded += rep.excluded_cells
            total += rep.total_cells
            sup_base.append(rep.sup_residual)
            split = martingale_bv_split(rep, cfg.triplet, quad_samples=2, quad_seed=p)
            add_err = float(np.abs(split.M_path + split.V_path - rep.reconstruction).max())
            if add_err > 1e-10:
                raise ValidationFailure(f"martingale split additivity violated ({add_err:.3e})")
    exclusion_fraction = excluded / total if total else 0.0

    rng = path_generator(manifest["master_seed"], 0, 7)
    dyson = dyson_drift_estimate(2, 1.0, (1.0, -1.0), 1e-4, args.dyson_paths, rng)

    fd_reports = []
    fd_rng = np.random.default_rng(manifest["master_seed"])
    for d in (2, 3):
        done = 0
        while done < args.fd_matrices:
            Z = fd_rng.standard_normal((d, d)) + 1j * fd_rng.standard_normal((d, d))
            X = hermitian_matrix((Z + Z.conj().T) / 2)
            m = int(fd_rng.integers(0, d))
            try:
                order_rep = fd_check(X, m, 2e-3)
                err_rep = fd_check(X, m, 1e-4)
            except StencilError:
                continue
            fd_reports.append(
                {
                    "dim": d,
                    "m": m,
                    "grad_order": order_rep.grad_order,
                    "hess_order": order_rep.hess_order,
                    "grad_err_at_1e-4": err_rep.grad_err,
                    "scale": err_rep.scale,
                }
            )
            done += 1

    pure_jump = cfg.triplet.A.is_zero
    report = {
        "config_echo": cfg.echo,
        "refinement_median_sup_residual": {str(k): v for k, v in medians.items()},
        "pure_jump_exact": bool(pure_jump and max(sup_base) <= 1e-10) if sup_base else None,
        "max_sup_residual_base": max(sup_base) if sup_base else None,
        "exclusion_fraction": exclusion_fraction,
        "dyson_drift": {
            "x0": list(dyson.x0),
            "dt": dyson.dt,
            "n_paths": dyson.n_paths,
            "estimate": list(dyson.estimate),
            "std_error": list(dyson.std_error),
            "repulsion_unit_constant": list(dyson.theory),
            "repulsion_doubled_constant": list(dyson.theory_doubled),
            "z_unit": list(dyson.z_scores),
            "z_doubled": list(dyson.z_scores_doubled),
        },
        "hadamard_fd": fd_reports,
    }
    out_file = Path(args.out) if args.out else run_dir / "verification_report.json"
    with open(out_file, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"refinement medians: {medians}")
    print(f"exclusion fraction: {exclusion_fraction:.3e}")
    print(
        "dyson drift lambda_1: "
        f"{fmt(dyson.estimate[0])} +- {fmt(dyson.std_error[0])} "
        f"(unit constant {fmt(dyson.theory[0])}, doubled {fmt(dyson.theory_doubled[0])})"
    )
    validity = model_validity_flags(cfg.triplet)
    problems = []
    if validity.absolutely_continuous and exclusion_fraction > EXCLUSION_BUDGET:
        problems.append(f"degenerate exclusions {exclusion_fraction:.3e} exceed {EXCLUSION_BUDGET}")
    drift_free = not np.any(cfg.triplet.Psi)
    if (
        pure_jump
        and drift_free
        and cfg.triplet.nu is not None
        and cfg.triplet.nu.symmetric
        and sup_base
        and max(sup_base) > 1e-10
    ):
        # constant between jumps, so the ledger must telescope exactly
        problems.append(f"pure-jump reconstruction residual {max(sup_base):.3e} exceeds 1e-10")
    if not pure_jump:
        vals = [medians[k] for k in sorted(medians)]
        if any(a <= b for a, b in zip(vals, vals[1:])):
            problems.append(f"median residuals not strictly decreasing: {medians}")
    if abs(dyson.z_scores[0]) > 4.0:
        problems.append(f"dyson drift z-score {dyson.z_scores[0]:.2f} exceeds 4")
    if problems:
        raise ValidationFailure("; ".join(problems))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hlevy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate paths and eigenpaths from a model config")
    sim.add_argument("--config", required=True, help="model configuration file (JSON)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--paths", type=int, default=1)
    sim.add_argument("--steps", type=int, default=100)
    sim.add_argument("--t-max", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.set_defaults(func=cmd_simulate)

    jmp = sub.add_parser("jumps", help="classify recorded jumps and check the spectral laws")
    jmp.add_argument("--run", required=True, help="directory produced by simulate")
    jmp.add_argument("--out", default=None, help="report file (default: run/jump_report.ndjson)")
    jmp.set_defaults(func=cmd_jumps)

    ver = sub.add_parser("verify", help="reconstruction residuals, drift estimate, derivative checks")
    ver.add_argument("--run", required=True)
    ver.add_argument("--out", default=None)
    ver.add_argument("--refine", type=int, default=2, help="number of grid doublings")
    ver.add_argument("--paths", type=int, default=20)
    ver.add_argument("--dyson-paths", type=int, default=20_000)
    ver.add_argument("--fd-matrices", type=int, default=10)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EchoMismatchError, ModelError, FileNotFoundError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, StencilError, SecularSolverError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
