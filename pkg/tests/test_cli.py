import json
from pathlib import Path

import numpy as np
import pytest

from hlevy.cli import main
from hlevy.config import ConfigError, load_model_config, parse_model_config
from hlevy.reporting import file_digest, read_path_csv
from hlevy.model import model_validity_flags


GUE_JUMPS = {
    "dim": 2,
    "seed": 7,
    "gaussian": {"form": "gue", "sigma2": 1.0},
    "jumps": {
        "family": "rank_one_uniform",
        "rate": 3.0,
        "radial": {"type": "point_mass", "r0": 0.8},
        "cutoff": 1e-3,
    },
}


def write_config(tmp_path, payload, name="model.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


def test_parse_round_trip(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    cfg = load_model_config(cfg_file)
    assert cfg.dim == 2 and cfg.seed == 7
    assert cfg.triplet.nu is not None
    assert json.loads(cfg.echo) == GUE_JUMPS


def test_parse_errors_name_keys():
    with pytest.raises(ConfigError, match="jumps.family"):
        parse_model_config({**GUE_JUMPS, "jumps": {"family": "nope", "rate": 1.0}})
    with pytest.raises(ConfigError, match="dim"):
        parse_model_config({"seed": 1})
    with pytest.raises(ConfigError, match="gaussian.form"):
        parse_model_config({"dim": 2, "gaussian": {"form": "weird"}})
    with pytest.raises(ConfigError, match="drift"):
        parse_model_config({**GUE_JUMPS, "drift": [1.0, 2.0]})


def test_simulate_writes_run(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    rc = main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "3", "--steps", "16"])
    assert rc == 0
    assert sorted(p.name for p in out.glob("path_*.csv")) == ["path_0000.csv", "path_0001.csv", "path_0002.csv"]
    assert len(list(out.glob("eigenpath_*.csv"))) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 7
    for name, digest in manifest["files"].items():
        assert file_digest(out / name) == digest


def test_simulate_deterministic_outputs(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out1), "--paths", "2", "--steps", "8"]) == 0
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out2), "--paths", "2", "--steps", "8"]) == 0
    m1 = json.loads((out1 / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1["files"] == m2["files"]
    for name in m1["files"]:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_path_file_round_trip_exact(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "1", "--steps", "8"])
    cfg = load_model_config(cfg_file)
    from hlevy.paths import SimulationConfig, simulate_path

    sim = SimulationConfig(t_max=1.0, steps=8, seed=7, cutoff=1e-3)
    original = simulate_path(cfg.triplet, sim, 0)
    with open(out / "path_0000.csv", "r", encoding="utf-8") as fh:
        echo, replay = read_path_csv(fh, model_validity_flags(cfg.triplet), 1e-3)
    assert echo == cfg.echo
    assert np.array_equal(replay.times, original.times)
    assert np.array_equal(replay.states, original.states)
    assert len(replay.jumps) == len(original.jumps)
    for a, b in zip(replay.jumps, original.jumps):
        assert a.t == b.t
        assert np.array_equal(a.X_pre, b.X_pre)
        assert np.array_equal(a.X_post, b.X_post)


def test_invalid_config_exit_code(tmp_path):
    bad = write_config(tmp_path, {**GUE_JUMPS, "jumps": {"family": "unknown", "rate": 1.0}})
    rc = main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")])
    assert rc == 2
    rc2 = main(["jumps", "--run", str(tmp_path / "missing")])
    assert rc2 == 2


def test_jumps_command_noncommutative(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "8", "--steps", "8"])
    rc = main(["jumps", "--run", str(out)])
    assert rc == 0
    report = (out / "jump_report.ndjson").read_text().strip().splitlines()
    head = json.loads(report[0])
    tail = json.loads(report[-1])
    assert "config_echo" in head
    summary = tail["summary"]
    assert summary["jump_count"] > 0
    assert summary["hoffman_wielandt_pass_rate"] == 1.0
    assert summary["simultaneity_pass_rate"] == 1.0
    assert summary["disjoint_pass_rate"] == 1.0


def test_jumps_command_commutative_histogram(tmp_path):
    config = {
        "dim": 2,
        "seed": 11,
        "gaussian": {"form": "none"},
        "jumps": {
            "family": "diagonal_independent",
            "coords": [
                {"rate": 4.0, "radial": {"type": "exponential", "beta": 1.0}},
                {"rate": 4.0, "radial": {"type": "exponential", "beta": 2.0}},
            ],
            "cutoff": 1e-3,
        },
    }
    cfg_file = write_config(tmp_path, config)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "6", "--steps", "8"])
    rc = main(["jumps", "--run", str(out)])
    assert rc == 0
    tail = json.loads((out / "jump_report.ndjson").read_text().strip().splitlines()[-1])
    hist = tail["summary"]["jumped_count_histogram"]
    assert set(hist) == {"1"}


def test_jumps_jump_free_run(tmp_path):
    cfg_file = write_config(tmp_path, {"dim": 2, "seed": 3, "gaussian": {"form": "gue", "sigma2": 1.0}})
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "2", "--steps", "8"])
    rc = main(["jumps", "--run", str(out)])
    assert rc == 0
    tail = json.loads((out / "jump_report.ndjson").read_text().strip().splitlines()[-1])
    assert tail["summary"]["jump_count"] == 0


def test_echo_mismatch_detected(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "1", "--steps", "4"])
    target = out / "path_0000.csv"
    text = target.read_text().splitlines()
    text[0] = '# config: {"tampered":true}'
    target.write_text("\n".join(text) + "\n")
    rc = main(["jumps", "--run", str(out)])
    assert rc == 2


def test_verify_validation_failure_exit_code(tmp_path, monkeypatch):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "1", "--steps", "8"])
    import hlevy.cli as cli_mod

    monkeypatch.setattr(cli_mod, "refinement_study", lambda *a, **k: {8: 1.0, 16: 2.0, 32: 3.0})
    rc = main(
        ["verify", "--run", str(out), "--refine", "2", "--paths", "2", "--dyson-paths", "2000", "--fd-matrices", "2"]
    )
    assert rc == 3


def test_pure_jump_verify_flags_exact(tmp_path):
    config = {
        "dim": 2,
        "seed": 5,
        "gaussian": {"form": "none"},
        "jumps": {
            "family": "rank_one_uniform",
            "rate": 4.0,
            "radial": {"type": "point_mass", "r0": 0.8},
            "sign_symmetric": True,
            "cutoff": 1e-3,
        },
    }
    cfg_file = write_config(tmp_path, config)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "2", "--steps", "8"])
    rc = main(
        ["verify", "--run", str(out), "--refine", "1", "--paths", "4", "--dyson-paths", "2000", "--fd-matrices", "2"]
    )
    assert rc == 0
    report = json.loads((out / "verification_report.json").read_text())
    assert report["pure_jump_exact"] is True
    assert report["max_sup_residual_base"] <= 1e-10


def test_verify_command(tmp_path):
    cfg_file = write_config(tmp_path, GUE_JUMPS)
    out = tmp_path / "run"
    main(["simulate", "--config", str(cfg_file), "--out", str(out), "--paths", "2", "--steps", "16"])
    rc = main(
        [
            "verify",
            "--run",
            str(out),
            "--refine",
            "2",
            "--paths",
            "12",
            "--dyson-paths",
            "4000",
            "--fd-matrices",
            "4",
        ]
    )
    assert rc == 0
    report = json.loads((out / "verification_report.json").read_text())
    meds = {int(k): v for k, v in report["refinement_median_sup_residual"].items()}
    ks = sorted(meds)
    assert len(ks) == 3
    assert meds[ks[0]] > meds[ks[1]] > meds[ks[2]]
    assert report["exclusion_fraction"] <= 1e-3
    assert abs(report["dyson_drift"]["z_unit"][0]) <= 4.0
    for entry in report["hadamard_fd"]:
        assert 1.7 <= entry["grad_order"] <= 2.3
