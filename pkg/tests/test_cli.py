from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from riskgate.cli import (
    EXIT_ARTIFACT,
    EXIT_CONFIG,
    EXIT_OK,
    ConfigInvalid,
    load_config,
    main,
    validate_config,
)


@pytest.fixture(scope="module")
def small_config(tmp_path_factory):
    """A small end-to-end config so pipeline commands finish quickly."""
    root = tmp_path_factory.mktemp("cli")
    cfg = {
        "seed": 7,
        "generator": {"userCount": 40},
        "attacker": {"attacksPerUser": 3},
        "evaluation": {"targetTPRs": [0.9, 0.5]},
        "engine": {"models": ["extend", "simple-ipua"]},
    }
    path = root / "config.json"
    path.write_text(json.dumps(cfg))
    return path, root / "out"


def run(args):
    return main([str(a) for a in args])


def test_unknown_config_file_is_config_error(tmp_path):
    assert run(["generate", "--config", tmp_path / "missing.json",
                "--out", tmp_path]) == EXIT_CONFIG


def test_config_must_pick_dataset_or_generator(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dataset": None, "generator": None}))
    assert run(["generate", "--config", path, "--out", tmp_path]) == EXIT_CONFIG


def test_dataset_config_drops_default_generator(tmp_path):
    dataset = tmp_path / "d.jsonl"
    dataset.write_text(
        json.dumps({"schemaVersion": 1, "featureNames": ["ip"],
                    "userCount": 1}) + "\n" +
        json.dumps({"user": "u1", "ts": 1, "f.ip": "10.0.0.1"}) + "\n")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"dataset": str(dataset)}))
    cfg = load_config(str(path))
    validate_config(cfg)  # must not raise
    assert cfg["generator"] is None


def test_invalid_tpr_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"evaluation": {"targetTPRs": [1.5]}}))
    assert run(["calibrate", "--config", path, "--out", tmp_path]) == EXIT_CONFIG


def test_replay_before_calibrate_is_artifact_error(small_config):
    config, out = small_config
    fresh = out.parent / "empty-out"
    assert run(["replay", "--config", config, "--out", fresh]) == EXIT_ARTIFACT


def test_pipeline_generate_calibrate_replay_report(small_config):
    config, out = small_config
    assert run(["generate", "--config", config, "--out", out]) == EXIT_OK
    for name in ("dataset.jsonl", "lookup.csv", "attacker_pool.txt",
                 "generate.manifest.json"):
        assert (out / name).exists()

    assert run(["calibrate", "--config", config, "--out", out]) == EXIT_OK
    with open(out / "calibration.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    # two engines x three attacker models x two target TPRs
    assert len(rows) == 2 * 3 * 2
    for row in rows:
        recomputed = json.load(open(out / "attack_scores.json"))
        scores = recomputed[row["engine"]][row["attacker"]]
        achieved = sum(1 for s in scores
                       if s >= float(row["threshold"])) / len(scores)
        assert achieved == pytest.approx(float(row["achievedTPR"]))

    assert run(["replay", "--config", config, "--out", out]) == EXIT_OK
    assert (out / "replay_summary.csv").exists()
    assert (out / "replay_scores_extend.csv").exists()

    assert run(["report", "--config", config, "--out", out]) == EXIT_OK
    assert (out / "report_table1.csv").exists()
    fig2 = list(out.glob("report_fig2_*.csv"))
    assert fig2, "expected fig2-style plot-ready outputs"
    with open(fig2[0], newline="") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "size"
    assert any(col.startswith("rate@tpr") for col in header)


def test_generate_is_deterministic(small_config, tmp_path):
    config, out = small_config
    other = tmp_path / "out2"
    assert run(["generate", "--config", config, "--out", other]) == EXIT_OK
    assert (out / "dataset.jsonl").read_bytes() == \
        (other / "dataset.jsonl").read_bytes()
    assert (out / "lookup.csv").read_bytes() == \
        (other / "lookup.csv").read_bytes()


def test_calibrate_rerun_is_byte_identical(small_config, tmp_path):
    config, out = small_config
    before = (out / "calibration.csv").read_bytes()
    assert run(["calibrate", "--config", config, "--out", out]) == EXIT_OK
    assert (out / "calibration.csv").read_bytes() == before


def test_manifest_contents(small_config):
    config, out = small_config
    manifest = json.loads((out / "calibrate.manifest.json").read_text())
    assert manifest["command"] == "calibrate"
    assert manifest["seed"] == 7
    assert set(manifest["inputs"]) == {"dataset", "lookup", "pool"}
    assert "calibration.csv" in manifest["outputs"]
    assert len(manifest["configHash"]) == 64


def test_seed_flag_overrides_config(small_config, tmp_path):
    config, _ = small_config
    out = tmp_path / "seeded"
    assert run(["generate", "--config", config, "--out", out,
                "--seed", "1234"]) == EXIT_OK
    manifest = json.loads((out / "generate.manifest.json").read_text())
    assert manifest["seed"] == 1234


def test_featbench_command(small_config):
    config, out = small_config
    assert run(["featbench", "--config", config, "--out", out]) == EXIT_OK
    with open(out / "featbench.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    features = {row["feature"] for row in rows}
    assert {"ip", "ua", "const"} <= features
    const_row = next(row for row in rows if row["feature"] == "const")
    assert const_row["category"] == "rejected"
    table = (out / "featbench.txt").read_text()
    assert "●" in table or "○" in table  # dot-scale rendering


def test_default_config_file_matches_builtin():
    repo_default = Path(__file__).parent.parent / "configs" / "default.json"
    cfg = load_config(str(repo_default))
    validate_config(cfg)
    baseline = load_config(None)
    assert cfg == baseline
