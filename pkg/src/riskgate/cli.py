"""Operator entry point: reproducible pipeline runs over on-disk artifacts.

Commands compose through the output directory: `generate` writes the
dataset, lookup table, and attacker pool; `calibrate` turns attack scores
into thresholds; `replay` produces per-size re-authentication aggregates;
`featbench` and `perfbench` run the benchmarks; `report` renders the
result tables. Every command writes a manifest (config hash, seed,
version, input hashes) alongside its outputs, and reruns with identical
inputs are byte-identical. No command touches the network.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from pathlib import Path

from riskgate import __version__
from riskgate.core import (
    RiskgateError,
    build_store,
    dataset_meta_for,
    load_dataset,
    save_dataset,
)
from riskgate.engines import ExtendConfig, SimpleConfig, score_extend, score_simple
from riskgate.evalsuite import (
    aggregate_by_size,
    apply_threshold,
    calibrate,
    logins_until_reauth,
    qualify_features,
    render_dots,
    replay_scores,
    required_history_size,
)
from riskgate.evalsuite.replay import ReplayOutcome
from riskgate.featurekit import PrefixTable, SmoothingConfig, builtin_catalog
from riskgate.featurekit.derive import enrich_dataset
from riskgate.perfbench import (
    bench_feature_scaling,
    bench_history_scaling,
    fit_feature_scaling,
    fit_history_scaling,
    median_by_config,
)
from riskgate.synth import PoolEntry, PopulationConfig, generate_world, sample_attacks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3

# Deterministic sub-seeds derived from the run seed, one per concern.
SEED_ATTACKS = 1
SEED_FEATBENCH = 2
SEED_PERF_DATASET = 3


class ConfigInvalid(RiskgateError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ArtifactMissing(RiskgateError):
    pass


DEFAULT_CONFIG: dict = {
    "seed": 42,
    "dataset": None,
    "generator": {
        "userCount": 780,
        "meanLoginsPerUser": 12.25,
        "loginDispersion": 0.785,
        "desktopFraction": 0.811,
        "regionCount": 12,
        "regionConcentration": 0.6,
        "travelProbability": 0.05,
        "durationDays": 600,
    },
    "lookupPath": None,
    "engine": {
        "models": ["extend", "simple-ipua", "simple-all"],
        "extendFeatureSet": ["ip_weighted", "ua_weighted"],
        "smoothing": {"alphaUser": 1.0, "betaGlobal": 0.5},
        "lastLoginWindowDays": 31,
        "catalogOverrides": {},
    },
    "attacker": {
        "models": ["naive", "vpn", "targeted"],
        "attacksPerUser": 25,
        "poolPath": None,
    },
    "evaluation": {
        "targetTPRs": [0.9992, 0.9947, 0.9900, 0.9799],
        "minUsersPerBucket": 30,
        "historySize": 12,
        "featbenchTPR": 0.8,
        "thresholds": {"entropy": 0.1, "uniqueValues": 10, "rsr": 0.1},
    },
    "perf": {
        "historySizes": [1000, 10000, 100000],
        "featureCounts": [1, 2, 3, 4, 5, 6, 7, 8],
        "warmup": 5,
        "runs": 30,
    },
    "sidecar": {
        "engine": "extend",
        "thresholds": {"extend": 5.0, "simple": 0.5},
        "hashValues": False,
        "addr": "127.0.0.1:8600",
        "storePath": None,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("config", f"malformed JSON: {exc}")
    if not isinstance(user, dict):
        raise ConfigInvalid("config", "top level must be an object")
    merged = _merge(DEFAULT_CONFIG, user)
    # a config that names a dataset replaces the default generator section
    if user.get("dataset") and "generator" not in user:
        merged["generator"] = None
    return merged


def validate_config(cfg: dict) -> None:
    has_dataset = bool(cfg.get("dataset"))
    has_generator = cfg.get("generator") is not None
    if has_dataset == has_generator:
        raise ConfigInvalid("dataset|generator",
                            "exactly one of dataset path or generator "
                            "section must be present")
    if has_dataset and not Path(cfg["dataset"]).exists():
        raise ConfigInvalid("dataset", f"file not found: {cfg['dataset']}")
    if not isinstance(cfg.get("seed"), int):
        raise ConfigInvalid("seed", "must be an integer")
    for key in ("lookupPath",):
        if cfg.get(key) and not Path(cfg[key]).exists():
            raise ConfigInvalid(key, f"file not found: {cfg[key]}")
    pool_path = cfg["attacker"].get("poolPath")
    if pool_path and not Path(pool_path).exists():
        raise ConfigInvalid("attacker.poolPath",
                            f"file not found: {pool_path}")
    for tpr in cfg["evaluation"]["targetTPRs"]:
        if not 0.0 < float(tpr) <= 1.0:
            raise ConfigInvalid("evaluation.targetTPRs",
                                f"TPR {tpr} outside (0, 1]")
    smoothing = cfg["engine"]["smoothing"]
    if smoothing["alphaUser"] <= 0 or smoothing["betaGlobal"] <= 0:
        raise ConfigInvalid("engine.smoothing", "constants must be positive")
    for model in cfg["engine"]["models"]:
        if model not in ("extend", "simple-ipua", "simple-all"):
            raise ConfigInvalid("engine.models", f"unknown engine {model!r}")


# -- manifest -----------------------------------------------------------------

def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(out: Path, command: str, cfg: dict,
                   inputs: dict[str, Path], outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "configHash": _config_hash(cfg),
        "seed": cfg["seed"],
        "version": __version__,
        "inputs": {name: _sha256_file(path)
                   for name, path in sorted(inputs.items())},
        "outputs": sorted(outputs),
    }
    path = out / f"{command}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(value: float) -> str:
    """Shortest exact representation; floats must round-trip through CSV."""
    if value == math.inf:
        return "inf"
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- shared pipeline pieces -----------------------------------------------------

def _artifact(out: Path, name: str, override: str | None = None) -> Path:
    path = Path(override) if override else out / name
    if not path.exists():
        raise ArtifactMissing(
            f"{path} not found; run the producing command first or point "
            "the config at an existing file")
    return path


def _load_world(cfg: dict, out: Path):
    """Dataset + lookup + pool as enriched, scoreable objects."""
    catalog = builtin_catalog().with_overrides(
        cfg["engine"].get("catalogOverrides", {}))
    dataset_path = Path(cfg["dataset"]) if cfg.get("dataset") \
        else _artifact(out, "dataset.jsonl")
    lookup_path = _artifact(out, "lookup.csv", cfg.get("lookupPath"))
    pool_path = _artifact(out, "attacker_pool.txt",
                          cfg["attacker"].get("poolPath"))
    if not dataset_path.exists():
        raise ArtifactMissing(f"{dataset_path} not found")
    meta, events = load_dataset(dataset_path)
    lookup = PrefixTable.load(lookup_path)
    pool = load_pool(pool_path)
    events = enrich_dataset(events, catalog, lookup)
    inputs = {"dataset": dataset_path, "lookup": lookup_path,
              "pool": pool_path}
    return catalog, events, lookup, pool, inputs


def load_pool(path) -> list[PoolEntry]:
    pool = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            country = parts[1] if len(parts) > 1 and parts[1] else None
            pool.append(PoolEntry(cidr=parts[0], country=country))
    return pool


def save_pool(path, pool: list[PoolEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# cidr,country\n")
        for entry in pool:
            fh.write(f"{entry.cidr},{entry.country or ''}\n")


def _engine_fns(cfg: dict, catalog):
    """Engine name -> point-in-time score function."""
    smoothing = SmoothingConfig(
        alpha_user=cfg["engine"]["smoothing"]["alphaUser"],
        beta_global=cfg["engine"]["smoothing"]["betaGlobal"])
    extend_cfg = ExtendConfig(
        feature_set=tuple(cfg["engine"]["extendFeatureSet"]),
        smoothing=smoothing)
    window = cfg["engine"]["lastLoginWindowDays"]
    fns = {}
    for model in cfg["engine"]["models"]:
        if model == "extend":
            fns[model] = _extend_fn(extend_cfg, catalog)
        else:
            variant = "IPUA" if model == "simple-ipua" else "ALL"
            fns[model] = _simple_fn(SimpleConfig(
                variant=variant, last_login_window_days=window))
    return fns, extend_cfg, smoothing


def _extend_fn(extend_cfg, catalog):
    def fn(view, event):
        return score_extend(view, event.user, event.features, extend_cfg,
                            catalog, threshold=math.inf).score
    return fn


def _simple_fn(simple_cfg):
    def fn(view, event):
        return score_simple(view, event.user, event.features,
                            event.timestamp, simple_cfg,
                            threshold=math.inf).score
    return fn


# -- commands -------------------------------------------------------------------

def cmd_generate(cfg: dict, out: Path) -> int:
    gen = cfg["generator"]
    if gen is None:
        raise ConfigInvalid("generator", "generate requires a generator section")
    pop_cfg = PopulationConfig(
        user_count=int(gen["userCount"]),
        seed=int(cfg["seed"]),
        mean_logins_per_user=float(gen["meanLoginsPerUser"]),
        login_dispersion=float(gen["loginDispersion"]),
        desktop_fraction=float(gen["desktopFraction"]),
        region_count=int(gen["regionCount"]),
        region_concentration=float(gen["regionConcentration"]),
        travel_probability=float(gen["travelProbability"]),
        duration_days=int(gen["durationDays"]))
    world = generate_world(pop_cfg)
    meta = dataset_meta_for(world.events)
    save_dataset(out / "dataset.jsonl", meta, world.events)
    world.lookup.save(out / "lookup.csv")
    save_pool(out / "attacker_pool.txt", world.pool)
    write_manifest(out, "generate", cfg, {},
                   ["dataset.jsonl", "lookup.csv", "attacker_pool.txt"])
    print(f"generated {len(world.events)} logins for "
          f"{meta.user_count} users -> {out}")
    return EXIT_OK


def cmd_calibrate(cfg: dict, out: Path) -> int:
    catalog, events, lookup, pool, inputs = _load_world(cfg, out)
    fns, _, _ = _engine_fns(cfg, catalog)
    store = build_store(events)
    view = store.view()
    attacks = sample_attacks(
        view, pool, models=tuple(cfg["attacker"]["models"]),
        attacks_per_user=int(cfg["attacker"]["attacksPerUser"]),
        seed=cfg["seed"] + SEED_ATTACKS, catalog=catalog, lookup=lookup)

    scores: dict[str, dict[str, list[float]]] = {}
    rows = []
    for engine, fn in sorted(fns.items()):
        scores[engine] = {}
        for model in cfg["attacker"]["models"]:
            stream = [fn(view, event) for event in attacks[model]]
            scores[engine][model] = stream
            for target in cfg["evaluation"]["targetTPRs"]:
                result = calibrate(stream, float(target))
                rows.append([engine, model, _fmt(float(target)),
                             _fmt(result.threshold),
                             _fmt(result.achieved_tpr),
                             result.attack_score_count])
    _write_csv(out / "calibration.csv",
               ["engine", "attacker", "targetTPR", "threshold",
                "achievedTPR", "attackScores"], rows)
    with open(out / "attack_scores.json", "w", encoding="utf-8") as fh:
        json.dump(scores, fh, sort_keys=True)
        fh.write("\n")
    write_manifest(out, "calibrate", cfg, inputs,
                   ["calibration.csv", "attack_scores.json"])
    print(f"calibrated {len(rows)} thresholds -> {out / 'calibration.csv'}")
    return EXIT_OK


def _read_calibration(out: Path) -> list[dict]:
    path = _artifact(out, "calibration.csv")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_replay(cfg: dict, out: Path) -> int:
    catalog, events, lookup, pool, inputs = _load_world(cfg, out)
    fns, _, _ = _engine_fns(cfg, catalog)
    calibration = _read_calibration(out)
    inputs["calibration"] = out / "calibration.csv"

    keys, rows = replay_scores(events, fns)
    outputs = []
    for engine in keys:
        index = keys.index(engine)
        score_rows = [[user, ordinal, ts, _fmt(scores[index])]
                      for user, ordinal, ts, scores in rows]
        name = f"replay_scores_{engine}.csv"
        _write_csv(out / name, ["user", "ordinal", "ts", "score"], score_rows)
        outputs.append(name)

    summary = []
    history_size = int(cfg["evaluation"]["historySize"])
    min_users = int(cfg["evaluation"]["minUsersPerBucket"])
    for row in calibration:
        engine = row["engine"]
        if engine not in keys:
            continue
        threshold = float(row["threshold"])
        records = apply_threshold(rows, keys.index(engine), threshold)
        buckets = aggregate_by_size(records)
        name = (f"reauth_{engine}_{row['attacker']}_"
                f"tpr{row['targetTPR']}.csv")
        _write_csv(out / name,
                   ["size", "users", "medianCount", "medianRate"],
                   [[b.size, b.user_count, _fmt(b.median_count),
                     _fmt(b.median_rate)] for b in buckets])
        outputs.append(name)
        outcome = ReplayOutcome(records=records, buckets=buckets)
        at_size = next((b for b in buckets if b.size == history_size), None)
        median_count = at_size.median_count if at_size else 0.0
        summary.append([
            engine, row["attacker"], row["targetTPR"], row["achievedTPR"],
            _fmt(threshold),
            _fmt(logins_until_reauth(history_size, median_count)),
            _format_required(required_history_size(outcome, min_users)),
        ])
    _write_csv(out / "replay_summary.csv",
               ["engine", "attacker", "targetTPR", "achievedTPR", "threshold",
                "medianLoginsUntilReauth", "requiredHistorySize"], summary)
    outputs.append("replay_summary.csv")
    write_manifest(out, "replay", cfg, inputs, outputs)
    print(f"replayed {len(rows)} logins across {len(keys)} engines -> {out}")
    return EXIT_OK


def _format_required(value: int | None) -> str:
    return "none" if value is None else str(value)


def cmd_featbench(cfg: dict, out: Path) -> int:
    catalog, events, lookup, pool, inputs = _load_world(cfg, out)
    thresholds = cfg["evaluation"]["thresholds"]
    smoothing = SmoothingConfig(
        alpha_user=cfg["engine"]["smoothing"]["alphaUser"],
        beta_global=cfg["engine"]["smoothing"]["betaGlobal"])
    rows = qualify_features(
        events, catalog, pool=pool, lookup=lookup,
        seed=cfg["seed"] + SEED_FEATBENCH,
        attacks_per_user=int(cfg["attacker"]["attacksPerUser"]),
        smoothing=smoothing,
        entropy_threshold=float(thresholds["entropy"]),
        unique_threshold=int(thresholds["uniqueValues"]),
        rsr_threshold=float(thresholds["rsr"]),
        target_tpr=float(cfg["evaluation"]["featbenchTPR"]),
        history_size=int(cfg["evaluation"]["historySize"]))

    csv_rows = [[r.feature, _fmt(r.rsr_normalized), _fmt(r.rsr_basic),
                 _fmt(r.h_global), _fmt(r.h_user_mean), r.unique_global,
                 "" if r.unique_desktop is None else r.unique_desktop,
                 "" if r.unique_mobile is None else r.unique_mobile,
                 _fmt(r.median_logins_until_reauth),
                 int(r.pass_a), int(r.pass_b), int(r.pass_c), r.category,
                 int(r.server_side), int(r.script_free),
                 "" if r.p_reauth is None else _fmt(r.p_reauth)]
                for r in rows]
    _write_csv(out / "featbench.csv",
               ["feature", "rsrNormalized", "rsrBasic", "hGlobal",
                "hUserMean", "uniqueGlobal", "uniqueDesktop", "uniqueMobile",
                "medianLoginsUntilReauth", "passA", "passB", "passC",
                "category", "serverSide", "scriptFree", "pReauth"], csv_rows)
    _render_feature_table(out / "featbench.txt", rows)
    write_manifest(out, "featbench", cfg, inputs,
                   ["featbench.csv", "featbench.txt"])
    print(f"benchmarked {len(rows)} features -> {out / 'featbench.csv'}")
    return EXIT_OK


def _render_feature_table(path: Path, rows) -> None:
    lines = []
    header = (f"{'Feature':<16} {'Cat':<11} {'JS-free':<8} {'RSR':>8} "
              f"{'Hglob':>7} {'Huser':>7} {'Unique':<6} {'Reauth@12':>10}")
    lines.append(header)
    lines.append("-" * len(header))
    for r in rows:
        reauth = "inf" if r.median_logins_until_reauth == math.inf \
            else f"{r.median_logins_until_reauth:.2f}"
        lines.append(
            f"{r.feature:<16} {r.category:<11} "
            f"{'yes' if r.script_free else 'no':<8} "
            f"{r.rsr_normalized:>8.2f} {r.h_global:>7.2f} "
            f"{r.h_user_mean:>7.2f} {render_dots(r.unique_global):<6} "
            f"{reauth:>10}")
    lines.append("")
    lines.append("Unique values: five dot scale "
                 "(10-24, 25-74, 75-149, 150-300, >300).")
    lines.append("Baselines: zero-entropy feature (single), "
                 "IP address (add-on).")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_perfbench(cfg: dict, out: Path) -> int:
    perf = cfg["perf"]
    sizes = [int(s) for s in perf["historySizes"]]
    counts = [int(c) for c in perf["featureCounts"]]
    catalog = builtin_catalog().with_overrides(
        cfg["engine"].get("catalogOverrides", {}))

    # The perf corpus is sized to the largest history checkpoint and is
    # independent of the evaluation dataset.
    gen = cfg.get("generator") or DEFAULT_CONFIG["generator"]
    users_needed = max(1, int(sizes[-1] / float(gen["meanLoginsPerUser"])
                              * 1.15))
    pop_cfg = PopulationConfig(user_count=users_needed,
                               seed=cfg["seed"] + SEED_PERF_DATASET)
    world = generate_world(pop_cfg)
    events = enrich_dataset(world.events, catalog, world.lookup)

    smoothing = SmoothingConfig(
        alpha_user=cfg["engine"]["smoothing"]["alphaUser"],
        beta_global=cfg["engine"]["smoothing"]["betaGlobal"])
    extend_cfg = ExtendConfig(
        feature_set=tuple(cfg["engine"]["extendFeatureSet"]),
        smoothing=smoothing)

    samples = []
    fits = []
    for engine in ("extend", "simple"):
        history = bench_history_scaling(
            engine, events, sizes, catalog=catalog, extend_cfg=extend_cfg,
            warmup=int(perf["warmup"]), runs=int(perf["runs"]))
        samples.extend(history)
        fit = fit_history_scaling(history)
        fits.append([engine, "historySize", _fmt(fit.slope),
                     _fmt(fit.intercept), _fmt(fit.r_squared),
                     _fmt(fit.cohen_f), _fmt(fit.p_value)])
        features = bench_feature_scaling(
            engine, events, counts, catalog=catalog, smoothing=smoothing,
            warmup=int(perf["warmup"]), runs=int(perf["runs"]))
        samples.extend(features)
        fit = fit_feature_scaling(features)
        fits.append([engine, "featureCount", _fmt(fit.slope),
                     _fmt(fit.intercept), _fmt(fit.r_squared),
                     _fmt(fit.cohen_f), _fmt(fit.p_value)])

    _write_csv(out / "perf_samples.csv",
               ["engine", "featureCount", "historySize", "elapsedMs"],
               [[s.engine, s.feature_count, s.global_history_size,
                 _fmt(s.elapsed_ms)] for s in samples])
    medians = median_by_config(samples)
    _write_csv(out / "perf_medians.csv",
               ["engine", "featureCount", "historySize", "medianMs"],
               [[k[0], k[1], k[2], _fmt(v)]
                for k, v in sorted(medians.items())])
    _write_csv(out / "perf_fits.csv",
               ["engine", "predictor", "slope", "intercept", "rSquared",
                "cohenF", "pValue"], fits)
    write_manifest(out, "perfbench", cfg, {},
                   ["perf_samples.csv", "perf_medians.csv", "perf_fits.csv"])
    print(f"perf benchmark complete -> {out / 'perf_fits.csv'}")
    return EXIT_OK


def cmd_report(cfg: dict, out: Path) -> int:
    summary_path = _artifact(out, "replay_summary.csv")
    with open(summary_path, "r", encoding="utf-8", newline="") as fh:
        summary = list(csv.DictReader(fh))

    table1 = [[row["engine"], row["attacker"], row["achievedTPR"],
               row["medianLoginsUntilReauth"], row["requiredHistorySize"]]
              for row in summary]
    table1.sort(key=lambda r: (r[0], r[1], -float(r[2])))
    _write_csv(out / "report_table1.csv",
               ["engine", "attacker", "achievedTPR",
                "medianLoginsUntilReauth", "requiredHistorySize"], table1)
    outputs = ["report_table1.csv"]
    inputs = {"replay_summary": summary_path}

    # Fig-2-style plot-ready columns: one file per engine/attacker pair,
    # rate curves per achieved TPR side by side.
    by_pair: dict[tuple[str, str], list[dict]] = {}
    for row in summary:
        by_pair.setdefault((row["engine"], row["attacker"]), []).append(row)
    for (engine, attacker), rows_for_pair in sorted(by_pair.items()):
        series = []
        for row in rows_for_pair:
            name = (f"reauth_{engine}_{attacker}_"
                    f"tpr{row['targetTPR']}.csv")
            path = out / name
            if not path.exists():
                raise ArtifactMissing(f"{path} not found; rerun replay")
            inputs[name] = path
            with open(path, "r", encoding="utf-8", newline="") as fh:
                series.append((row["achievedTPR"], list(csv.DictReader(fh))))
        max_size = max((int(r["size"]) for _, rows_ in series
                        for r in rows_), default=0)
        header = ["size"] + [f"rate@tpr{tpr}" for tpr, _ in series] + \
            [f"count@tpr{tpr}" for tpr, _ in series]
        grid = []
        for size in range(1, max_size + 1):
            line: list[object] = [size]
            for _, rows_ in series:
                match = next((r for r in rows_ if int(r["size"]) == size),
                             None)
                line.append(match["medianRate"] if match else "")
            for _, rows_ in series:
                match = next((r for r in rows_ if int(r["size"]) == size),
                             None)
                line.append(match["medianCount"] if match else "")
            grid.append(line)
        name = f"report_fig2_{engine}_{attacker}.csv"
        _write_csv(out / name, header, grid)
        outputs.append(name)

    feat_path = out / "featbench.csv"
    if feat_path.exists():
        inputs["featbench"] = feat_path
        outputs.append("featbench.txt")
    write_manifest(out, "report", cfg, inputs, outputs)
    print(f"report tables -> {out}")
    return EXIT_OK


def cmd_serve(cfg: dict, out: Path, addr: str | None = None) -> int:
    from riskgate.sidecar import serve_forever

    catalog, events, lookup, pool, _ = _load_world(cfg, out)
    return serve_forever(cfg, catalog, events, lookup,
                         addr or os.environ.get("RISKGATE_ADDR")
                         or cfg["sidecar"]["addr"])


COMMANDS = {
    "generate": cmd_generate,
    "calibrate": cmd_calibrate,
    "replay": cmd_replay,
    "featbench": cmd_featbench,
    "perfbench": cmd_perfbench,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskgate",
        description="Risk-based authentication engine and evaluation "
                    "workbench")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["serve"]:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None,
                         help="JSON config file (defaults built in)")
        cmd.add_argument("--out", default="out", help="artifact directory")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
        if name == "serve":
            cmd.add_argument("--addr", default=None,
                             help="host:port (or RISKGATE_ADDR)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        validate_config(cfg)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "serve":
            return cmd_serve(cfg, out, addr=args.addr)
        return COMMANDS[args.command](cfg, out)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactMissing as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT


if __name__ == "__main__":
    sys.exit(main())
