"""Risk-score latency measurement and regression/effect-size analysis.

Timed runs use the monotonic clock over auto-sized batches of scorings so
one sample is the mean per-score time of a batch; medians per
configuration suppress scheduler noise. The harness refuses to run
concurrently with itself via a lock file. Fitted coefficients are
hardware-specific: only sign, significance, and the Cohen-f identity are
contractual.
"""

from __future__ import annotations

import math
import os
import statistics
import tempfile
import time
from dataclasses import dataclass

from filelock import FileLock, Timeout
from scipy.stats import distributions

from riskgate.core import HistoryStore, RiskgateError, build_store
from riskgate.engines import (
    ExtendConfig,
    SimpleConfig,
    score_extend,
    score_simple,
)
from riskgate.featurekit.catalog import FeatureCatalog, builtin_catalog

LOCK_PATH = os.path.join(tempfile.gettempdir(), "riskgate-perfbench.lock")


class InsufficientData(RiskgateError):
    """The dataset cannot populate the requested configurations."""


class DegenerateX(RiskgateError):
    """Regression input has fewer than 3 points or a constant predictor."""


class ConcurrentBenchmark(RiskgateError):
    """Another benchmark holds the lock file."""


@dataclass(frozen=True)
class TimingSample:
    engine: str
    feature_count: int
    global_history_size: int
    elapsed_ms: float


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    cohen_f: float
    p_value: float


def cohen_f_from_r_squared(r_squared: float) -> float:
    """sqrt(R^2 / (1 - R^2)); infinite at a perfect fit."""
    if r_squared >= 1.0:
        return math.inf
    return math.sqrt(r_squared / (1.0 - r_squared))


def linfit(xs, ys) -> RegressionFit:
    """Ordinary least squares with R^2, Cohen's f, and the slope F-test p."""
    xs, ys = list(xs), list(ys)
    n = len(xs)
    if n < 3 or len(ys) != n:
        raise DegenerateX("need at least 3 paired points")
    x_mean = sum(xs) / n
    y_mean = sum(ys) / n
    sxx = sum((x - x_mean) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateX("predictor values are all equal")
    sxy = sum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_tot = sum((y - y_mean) ** 2 for y in ys)
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    if ss_tot == 0:
        r_squared = 1.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    if r_squared >= 1.0:
        p_value = 0.0
    else:
        f_stat = r_squared / (1.0 - r_squared) * (n - 2)
        p_value = float(distributions.f.sf(f_stat, 1, n - 2))
    return RegressionFit(slope=slope, intercept=intercept,
                         r_squared=r_squared,
                         cohen_f=cohen_f_from_r_squared(r_squared),
                         p_value=p_value)


def _score_closure(engine: str, view, probes, catalog: FeatureCatalog,
                   extend_cfg: ExtendConfig, simple_cfg: SimpleConfig):
    """Callable scoring one probe event per invocation, cycling the probes."""
    if engine == "extend":
        def run(i, _probes=probes, _n=len(probes)):
            event = _probes[i % _n]
            return score_extend(view, event.user, event.features, extend_cfg,
                                catalog, threshold=math.inf)
    elif engine == "simple":
        def run(i, _probes=probes, _n=len(probes)):
            event = _probes[i % _n]
            return score_simple(view, event.user, event.features,
                                event.timestamp, simple_cfg,
                                threshold=math.inf)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return run


def _timed_samples(run, *, warmup: int, runs: int, engine: str,
                   feature_count: int, history_size: int) -> list[TimingSample]:
    # Auto-size the batch so one timed run spans >= ~10 ms of work; long
    # batches keep scheduler noise out of the per-call means.
    for _ in range(warmup):
        run(0)
    probe_start = time.perf_counter_ns()
    run(1)
    per_call = max(time.perf_counter_ns() - probe_start, 1)
    batch = max(1, int(10_000_000 / per_call))
    samples = []
    counter = 0
    for _ in range(runs):
        start = time.perf_counter_ns()
        for _ in range(batch):
            run(counter)
            counter += 1
        elapsed = (time.perf_counter_ns() - start) / batch / 1e6
        samples.append(TimingSample(engine=engine, feature_count=feature_count,
                                    global_history_size=history_size,
                                    elapsed_ms=elapsed))
    return samples


def _acquire_lock() -> FileLock:
    lock = FileLock(LOCK_PATH)
    try:
        lock.acquire(timeout=0)
    except Timeout:
        raise ConcurrentBenchmark(f"lock held: {LOCK_PATH}")
    return lock


def bench_history_scaling(engine: str, events, sizes, *,
                          catalog: FeatureCatalog | None = None,
                          extend_cfg: ExtendConfig | None = None,
                          simple_cfg: SimpleConfig | None = None,
                          warmup: int = 5, runs: int = 30,
                          probe_count: int = 32) -> list[TimingSample]:
    """Scoring time at increasing global history sizes.

    ``sizes`` must be strictly increasing and reachable from the dataset's
    legitimate logins; the store grows incrementally and is sampled at
    each checkpoint.
    """
    sizes = list(sizes)
    if sizes != sorted(set(sizes)):
        raise ValueError("sizes must be strictly increasing")
    catalog = catalog or builtin_catalog()
    extend_cfg = extend_cfg or ExtendConfig()
    simple_cfg = simple_cfg or SimpleConfig()
    legit = [e for e in events if e.is_legitimate]
    if not legit or sizes[-1] > len(legit):
        raise InsufficientData(
            f"need {sizes[-1]} legitimate logins, have {len(legit)}")

    lock = _acquire_lock()
    try:
        samples: list[TimingSample] = []
        store = HistoryStore()
        cursor = 0
        feature_count = len(extend_cfg.feature_set) if engine == "extend" \
            else len(simple_cfg.feature_list())
        for size in sizes:
            while cursor < size:
                store.append(legit[cursor])
                cursor += 1
            probes = [legit[(size + i) % len(legit)]
                      for i in range(probe_count)]
            run = _score_closure(engine, store.view(), probes, catalog,
                                 extend_cfg, simple_cfg)
            samples.extend(_timed_samples(
                run, warmup=warmup, runs=runs, engine=engine,
                feature_count=feature_count, history_size=size))
        return samples
    finally:
        lock.release()


def bench_feature_scaling(engine: str, events, counts, *,
                          catalog: FeatureCatalog | None = None,
                          candidate_features=None,
                          smoothing=None,
                          warmup: int = 5, runs: int = 30,
                          probe_count: int = 32) -> list[TimingSample]:
    """Scoring time as the feature set grows.

    Testing every feature combination is infeasible, so the feature whose
    median single-feature time is the median across candidates is added
    repeatedly up to the largest requested count.
    """
    counts = list(counts)
    if counts != sorted(set(counts)) or counts[0] < 1:
        raise ValueError("counts must be strictly increasing and >= 1")
    catalog = catalog or builtin_catalog()
    legit = [e for e in events if e.is_legitimate]
    if not legit:
        raise InsufficientData("dataset has no legitimate logins")
    if candidate_features is None:
        candidate_features = [name for name in catalog.names()
                              if not catalog.get(name).subfeatures]

    lock = _acquire_lock()
    try:
        store = build_store(legit)
        view = store.view()
        probes = legit[:probe_count]

        medians = []
        for name in candidate_features:
            run = _make_feature_run(engine, view, probes, catalog, [name],
                                    smoothing)
            timed = _timed_samples(run, warmup=warmup, runs=max(5, runs // 3),
                                   engine=engine, feature_count=1,
                                   history_size=view.total_logins)
            medians.append((statistics.median(s.elapsed_ms for s in timed),
                            name))
        medians.sort()
        representative = medians[len(medians) // 2][1]

        samples: list[TimingSample] = []
        for count in counts:
            run = _make_feature_run(engine, view, probes, catalog,
                                    [representative] * count, smoothing)
            samples.extend(_timed_samples(
                run, warmup=warmup, runs=runs, engine=engine,
                feature_count=count, history_size=view.total_logins))
        return samples
    finally:
        lock.release()


def _make_feature_run(engine: str, view, probes, catalog, feature_list,
                      smoothing):
    if engine == "extend":
        cfg = ExtendConfig(feature_set=tuple(feature_list),
                           smoothing=smoothing) if smoothing else \
            ExtendConfig(feature_set=tuple(feature_list))
        return _score_closure("extend", view, probes, catalog, cfg,
                              SimpleConfig())
    cfg = SimpleConfig(variant="custom", features=tuple(feature_list))
    return _score_closure("simple", view, probes, catalog, ExtendConfig(), cfg)


def median_by_config(samples) -> dict[tuple[str, int, int], float]:
    """Median elapsed ms keyed by (engine, feature count, history size)."""
    grouped: dict[tuple[str, int, int], list[float]] = {}
    for s in samples:
        key = (s.engine, s.feature_count, s.global_history_size)
        grouped.setdefault(key, []).append(s.elapsed_ms)
    return {key: statistics.median(values) for key, values in grouped.items()}


def fit_history_scaling(samples) -> RegressionFit:
    return linfit([s.global_history_size for s in samples],
                  [s.elapsed_ms for s in samples])


def fit_feature_scaling(samples) -> RegressionFit:
    return linfit([s.feature_count for s in samples],
                  [s.elapsed_ms for s in samples])
