"""Session replay: point-in-time scoring of every legitimate login.

Each legitimate login is scored against the state holding all users'
prior legitimate logins, the decision is recorded, and only then is the
event appended. Attack-labeled events pass through the log without ever
touching counts, so interleaving them changes no verdict.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

from riskgate.core import HistoryStore, LoginEvent
from riskgate.engines import ExtendConfig, SimpleConfig, score_extend, score_simple
from riskgate.featurekit.catalog import FeatureCatalog


@dataclass(frozen=True)
class ReplayRecord:
    user: str
    ordinal: int  # 1-based index within the user's legitimate history
    timestamp: int
    score: float
    challenged: bool


@dataclass(frozen=True)
class SizeBucket:
    size: int
    user_count: int
    median_count: float
    median_rate: float


@dataclass
class ReplayOutcome:
    records: list[ReplayRecord]
    buckets: list[SizeBucket]


def simple_score_fn(cfg: SimpleConfig):
    def fn(view, event: LoginEvent) -> float:
        return score_simple(view, event.user, event.features, event.timestamp,
                            cfg, threshold=math.inf).score
    return fn


def extend_score_fn(cfg: ExtendConfig, catalog: FeatureCatalog):
    def fn(view, event: LoginEvent) -> float:
        return score_extend(view, event.user, event.features, cfg, catalog,
                            threshold=math.inf).score
    return fn


def replay_scores(events, score_fns: dict[str, object]):
    """One chronological pass scoring every legitimate login with each fn.

    Returns (keys, rows) where rows are (user, ordinal, timestamp, scores)
    and scores lists one float per key in order. The shared pass keeps
    multi-engine and multi-feature-set sweeps linear in the dataset.
    """
    keys = list(score_fns)
    fns = [score_fns[k] for k in keys]
    store = HistoryStore()
    rows = []
    for event in events:
        if event.is_legitimate:
            view = store.view()
            ordinal = view.user_login_count(event.user) + 1
            rows.append((event.user, ordinal, event.timestamp,
                         [fn(view, event) for fn in fns]))
        store.append(event)
    return keys, rows


def replay(events, score_fn, threshold: float) -> ReplayOutcome:
    """Replay the dataset with one engine at one threshold."""
    _, rows = replay_scores(events, {"engine": score_fn})
    records = [ReplayRecord(user=user, ordinal=ordinal, timestamp=ts,
                            score=scores[0],
                            challenged=scores[0] >= threshold)
               for user, ordinal, ts, scores in rows]
    return ReplayOutcome(records=records, buckets=aggregate_by_size(records))


def apply_threshold(rows, key_index: int, threshold: float) -> list[ReplayRecord]:
    """Decisions for one score stream out of a replay_scores result."""
    return [ReplayRecord(user=user, ordinal=ordinal, timestamp=ts,
                         score=scores[key_index],
                         challenged=scores[key_index] >= threshold)
            for user, ordinal, ts, scores in rows]


def aggregate_by_size(records) -> list[SizeBucket]:
    """Median re-auth count and rate within users' first s logins.

    For each history size s, over users holding at least s logins, the
    per-user statistic is the challenge count among that user's first s
    logins (cumulative interpretation).
    """
    per_user: dict[str, list[bool]] = {}
    for record in records:
        per_user.setdefault(record.user, []).append(record.challenged)
    if not per_user:
        return []
    max_size = max(len(flags) for flags in per_user.values())
    buckets = []
    for size in range(1, max_size + 1):
        counts = [sum(flags[:size]) for flags in per_user.values()
                  if len(flags) >= size]
        median_count = statistics.median(counts)
        buckets.append(SizeBucket(size=size, user_count=len(counts),
                                  median_count=median_count,
                                  median_rate=median_count / size))
    return buckets


def logins_until_reauth(history_size: int, median_reauth_count: float) -> float:
    """History size divided by the median re-auth count; inf when zero."""
    if history_size < 1:
        raise ValueError("history size must be >= 1")
    if median_reauth_count == 0:
        return math.inf
    return history_size / median_reauth_count


def required_history_size(outcome: ReplayOutcome,
                          min_users_per_bucket: int = 30) -> int | None:
    """Smallest size above which the median re-auth rate stays below 0.5.

    Only buckets with at least ``min_users_per_bucket`` users count as
    evidence. Returns 0 when every valid bucket is already below 0.5 and
    None when the largest valid bucket still violates the bound (no stable
    point observable within the valid range).
    """
    valid = [b for b in outcome.buckets if b.user_count >= min_users_per_bucket]
    if not valid:
        return None
    max_valid = max(b.size for b in valid)
    violations = [b.size for b in valid if b.median_rate >= 0.5]
    if not violations:
        return 0
    worst = max(violations)
    if worst == max_valid:
        return None
    return worst
