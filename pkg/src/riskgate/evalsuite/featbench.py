"""Three-test feature benchmark: entropy, value range, and risk separation.

Test A keeps features with minimum global and per-user entropy, Test B
keeps features with more than ten unique values (checked on desktop and
mobile separately when device information is derivable), and Test C keeps
features whose risk-score relation improves on a baseline: a zero-entropy
feature for single-feature tests, the IP address for add-on tests.

Feature sets are evaluated through one shared chronological pass that
records, per legitimate login, the global/user probability ratio of every
candidate descriptor plus the user prior; any feature set's score is then
an algebraic product of stored ratios, identical to the engine's own
evaluation order.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass

from riskgate.core import MISSING, HistoryStore, HistoryView, RiskgateError, build_store
from riskgate.evalsuite.calibration import calibrate
from riskgate.evalsuite.replay import logins_until_reauth
from riskgate.evalsuite.stats import dunn_bonferroni
from riskgate.featurekit.catalog import (
    F_CONST,
    F_IP,
    F_UA_DEVICE,
    DEVICE_DESKTOP,
    DEVICE_MOBILE,
    FeatureCatalog,
)
from riskgate.featurekit.probability import (
    DEFAULT_SMOOTHING,
    SmoothingConfig,
    p_feature_weighted,
)
from riskgate.synth import PoolEntry, sample_attacks


class EmptyDistribution(RiskgateError):
    """Entropy of an empty value distribution is undefined."""


class ZeroLegitimateMean(RiskgateError):
    """Mean legitimate risk score is zero; the RSR quotient is undefined."""


CATEGORY_SINGLE = "single"
CATEGORY_MAJOR_ADDON = "majorAddon"
CATEGORY_ADDON = "addon"
CATEGORY_REJECTED = "rejected"


@dataclass
class FeatureBenchmarkRow:
    feature: str
    h_global: float
    h_user_mean: float
    unique_global: int
    unique_desktop: int | None
    unique_mobile: int | None
    rsr_basic: float
    rsr_normalized: float
    median_logins_until_reauth: float
    pass_a: bool
    pass_b: bool
    pass_c: bool
    category: str
    server_side: bool
    script_free: bool
    p_reauth: float | None = None


# -- Test A: entropy ----------------------------------------------------------

def shannon_entropy(value_counts) -> float:
    """Shannon entropy in bits of an empirical count distribution."""
    counts = [c for c in dict(value_counts).values() if c > 0]
    total = sum(counts)
    if total <= 0:
        raise EmptyDistribution("no observations")
    return -sum((c / total) * math.log2(c / total) for c in counts) + 0.0


def entropy_pair(view: HistoryView, feature: str) -> tuple[float, float]:
    """Global entropy and the mean of per-user entropies for one feature."""
    h_global = shannon_entropy(view.global_values(feature))
    users = view.users()
    per_user = [shannon_entropy(view.user_values(user, feature))
                for user in users]
    return h_global, sum(per_user) / len(per_user)


# -- Test B: unique values ----------------------------------------------------

def unique_value_counts(view: HistoryView, feature: str
                        ) -> tuple[int, int | None, int | None]:
    """Distinct observed values globally and per device class.

    MISSING is a non-observation and never counts as a value. The splits
    are None when no event carries a derivable device type.
    """
    overall: set = set()
    desktop: set = set()
    mobile: set = set()
    device_seen = False
    for event in view.events:
        if not event.is_legitimate:
            continue
        value = event.features.get(feature, MISSING)
        if value == MISSING:
            continue
        overall.add(value)
        device = event.features.get(F_UA_DEVICE, MISSING)
        if device == DEVICE_DESKTOP:
            device_seen = True
            desktop.add(value)
        elif device == DEVICE_MOBILE:
            device_seen = True
            mobile.add(value)
    if not device_seen:
        return len(overall), None, None
    return len(overall), len(desktop), len(mobile)


_DOT_BUCKETS = ((10, 24), (25, 74), (75, 149), (150, 300))


def dot_scale(count: int) -> int:
    """Five-dot scale: (10-24, 25-74, 75-149, 150-300, >300) -> 1..5."""
    for dots, (lo, hi) in enumerate(_DOT_BUCKETS, start=1):
        if lo <= count <= hi:
            return dots
    return 5 if count > 300 else 0


def render_dots(count: int) -> str:
    filled = dot_scale(count)
    return "●" * filled + "○" * (5 - filled)


# -- Test C: risk score relation ----------------------------------------------

def rsr_from_scores(attack_scores, legit_scores) -> float:
    attack = list(attack_scores)
    legit = list(legit_scores)
    if not legit or not attack:
        raise ZeroLegitimateMean("score streams must be non-empty")
    legit_mean = sum(legit) / len(legit)
    if legit_mean == 0:
        raise ZeroLegitimateMean("mean legitimate risk score is zero")
    return (sum(attack) / len(attack)) / legit_mean


def _prior_ratio(view: HistoryView, user: str) -> float:
    users = max(1, view.user_count)
    p_attack = 1.0 / users
    p_legit = (view.user_login_count(user) + 1) / (view.total_logins + users)
    return p_attack / p_legit


def _descriptor_ratio(view, user, descriptor, features,
                      smoothing: SmoothingConfig) -> float:
    pg = p_feature_weighted(view, None, descriptor, features, smoothing)
    pu = p_feature_weighted(view, user, descriptor, features, smoothing)
    return pg / pu


class RatioStreams:
    """Per-login descriptor ratios for legitimate replay and attacks.

    ``legit`` rows: (user, ordinal, ratios, prior) in chronological order,
    scored point-in-time; ``attack`` rows: (victim, ratios, prior) against
    the final history state. Scores for a feature set multiply the
    matching ratios and the prior, in engine evaluation order.
    """

    def __init__(self, names: list[str], legit, attack):
        self.names = names
        self.index = {name: i for i, name in enumerate(names)}
        self.legit = legit
        self.attack = attack

    def legit_scores(self, feature_set) -> list[float]:
        idxs = [self.index[name] for name in feature_set]
        out = []
        for _, _, ratios, prior in self.legit:
            score = 1.0
            for i in idxs:
                score *= ratios[i]
            out.append(score * prior)
        return out

    def attack_scores(self, feature_set) -> list[float]:
        idxs = [self.index[name] for name in feature_set]
        out = []
        for _, ratios, prior in self.attack:
            score = 1.0
            for i in idxs:
                score *= ratios[i]
            out.append(score * prior)
        return out

    def legit_rows(self):
        return self.legit


def build_ratio_streams(events, catalog: FeatureCatalog, names, *,
                        attacks, smoothing: SmoothingConfig = DEFAULT_SMOOTHING
                        ) -> RatioStreams:
    descriptors = [catalog.get(name) for name in names]
    store = HistoryStore()
    legit_rows = []
    for event in events:
        if event.is_legitimate:
            view = store.view()
            ratios = [_descriptor_ratio(view, event.user, d, event.features,
                                        smoothing) for d in descriptors]
            legit_rows.append((event.user, view.user_login_count(event.user) + 1,
                               ratios, _prior_ratio(view, event.user)))
        store.append(event)
    final = store.view()
    attack_rows = []
    for event in attacks:
        ratios = [_descriptor_ratio(final, event.user, d, event.features,
                                    smoothing) for d in descriptors]
        attack_rows.append((event.user, ratios, _prior_ratio(final, event.user)))
    return RatioStreams(names=list(names), legit=legit_rows, attack=attack_rows)


def rsr(events, feature_set, baseline_set, *, catalog: FeatureCatalog,
        pool: list[PoolEntry] | None = None, lookup=None, seed: int = 0,
        attacker_model: str = "targeted", attacks_per_user: int = 25,
        smoothing: SmoothingConfig = DEFAULT_SMOOTHING) -> tuple[float, float]:
    """RSR of a feature set and its value normalized to the baseline set.

    Legitimate scores come from point-in-time replay; attacker scores from
    per-user attacks against the final history state.
    """
    store = build_store(events)
    attacks = sample_attacks(store.view(), pool or [],
                             models=(attacker_model,),
                             attacks_per_user=attacks_per_user, seed=seed,
                             catalog=catalog, lookup=lookup)[attacker_model]
    names = sorted(set(feature_set) | set(baseline_set))
    streams = build_ratio_streams(events, catalog, names, attacks=attacks,
                                  smoothing=smoothing)
    basic = rsr_from_scores(streams.attack_scores(feature_set),
                            streams.legit_scores(feature_set))
    baseline = rsr_from_scores(streams.attack_scores(baseline_set),
                               streams.legit_scores(baseline_set))
    return basic, basic - baseline


# -- full benchmark -----------------------------------------------------------

def _reauth_counts_by_user(legit_rows, scores, threshold: float,
                           history_size: int) -> list[int]:
    """Challenge counts within each user's first ``history_size`` logins."""
    per_user: dict[str, int] = {}
    totals: dict[str, int] = {}
    for (user, ordinal, _, _), score in zip(legit_rows, scores):
        totals[user] = max(totals.get(user, 0), ordinal)
        if ordinal <= history_size and score >= threshold:
            per_user[user] = per_user.get(user, 0) + 1
    return [per_user.get(user, 0) for user, total in sorted(totals.items())
            if total >= history_size]


def qualify_features(events, catalog: FeatureCatalog, *,
                     pool: list[PoolEntry] | None = None, lookup=None,
                     seed: int = 0, attacks_per_user: int = 25,
                     smoothing: SmoothingConfig = DEFAULT_SMOOTHING,
                     entropy_threshold: float = 0.1,
                     unique_threshold: int = 10,
                     rsr_threshold: float = 0.1,
                     target_tpr: float = 0.8,
                     history_size: int = 12,
                     attacker_model: str = "targeted",
                     features: list[str] | None = None,
                     with_stats: bool = True) -> list[FeatureBenchmarkRow]:
    """One benchmark row per catalog feature, sorted by normalized RSR.

    ``events`` must already be enriched with derived subfeatures. The
    single-feature RSR baseline is the zero-entropy constant feature; the
    add-on baseline is the IP address. The re-authentication column is
    computed at the target TPR against the configured attacker model for
    users with at least ``history_size`` logins.
    """
    store = build_store(events)
    final = store.view()
    if final.user_count < 2:
        raise ValueError("feature benchmark needs at least two users")
    names = list(features) if features is not None else catalog.names()
    for required in (F_CONST, F_IP):
        if required not in names:
            names.append(required)

    attacks = sample_attacks(final, pool or [], models=(attacker_model,),
                             attacks_per_user=attacks_per_user, seed=seed,
                             catalog=catalog, lookup=lookup)[attacker_model]
    streams = build_ratio_streams(events, catalog, names, attacks=attacks,
                                  smoothing=smoothing)

    rsr_single = {name: rsr_from_scores(streams.attack_scores([name]),
                                        streams.legit_scores([name]))
                  for name in names}
    rsr_pair = {name: rsr_from_scores(streams.attack_scores([F_IP, name]),
                                      streams.legit_scores([F_IP, name]))
                for name in names}

    reauth_counts: dict[str, list[int]] = {}
    reauth_median: dict[str, float] = {}
    for name in names:
        attack_scores = streams.attack_scores([name])
        legit_scores = streams.legit_scores([name])
        threshold = calibrate(attack_scores, target_tpr).threshold
        counts = _reauth_counts_by_user(streams.legit_rows(), legit_scores,
                                        threshold, history_size)
        reauth_counts[name] = counts
        reauth_median[name] = statistics.median(counts) if counts else 0.0

    p_single, p_addon = {}, {}
    if with_stats:
        p_single = _dunn_vs_baseline(reauth_counts, names, F_CONST)
        p_addon = _dunn_vs_baseline(reauth_counts, names, F_IP)

    rows = []
    for name in names:
        descriptor = catalog.get(name)
        h_global, h_user = entropy_pair(final, _entropy_key(descriptor))
        uniq, uniq_desktop, uniq_mobile = unique_value_counts(
            final, _entropy_key(descriptor))
        pass_a = h_global > entropy_threshold and h_user > entropy_threshold
        pass_b = uniq > unique_threshold and all(
            split is None or split > unique_threshold
            for split in (uniq_desktop, uniq_mobile))
        c_single = rsr_single[name] - rsr_single[F_CONST] > rsr_threshold
        c_addon = rsr_pair[name] - rsr_single[F_IP] > rsr_threshold

        if pass_a and pass_b and c_single and descriptor.server_side:
            category = CATEGORY_SINGLE
            normalized = rsr_single[name] - rsr_single[F_CONST]
            p_value = p_single.get(name)
        elif pass_a and pass_b and c_addon:
            category = (CATEGORY_MAJOR_ADDON if descriptor.server_side
                        else CATEGORY_ADDON)
            normalized = rsr_pair[name] - rsr_single[F_IP]
            p_value = p_addon.get(name)
        else:
            category = CATEGORY_REJECTED
            if c_single and not c_addon:
                normalized = rsr_single[name] - rsr_single[F_CONST]
            else:
                normalized = rsr_pair[name] - rsr_single[F_IP]
            p_value = None

        rows.append(FeatureBenchmarkRow(
            feature=name, h_global=h_global, h_user_mean=h_user,
            unique_global=uniq, unique_desktop=uniq_desktop,
            unique_mobile=uniq_mobile, rsr_basic=rsr_single[name],
            rsr_normalized=normalized,
            median_logins_until_reauth=logins_until_reauth(
                history_size, reauth_median[name]),
            pass_a=pass_a, pass_b=pass_b, pass_c=c_single or c_addon,
            category=category, server_side=descriptor.server_side,
            script_free=descriptor.script_free, p_reauth=p_value))
    rows.sort(key=lambda r: (-r.rsr_normalized, r.feature))
    return rows


def _entropy_key(descriptor) -> str:
    """Raw value name backing a descriptor for entropy/uniqueness tests.

    Weighted mixtures are measured on their primary (heaviest) subfeature,
    matching how a raw column would be profiled.
    """
    if not descriptor.subfeatures:
        return descriptor.name
    return max(descriptor.subfeatures, key=lambda sw: sw[1])[0]


def _dunn_vs_baseline(reauth_counts: dict[str, list[int]], names: list[str],
                      baseline: str) -> dict[str, float]:
    """Bonferroni-adjusted Dunn p of each feature vs the baseline group."""
    groups = [reauth_counts[baseline]]
    members = [name for name in names
               if name != baseline and reauth_counts[name]]
    if not reauth_counts[baseline] or not members:
        return {}
    groups.extend(reauth_counts[name] for name in members)
    result = dunn_bonferroni(groups)
    return {name: result.p[0][i + 1] for i, name in enumerate(members)}
