"""The two risk engines and the threshold decision rule.

SIMPLE scores by exact-match ratio over a fixed feature list; EXTEND is a
multiplicative likelihood-ratio score combining global and per-user
feature probabilities with a user prior. Both are pure functions over an
immutable history view, so unrestricted parallel scoring is safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from riskgate.core import MISSING, HistoryView, RiskgateError
from riskgate.featurekit.catalog import F_IP, F_IP_REGION, F_UA, F_CLIENT_FP, \
    F_LAST_LOGIN, FeatureCatalog
from riskgate.featurekit.probability import (
    DEFAULT_SMOOTHING,
    SmoothingConfig,
    p_feature_weighted,
)


class EmptyFeatureSet(RiskgateError):
    """SIMPLE was configured with no features to inspect."""


class UnknownFeature(RiskgateError):
    """EXTEND references a feature name absent from the catalog."""


class Decision(str, Enum):
    GRANT = "grant"
    CHALLENGE = "challenge"


@dataclass(frozen=True)
class RiskVerdict:
    """Score, decision, and per-feature contributions for one login."""

    score: float
    threshold: float
    decision: Decision
    contributions: dict[str, float]
    engine: str
    match_ratio: float | None = None  # SIMPLE only: raw fraction of matches


SIMPLE_IPUA_FEATURES = (F_IP, F_IP_REGION, F_UA)
SIMPLE_ALL_FEATURES = (F_IP, F_IP_REGION, F_UA, F_CLIENT_FP, F_LAST_LOGIN)

DEFAULT_EXTEND_FEATURES = ("ip_weighted", "ua_weighted")


@dataclass(frozen=True)
class SimpleConfig:
    """Feature list for the exact-match model.

    ``variant`` is "IPUA", "ALL", or "custom" with an explicit feature
    list. The last-login pseudo-feature matches when the user's most
    recent legitimate login is at most ``last_login_window_days`` old.
    """

    variant: str = "IPUA"
    features: tuple[str, ...] = ()
    last_login_window_days: int = 31

    def feature_list(self) -> tuple[str, ...]:
        if self.variant == "IPUA":
            return SIMPLE_IPUA_FEATURES
        if self.variant == "ALL":
            return SIMPLE_ALL_FEATURES
        if not self.features:
            raise EmptyFeatureSet("custom variant requires a feature list")
        return self.features


@dataclass(frozen=True)
class ExtendConfig:
    """Feature set (catalog descriptor names) and smoothing for EXTEND."""

    feature_set: tuple[str, ...] = DEFAULT_EXTEND_FEATURES
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)


def decide(score: float, threshold: float) -> Decision:
    """Challenge when the score reaches the threshold (inclusive)."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return Decision.CHALLENGE if score >= threshold else Decision.GRANT


def score_simple(view: HistoryView, user: str, features: dict[str, str],
                 timestamp: int, cfg: SimpleConfig,
                 threshold: float) -> RiskVerdict:
    """Exact-match ratio scoring against the user's personal history.

    A feature matches when the attempt's value equals at least one value
    in the user's prior legitimate logins; MISSING never matches. The
    score is 1 - matchRatio, so high risk means few matches and the shared
    challenge-on-high-score rule applies to both engines.
    """
    names = cfg.feature_list()
    if not names:
        raise EmptyFeatureSet("SIMPLE requires at least one feature")
    contributions: dict[str, float] = {}
    matches = 0
    for name in names:
        if name == F_LAST_LOGIN:
            last = view.last_login_ts(user)
            window = cfg.last_login_window_days * 86400
            matched = last is not None and timestamp - last <= window
        else:
            value = features.get(name, MISSING)
            matched = value != MISSING and view.user_has_value(user, name, value)
        contributions[name] = 1.0 if matched else 0.0
        matches += matched
    ratio = matches / len(names)
    score = 1.0 - ratio
    return RiskVerdict(score=score, threshold=threshold,
                       decision=decide(score, threshold),
                       contributions=contributions, engine="simple",
                       match_ratio=ratio)


def score_extend(view: HistoryView, user: str, features: dict[str, str],
                 cfg: ExtendConfig, catalog: FeatureCatalog,
                 threshold: float) -> RiskVerdict:
    """Likelihood-ratio scoring with a user prior.

    score = prod_k p_global(x_k) / p_user(x_k) * p(u|attack) / p(u|legit)
    with p(u|attack) = 1/|U| (all users equally likely to be attacked) and
    p(u|legit) Laplace-smoothed to (n_u + 1) / (N + |U|) so unseen users
    never divide by zero. Feature probabilities use the descriptor's
    subfeature weights; contributions record each global/user ratio.
    """
    if not cfg.feature_set:
        raise EmptyFeatureSet("EXTEND requires at least one feature")
    contributions: dict[str, float] = {}
    score = 1.0
    for name in cfg.feature_set:
        if name not in catalog:
            raise UnknownFeature(name)
        descriptor = catalog.get(name)
        pg = p_feature_weighted(view, None, descriptor, features, cfg.smoothing)
        pu = p_feature_weighted(view, user, descriptor, features, cfg.smoothing)
        ratio = pg / pu
        contributions[name] = ratio
        score *= ratio
    users = max(1, view.user_count)
    n_u = view.user_login_count(user)
    n_total = view.total_logins
    p_attack = 1.0 / users
    p_legit = (n_u + 1) / (n_total + users)
    score *= p_attack / p_legit
    return RiskVerdict(score=score, threshold=threshold,
                       decision=decide(score, threshold),
                       contributions=contributions, engine="extend")
