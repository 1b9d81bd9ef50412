"""Smoothed categorical probabilities over a history view.

Two-level backoff: the per-user estimate interpolates toward the global
distribution, and the global estimate reserves mass for one unseen bucket,
so every probability is strictly positive and likelihood ratios stay
finite. The interpolation constants are declared configuration, not
ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

from riskgate.core import MISSING, HistoryView, RiskgateError
from riskgate.featurekit.catalog import WEIGHT_TOLERANCE, FeatureDescriptor


class WeightSumInvalid(RiskgateError):
    """Subfeature weights of a descriptor do not sum to 1."""


@dataclass(frozen=True)
class SmoothingConfig:
    """Backoff strengths: user->global (alpha) and global->unseen (beta)."""

    alpha_user: float = 1.0
    beta_global: float = 0.5

    def __post_init__(self):
        if self.alpha_user <= 0 or self.beta_global <= 0:
            raise ValueError("smoothing constants must be strictly positive")


DEFAULT_SMOOTHING = SmoothingConfig()


def p_global(view: HistoryView, feature: str, value: str,
             cfg: SmoothingConfig = DEFAULT_SMOOTHING) -> float:
    """Probability of the value in the global login history.

    (c + beta) / (N + beta * (V + 1)) with c the global count, N the number
    of legitimate logins, and V the distinct observed values; an empty view
    yields 1.0 so ratios degrade to the user prior alone.
    """
    beta = cfg.beta_global
    c = view.global_count(feature, value)
    n = view.total_logins
    v = view.distinct_value_count(feature)
    return (c + beta) / (n + beta * (v + 1))


def p_user(view: HistoryView, user: str, feature: str, value: str,
           cfg: SmoothingConfig = DEFAULT_SMOOTHING) -> float:
    """Probability of the value in the user's own login history.

    (c_u + alpha * p_global) / (n_u + alpha); equals p_global exactly for a
    user with no history, so cold-start ratios collapse to 1.
    """
    alpha = cfg.alpha_user
    c_u = view.user_value_count(user, feature, value)
    n_u = view.user_login_count(user)
    return (c_u + alpha * p_global(view, feature, value, cfg)) / (n_u + alpha)


def p_feature_weighted(view: HistoryView, user: str | None,
                       descriptor: FeatureDescriptor,
                       features: dict[str, str],
                       cfg: SmoothingConfig = DEFAULT_SMOOTHING) -> float:
    """Weighted mixture over the descriptor's subfeatures.

    ``user=None`` evaluates against the global history. A missing
    subfeature value contributes the probability of MISSING, which counts
    as a category of its own.
    """
    subs = descriptor.effective_subfeatures()
    total = sum(w for _, w in subs)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise WeightSumInvalid(
            f"{descriptor.name}: weights sum to {total}, not 1")
    acc = 0.0
    for sub, weight in subs:
        value = features.get(sub, MISSING)
        if user is None:
            acc += weight * p_global(view, sub, value, cfg)
        else:
            acc += weight * p_user(view, user, sub, value, cfg)
    return acc
