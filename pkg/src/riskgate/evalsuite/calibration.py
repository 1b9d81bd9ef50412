"""Threshold calibration against simulated attack scores.

The threshold is chosen from the distinct attack scores (plus a point just
above the maximum) so that the share of attacks at or above it lands as
close as possible to the requested true positive rate. Coarse score
distributions therefore produce coarse achievable TPR sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from riskgate.core import RiskgateError


class EmptyScores(RiskgateError):
    """Calibration needs at least one attack score."""


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    target_tpr: float
    achieved_tpr: float
    attack_score_count: int


def achievable_tprs(attack_scores) -> dict[float, float]:
    """Map candidate threshold -> TPR it achieves on these scores."""
    scores = sorted(attack_scores)
    if not scores:
        raise EmptyScores("no attack scores")
    n = len(scores)
    candidates = sorted(set(scores))
    epsilon = abs(candidates[-1]) * 1e-9 + 1e-12
    candidates.append(candidates[-1] + epsilon)
    out = {}
    for threshold in candidates:
        blocked = sum(1 for s in scores if s >= threshold)
        out[threshold] = blocked / n
    return out


def calibrate(attack_scores, target_tpr: float) -> CalibrationResult:
    """Pick the threshold whose TPR is nearest the target.

    Ties break toward the higher achieved TPR (blocking more attacks).
    """
    if not 0.0 < target_tpr <= 1.0:
        raise ValueError("target TPR must lie in (0, 1]")
    scores = list(attack_scores)
    table = achievable_tprs(scores)
    best_threshold, best_tpr = min(
        table.items(), key=lambda kv: (abs(kv[1] - target_tpr), -kv[1]))
    return CalibrationResult(threshold=best_threshold, target_tpr=target_tpr,
                             achieved_tpr=best_tpr,
                             attack_score_count=len(scores))
