"""Calibration, replay, feature benchmark, and comparison statistics."""

from riskgate.evalsuite.calibration import CalibrationResult, EmptyScores, calibrate
from riskgate.evalsuite.featbench import (
    EmptyDistribution,
    FeatureBenchmarkRow,
    ZeroLegitimateMean,
    dot_scale,
    entropy_pair,
    qualify_features,
    render_dots,
    rsr,
    rsr_from_scores,
    shannon_entropy,
    unique_value_counts,
)
from riskgate.evalsuite.replay import (
    ReplayOutcome,
    ReplayRecord,
    SizeBucket,
    aggregate_by_size,
    apply_threshold,
    extend_score_fn,
    logins_until_reauth,
    replay,
    replay_scores,
    required_history_size,
    simple_score_fn,
)
from riskgate.evalsuite.stats import (
    DegenerateGroups,
    DunnResult,
    dunn_bonferroni,
    kruskal_wallis,
)

__all__ = [
    "CalibrationResult",
    "DegenerateGroups",
    "DunnResult",
    "EmptyDistribution",
    "EmptyScores",
    "FeatureBenchmarkRow",
    "ReplayOutcome",
    "ReplayRecord",
    "SizeBucket",
    "ZeroLegitimateMean",
    "aggregate_by_size",
    "apply_threshold",
    "calibrate",
    "dot_scale",
    "dunn_bonferroni",
    "entropy_pair",
    "extend_score_fn",
    "kruskal_wallis",
    "logins_until_reauth",
    "qualify_features",
    "render_dots",
    "replay",
    "replay_scores",
    "required_history_size",
    "rsr",
    "rsr_from_scores",
    "shannon_entropy",
    "simple_score_fn",
    "unique_value_counts",
]
