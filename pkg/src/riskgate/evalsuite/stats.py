"""Rank statistics for group comparisons: Kruskal-Wallis and Dunn post hoc.

Both use midranks with tie correction. When every value across all groups
is identical the comparison is declared degenerate and reported as
H = 0, p = 1 by convention rather than raising.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from scipy.stats import distributions

from riskgate.core import RiskgateError


class DegenerateGroups(RiskgateError):
    """Group input unusable: fewer than two groups or an empty group."""


@dataclass
class DunnResult:
    z: list[list[float]]
    p: list[list[float]]  # Bonferroni-adjusted, clipped to 1


def _check_groups(groups) -> list[list[float]]:
    data = [list(g) for g in groups]
    if len(data) < 2:
        raise DegenerateGroups("need at least two groups")
    if any(len(g) == 0 for g in data):
        raise DegenerateGroups("groups must be non-empty")
    return data


def _midranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0  # average of 1-based positions
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _tie_term(values: list[float]) -> float:
    """Sum of t^3 - t over tie groups."""
    return sum(t ** 3 - t for t in Counter(values).values())


def kruskal_wallis(groups) -> tuple[float, float]:
    """Tie-corrected H statistic with chi-square p (k-1 df)."""
    data = _check_groups(groups)
    pooled = [v for g in data for v in g]
    n = len(pooled)
    if len(set(pooled)) == 1:
        return 0.0, 1.0
    ranks = _midranks(pooled)
    h = 0.0
    offset = 0
    for g in data:
        r_sum = sum(ranks[offset:offset + len(g)])
        h += r_sum * r_sum / len(g)
        offset += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    correction = 1.0 - _tie_term(pooled) / (n ** 3 - n)
    h /= correction
    p = float(distributions.chi2.sf(h, len(data) - 1))
    return h, p


def dunn_bonferroni(groups) -> DunnResult:
    """Pairwise Dunn z statistics with Bonferroni-corrected p values."""
    data = _check_groups(groups)
    k = len(data)
    pooled = [v for g in data for v in g]
    n = len(pooled)
    z = [[0.0] * k for _ in range(k)]
    p = [[1.0] * k for _ in range(k)]
    if len(set(pooled)) == 1:
        return DunnResult(z=z, p=p)
    ranks = _midranks(pooled)
    means = []
    offset = 0
    for g in data:
        means.append(sum(ranks[offset:offset + len(g)]) / len(g))
        offset += len(g)
    variance = n * (n + 1) / 12.0 - _tie_term(pooled) / (12.0 * (n - 1))
    comparisons = k * (k - 1) // 2
    for i in range(k):
        for j in range(i + 1, k):
            se = math.sqrt(variance * (1.0 / len(data[i]) + 1.0 / len(data[j])))
            zij = (means[i] - means[j]) / se if se > 0 else 0.0
            raw = math.erfc(abs(zij) / math.sqrt(2.0))  # two-sided normal
            adj = min(1.0, raw * comparisons)
            z[i][j], z[j][i] = zij, -zij
            p[i][j] = p[j][i] = adj
    return DunnResult(z=z, p=p)
