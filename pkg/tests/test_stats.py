from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest
import scipy.stats

from riskgate.evalsuite.stats import DegenerateGroups, dunn_bonferroni, kruskal_wallis


def reference_dunn(groups):
    """Independent Dunn implementation built on scipy primitives."""
    data = [np.asarray(g, dtype=float) for g in groups]
    pooled = np.concatenate(data)
    n = len(pooled)
    ranks = scipy.stats.rankdata(pooled)
    mean_ranks = []
    offset = 0
    for g in data:
        mean_ranks.append(ranks[offset:offset + len(g)].mean())
        offset += len(g)
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts))
    variance = n * (n + 1) / 12.0 - tie_term / (12.0 * (n - 1))
    k = len(data)
    m = k * (k - 1) // 2
    p = np.ones((k, k))
    z = np.zeros((k, k))
    for i, j in itertools.combinations(range(k), 2):
        se = math.sqrt(variance * (1 / len(data[i]) + 1 / len(data[j])))
        zij = (mean_ranks[i] - mean_ranks[j]) / se
        raw = 2.0 * scipy.stats.norm.sf(abs(zij))
        z[i][j], z[j][i] = zij, -zij
        p[i][j] = p[j][i] = min(1.0, raw * m)
    return z, p


def test_identical_groups_degenerate_convention():
    h, p = kruskal_wallis([[3, 3, 3], [3, 3], [3, 3, 3, 3]])
    assert h == 0.0 and p == 1.0
    result = dunn_bonferroni([[3, 3], [3, 3, 3]])
    assert all(v == 1.0 for row in result.p for v in row)


def test_kruskal_known_answer():
    h, p = kruskal_wallis([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert h == pytest.approx(7.2, abs=1e-12)
    ref_h, ref_p = scipy.stats.kruskal([1, 2, 3], [4, 5, 6], [7, 8, 9])
    assert h == pytest.approx(ref_h, abs=1e-9)
    assert p == pytest.approx(ref_p, abs=1e-9)


def test_kruskal_with_ties_matches_scipy():
    groups = [[1, 1, 2, 3], [2, 2, 3, 3, 4], [1, 4, 4]]
    h, p = kruskal_wallis(groups)
    ref_h, ref_p = scipy.stats.kruskal(*groups)
    assert h == pytest.approx(ref_h, rel=1e-12)
    assert p == pytest.approx(ref_p, rel=1e-9)


def test_kruskal_random_matches_scipy():
    rng = random.Random(1234)
    for _ in range(50):
        k = rng.randint(2, 5)
        groups = [[rng.randint(0, 8) for _ in range(rng.randint(2, 12))]
                  for _ in range(k)]
        if len({v for g in groups for v in g}) == 1:
            continue
        h, p = kruskal_wallis(groups)
        ref_h, ref_p = scipy.stats.kruskal(*groups)
        assert h == pytest.approx(ref_h, rel=1e-9, abs=1e-9)
        assert p == pytest.approx(ref_p, rel=1e-6, abs=1e-6)


def test_dunn_random_matches_reference():
    rng = random.Random(99)
    for _ in range(50):
        k = rng.randint(2, 5)
        groups = [[rng.randint(0, 9) for _ in range(rng.randint(2, 10))]
                  for _ in range(k)]
        if len({v for g in groups for v in g}) == 1:
            continue
        result = dunn_bonferroni(groups)
        ref_z, ref_p = reference_dunn(groups)
        for i in range(k):
            for j in range(k):
                assert result.z[i][j] == pytest.approx(ref_z[i][j],
                                                       rel=1e-9, abs=1e-9)
                assert result.p[i][j] == pytest.approx(ref_p[i][j],
                                                       rel=1e-6, abs=1e-6)


def test_bonferroni_multiplication_rule():
    # three groups -> three comparisons; a raw p of ~0.02 reports ~0.06
    rng = random.Random(5)
    groups = [[rng.gauss(0, 1) for _ in range(12)],
              [rng.gauss(0.9, 1) for _ in range(12)],
              [rng.gauss(0.4, 1) for _ in range(12)]]
    result = dunn_bonferroni(groups)
    z01 = result.z[0][1]
    raw = 2.0 * scipy.stats.norm.sf(abs(z01))
    assert result.p[0][1] == pytest.approx(min(1.0, raw * 3), rel=1e-9)


def test_degenerate_group_shapes_rejected():
    with pytest.raises(DegenerateGroups):
        kruskal_wallis([[1, 2, 3]])
    with pytest.raises(DegenerateGroups):
        kruskal_wallis([[1, 2], []])
    with pytest.raises(DegenerateGroups):
        dunn_bonferroni([[1], []])


def test_dunn_p_clipped_to_one():
    groups = [[1, 2, 3, 4], [2, 3, 4, 5], [3, 4, 5, 6], [1, 3, 5, 2]]
    result = dunn_bonferroni(groups)
    assert all(0.0 <= v <= 1.0 for row in result.p for v in row)
