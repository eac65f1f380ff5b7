"""Estimators shared by the experiments and the leakage game."""

from typing import Hashable, Iterable, Mapping

import numpy as np
from scipy.stats import chisquare, norm

from lrs.rng import SeededRng


def total_variation(counts_a: Mapping[Hashable, int], counts_b: Mapping[Hashable, int]) -> float:
    """Empirical TV distance 0.5 * sum |P_i - Q_i| between two histograms."""
    total_a, total_b = sum(counts_a.values()), sum(counts_b.values())
    if total_a == 0 or total_b == 0:
        raise ValueError("total variation needs two non-empty histograms")
    support = list(set(counts_a) | set(counts_b))
    p = np.array([counts_a.get(k, 0) for k in support], dtype=float) / total_a
    q = np.array([counts_b.get(k, 0) for k in support], dtype=float) / total_b
    return float(0.5 * np.sum(np.abs(p - q)))


def bootstrap_tv_interval(
    counts_a: Mapping[Hashable, int],
    counts_b: Mapping[Hashable, int],
    rng: SeededRng,
    resamples: int = 200,
    level: float = 0.95,
) -> tuple[float, float]:
    """Percentile bootstrap interval for ``total_variation`` via multinomial resampling."""
    support = list(set(counts_a) | set(counts_b))
    a = np.array([counts_a.get(k, 0) for k in support], dtype=float)
    b = np.array([counts_b.get(k, 0) for k in support], dtype=float)
    na, nb = int(a.sum()), int(b.sum())
    gen = rng.generator
    estimates = np.empty(resamples)
    for i in range(resamples):
        ra = gen.multinomial(na, a / na) / na
        rb = gen.multinomial(nb, b / nb) / nb
        estimates[i] = 0.5 * np.sum(np.abs(ra - rb))
    tail = (1.0 - level) / 2.0
    low, high = np.quantile(estimates, [tail, 1.0 - tail])
    return float(low), float(high)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("wilson interval needs at least one trial")
    z = float(norm.ppf(1.0 - (1.0 - level) / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def uniformity_pvalue(counts: Mapping[Hashable, int], support: Iterable[Hashable]) -> float:
    """Chi-square goodness of fit of ``counts`` against uniform on ``support``.

    Outcomes outside ``support`` make the p-value 0.
    """
    support = list(support)
    allowed = set(support)
    if any(k not in allowed for k in counts):
        return 0.0
    observed = np.array([counts.get(k, 0) for k in support], dtype=float)
    expected = np.full(len(support), observed.sum() / len(support))
    return float(chisquare(observed, expected).pvalue)


def polynomial_r2(x: Iterable[float], y: Iterable[float], degree: int) -> tuple[np.ndarray, float]:
    """Least-squares polynomial fit; returns (coefficients, R^2)."""
    xs = np.asarray(list(x), dtype=float)
    ys = np.asarray(list(y), dtype=float)
    coeffs = np.polyfit(xs, ys, degree)
    residual = ys - np.polyval(coeffs, xs)
    spread = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 if spread == 0 else float(1.0 - np.sum(residual ** 2) / spread)
    return coeffs, r2
