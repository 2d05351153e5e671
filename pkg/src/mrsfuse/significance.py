"""Exact two-sided Wilcoxon signed-rank test for paired run comparisons.

Zero differences are dropped before ranking; absolute differences receive
average ranks on ties. The statistic is the sum of ranks of positive
differences. The null distribution is computed exactly (all sign
assignments equally likely) for up to 25 effective pairs via a subset-sum
count over doubled ranks, which is numerically identical to enumerating
the 2^n sign patterns; beyond that a normal approximation with tie and
continuity corrections is used. The two-sided p-value doubles the smaller
tail and is capped at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

from .errors import ValidationError

EXACT_MAX_N = 25


@dataclass(frozen=True)
class PairedSample:
    """Two equal-length series of per-run measurements on a shared schedule."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if len(self.a) != len(self.b):
            raise ValidationError(f"paired sample length mismatch: {len(self.a)} vs {len(self.b)}")
        if not self.a:
            raise ValidationError("paired sample must contain at least one pair")
        if not all(math.isfinite(x) for x in self.a + self.b):
            raise ValidationError("paired sample values must be finite")


@dataclass(frozen=True)
class TestResult:
    """Signed-rank test outcome; ``degenerate`` marks an all-zero difference vector."""

    statistic: float
    p_value: float
    n_effective: int
    method: str
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_effective": self.n_effective,
            "method": self.method,
            "degenerate": self.degenerate,
        }


def _exact_two_sided_p(ranks: np.ndarray, w_observed: float) -> float:
    # Average ranks are multiples of 0.5, so doubled ranks are exact integers
    # and the null distribution of the doubled statistic is a subset-sum count.
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        counts[r:] = counts[r:] + counts[:-r or None]
    w2 = int(round(2.0 * w_observed))
    n_assignments = 2 ** len(doubled)
    p_le = int(counts[: w2 + 1].sum()) / n_assignments
    p_ge = int(counts[w2:].sum()) / n_assignments
    return min(1.0, 2.0 * min(p_le, p_ge))


def _approx_two_sided_p(ranks: np.ndarray, w_observed: float) -> float:
    n = len(ranks)
    mu = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    sigma2 = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if sigma2 <= 0.0:
        return 1.0
    shift = w_observed - mu
    z = (shift - 0.5 * np.sign(shift)) / math.sqrt(sigma2)
    return min(1.0, 2.0 * float(ndtr(-abs(z))))


def wilcoxon_signed_rank(sample: PairedSample) -> TestResult:
    """Two-sided signed-rank test of the paired differences ``a - b``."""
    diffs = np.asarray(sample.a, dtype=float) - np.asarray(sample.b, dtype=float)
    diffs = diffs[diffs != 0.0]
    n_effective = len(diffs)
    if n_effective == 0:
        return TestResult(statistic=0.0, p_value=1.0, n_effective=0, method="exact", degenerate=True)

    ranks = rankdata(np.abs(diffs), method="average")
    w = float(ranks[diffs > 0].sum())
    if n_effective <= EXACT_MAX_N:
        return TestResult(w, _exact_two_sided_p(ranks, w), n_effective, "exact")
    return TestResult(w, _approx_two_sided_p(ranks, w), n_effective, "normal_approx")
