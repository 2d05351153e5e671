"""Covariate-weighted late fusion of per-module outcome probabilities.

The pipeline for one patient:

1. threshold each module probability into a preliminary good/poor label
   (score <= threshold means good; the same convention is used for the
   final decision),
2. weight each module by the normalized clinical covariate ``c``: modules
   voting poor receive raw weight ``c``, modules voting good receive
   ``1 - c``,
3. normalize the weights to sum to one,
4. fuse the module probabilities with those weights,
5. threshold the fused probability into the final label.

With the clinical variable set to ``none`` the weights are uniform and the
pipeline reduces to the plain averaging ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .cohort import (
    ClinicalNormalizer,
    OutcomeLabel,
    PatientRecord,
    normalize_clinical,
)
from .errors import ConfigError, DegenerateDataError, ValidationError

WEIGHT_SUM_TOL = 1e-9

THRESHOLD_STRATEGIES = ("youden", "max_accuracy", "fixed")
FUSION_VARIABLES = ("age", "nihss", "none")


@dataclass(frozen=True)
class FusionConfig:
    """Fusion settings.

    ``prelim_threshold`` cuts module probabilities into preliminary labels;
    ``final_threshold`` cuts the fused probability into the final label.
    Either may be None, meaning "search on training data" under the given
    strategy; the ``fixed`` strategy requires both to be explicit.
    The normalizer may be None for a searchable config; it is then derived
    from training-cohort bounds before fusing.
    """

    clinical_variable: str = "nihss"
    normalizer: ClinicalNormalizer | None = None
    prelim_threshold: float | None = None
    final_threshold: float | None = None
    strategy: str = "youden"

    def __post_init__(self) -> None:
        if self.clinical_variable not in FUSION_VARIABLES:
            raise ConfigError(f"unknown clinical variable {self.clinical_variable!r}")
        if self.strategy not in THRESHOLD_STRATEGIES:
            raise ConfigError(f"unknown threshold strategy {self.strategy!r}")
        if self.clinical_variable == "none" and self.normalizer is not None:
            raise ConfigError("clinical variable 'none' does not take a normalizer")
        if self.normalizer is not None and self.normalizer.variable != self.clinical_variable:
            raise ConfigError(
                f"normalizer is for {self.normalizer.variable!r}, "
                f"config uses {self.clinical_variable!r}"
            )
        for name, value in (("prelim_threshold", self.prelim_threshold),
                            ("final_threshold", self.final_threshold)):
            if value is not None and not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
        if self.strategy == "fixed" and (self.prelim_threshold is None or self.final_threshold is None):
            raise ConfigError("strategy 'fixed' requires explicit prelim and final thresholds")

    def is_resolved(self) -> bool:
        """True when thresholds are concrete and the normalizer is present if needed."""
        return (
            self.prelim_threshold is not None
            and self.final_threshold is not None
            and (self.clinical_variable == "none" or self.normalizer is not None)
        )

    def with_thresholds(self, prelim: float, final: float) -> "FusionConfig":
        return replace(self, prelim_threshold=prelim, final_threshold=final)

    def with_normalizer(self, normalizer: ClinicalNormalizer | None) -> "FusionConfig":
        return replace(self, normalizer=normalizer)


@dataclass(frozen=True)
class FusionResult:
    """Per-patient fusion output: labels, weights, fused probability, decision."""

    preliminary_labels: tuple[OutcomeLabel, ...]
    weights: tuple[float, ...]
    fused_probability: float
    final_label: OutcomeLabel


def derive_labels(probs: Sequence[float], threshold: float) -> tuple[OutcomeLabel, ...]:
    """Preliminary per-module labels: probability <= threshold means good."""
    for p in probs:
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise ValidationError(f"module probability must be in [0, 1], got {p!r}")
    return tuple(OutcomeLabel.GOOD if p <= threshold else OutcomeLabel.POOR for p in probs)


def compute_weights(labels: Sequence[OutcomeLabel], covariate: float) -> tuple[float, ...]:
    """Normalized module weights from preliminary labels and covariate value.

    Modules labeled poor receive raw weight ``covariate``, modules labeled
    good receive ``1 - covariate``; the vector is normalized to sum to one.
    When every raw weight is zero (covariate at 0 or 1 with homogeneous
    labels) the weights fall back to uniform.
    """
    if len(labels) == 0:
        raise ValidationError("cannot weight an empty label list")
    if not (math.isfinite(covariate) and 0.0 <= covariate <= 1.0):
        raise ValidationError(f"covariate must be in [0, 1], got {covariate!r}")
    raw = [covariate if label == OutcomeLabel.POOR else 1.0 - covariate for label in labels]
    total = sum(raw)
    if total == 0.0:
        return uniform_weights(len(labels))
    return tuple(value / total for value in raw)


def uniform_weights(n: int) -> tuple[float, ...]:
    if n <= 0:
        raise ValidationError("cannot weight an empty module list")
    return (1.0 / n,) * n


def fuse(probs: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted average of module probabilities; bounded by their min and max."""
    if len(probs) != len(weights):
        raise ValidationError(f"length mismatch: {len(probs)} probabilities vs {len(weights)} weights")
    if len(probs) == 0:
        raise ValidationError("cannot fuse an empty probability list")
    if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {sum(weights)!r}")
    return float(sum(w * p for w, p in zip(weights, probs)))


def classify(fused_probability: float, threshold: float) -> OutcomeLabel:
    """Final decision; a fused probability at or below the threshold is good."""
    return OutcomeLabel.GOOD if fused_probability <= threshold else OutcomeLabel.POOR


def threshold_candidates(scores: Sequence[float]) -> list[float]:
    """Candidate cuts: midpoints between consecutive distinct scores, plus 0 and 1."""
    distinct = sorted(set(float(s) for s in scores))
    mids = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    return [0.0] + mids + [1.0]


def search_threshold(
    scores: Sequence[float],
    truths: Sequence[OutcomeLabel],
    strategy: str = "youden",
) -> float:
    """Pick the cut maximizing Youden's J (or accuracy) over the candidate grid.

    Ties break toward the smallest candidate. Requires both classes in
    ``truths`` and at least two distinct scores.
    """
    if strategy not in ("youden", "max_accuracy"):
        raise ConfigError(f"not a searchable strategy: {strategy!r}")
    if len(scores) != len(truths) or len(scores) == 0:
        raise ValidationError("scores and truths must be non-empty and equal length")
    y = np.asarray([t == OutcomeLabel.POOR for t in truths], dtype=bool)
    s = np.asarray(scores, dtype=float)
    n_poor = int(y.sum())
    n_good = int((~y).sum())
    if n_poor == 0 or n_good == 0:
        raise DegenerateDataError("degenerate class distribution: need both good and poor truths")
    candidates = threshold_candidates(s)
    if len(candidates) == 2:  # all scores identical
        raise DegenerateDataError("cannot search a threshold over identical scores")

    best_value = -np.inf
    best_threshold = candidates[0]
    for t in candidates:
        predicted_poor = s > t
        tp = int(np.sum(predicted_poor & y))
        tn = int(np.sum(~predicted_poor & ~y))
        if strategy == "youden":
            value = tp / n_poor + tn / n_good - 1.0
        else:
            value = (tp + tn) / len(s)
        if value > best_value + 1e-15:
            best_value = value
            best_threshold = t
    return float(best_threshold)


def fuse_patient(record: PatientRecord, config: FusionConfig) -> FusionResult:
    """Run the full fusion pipeline for one patient under a resolved config."""
    if not config.is_resolved():
        raise ConfigError("fusion config is not resolved: thresholds or normalizer missing")
    labels = derive_labels(record.module_probs, config.prelim_threshold)
    if config.clinical_variable == "none":
        weights = uniform_weights(len(labels))
    else:
        covariate = normalize_clinical(record.covariate(config.clinical_variable), config.normalizer)
        weights = compute_weights(labels, covariate)
    fused = fuse(record.module_probs, weights)
    return FusionResult(
        preliminary_labels=labels,
        weights=weights,
        fused_probability=fused,
        final_label=classify(fused, config.final_threshold),
    )


def normalizer_from_patients(
    patients: Iterable[PatientRecord], variable: str
) -> ClinicalNormalizer:
    """Min-max normalizer with bounds taken from the given patients."""
    values = [p.covariate(variable) for p in patients]
    if not values:
        raise ValidationError("cannot derive normalizer bounds from an empty patient list")
    lo, hi = min(values), max(values)
    if not hi > lo:
        raise DegenerateDataError(
            f"cannot derive normalizer bounds: {variable} is constant at {lo}"
        )
    return ClinicalNormalizer(variable=variable, min=lo, max=hi)
