"""Patient-level cross-validation with repeated seeded runs.

Each run reshuffles the fold assignment from a seed derived from
(base_seed, run_index); fusion itself is deterministic. Thresholds and
normalizer bounds are resolved on the training folds only, predictions are
pooled over the test folds of a run, and per-run reports are aggregated
into means and standard deviations across runs. Degenerate folds are
recorded as run-level failures instead of aborting the evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cohort import Cohort, OutcomeLabel, PatientRecord, validate_cohort
from .errors import ConfigError, DegenerateDataError, ValidationError
from .fusion import (
    FusionConfig,
    compute_weights,
    derive_labels,
    fuse,
    fuse_patient,
    normalizer_from_patients,
    search_threshold,
    uniform_weights,
)
from .metrics import MEASURES, MetricReport, report
from .significance import PairedSample, TestResult, wilcoxon_signed_rank


@dataclass(frozen=True)
class CvPlan:
    """Cross-validation protocol: fold count, repetitions, seeding, stratification."""

    k: int = 5
    n_runs: int = 10
    base_seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.k, int) or self.k < 2:
            raise ConfigError(f"k must be an integer >= 2, got {self.k!r}")
        if not isinstance(self.n_runs, int) or self.n_runs < 1:
            raise ConfigError(f"n_runs must be an integer >= 1, got {self.n_runs!r}")
        if not isinstance(self.base_seed, int) or self.base_seed < 0:
            raise ConfigError(f"base_seed must be a non-negative integer, got {self.base_seed!r}")

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "n_runs": self.n_runs,
            "base_seed": self.base_seed,
            "stratified": self.stratified,
        }


@dataclass(frozen=True)
class Fold:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


@dataclass(frozen=True)
class FoldResolution:
    """Thresholds and normalizer bounds resolved on one training fold."""

    fold_index: int
    prelim_threshold: float
    final_threshold: float
    norm_min: float | None = None
    norm_max: float | None = None

    def as_dict(self) -> dict:
        return {
            "fold_index": self.fold_index,
            "prelim_threshold": self.prelim_threshold,
            "final_threshold": self.final_threshold,
            "norm_min": self.norm_min,
            "norm_max": self.norm_max,
        }


@dataclass(frozen=True)
class RunResult:
    run_index: int
    metrics: MetricReport
    folds: tuple[FoldResolution, ...]

    def as_dict(self) -> dict:
        return {
            "run_index": self.run_index,
            "metrics": self.metrics.as_dict(),
            "folds": [f.as_dict() for f in self.folds],
        }


@dataclass(frozen=True)
class RunSummary:
    """Per-run reports plus cross-run aggregates for one model variant."""

    model: str
    plan: CvPlan
    config: FusionConfig
    runs: tuple[RunResult, ...]
    failures: tuple[str, ...] = ()

    def completed_run_indices(self) -> tuple[int, ...]:
        return tuple(r.run_index for r in self.runs)

    def run_values(self, measure: str) -> tuple[float, ...]:
        return tuple(r.metrics.value(measure) for r in self.runs)

    def mean(self, measure: str) -> float:
        values = self.run_values(measure)
        if not values:
            raise DegenerateDataError(f"no completed runs to average for {self.model!r}")
        return float(np.mean(values))

    def std(self, measure: str) -> float:
        values = self.run_values(measure)
        if not values:
            raise DegenerateDataError(f"no completed runs to average for {self.model!r}")
        return float(np.std(values))

    def seed_schedule(self) -> dict:
        return {
            "base_seed": self.plan.base_seed,
            "run_indices": list(range(self.plan.n_runs)),
        }

    def as_dict(self) -> dict:
        if self.runs:
            measures = {
                name: {"mean": self.mean(name), "std": self.std(name)} for name in MEASURES
            }
        else:
            measures = {name: None for name in MEASURES}
        return {
            "model": self.model,
            "plan": self.plan.as_dict(),
            "config": _config_as_dict(self.config),
            "seed_schedule": self.seed_schedule(),
            "measures": measures,
            "runs": [r.as_dict() for r in self.runs],
            "failures": list(self.failures),
        }


def _config_as_dict(config: FusionConfig) -> dict:
    normalizer = None
    if config.normalizer is not None:
        normalizer = {
            "variable": config.normalizer.variable,
            "min": config.normalizer.min,
            "max": config.normalizer.max,
        }
    return {
        "clinical_variable": config.clinical_variable,
        "normalizer": normalizer,
        "prelim_threshold": config.prelim_threshold,
        "final_threshold": config.final_threshold,
        "strategy": config.strategy,
    }


def make_folds(cohort: Cohort, plan: CvPlan, run_index: int) -> list[Fold]:
    """Partition patient ids into k test folds, deterministic in (base_seed, run_index).

    Stratified assignment deals each class round-robin with a shared fold
    cursor, so per-class counts and total fold sizes both differ by at most
    one across folds. Every training fold must contain both outcome classes.
    """
    if not cohort.patients:
        raise ValidationError("cannot fold an empty cohort")
    if not cohort.is_labeled():
        raise ValidationError("cross-validation requires mrs for every patient")
    n = len(cohort.patients)
    if plan.k > n:
        raise ValidationError(f"k={plan.k} exceeds cohort size {n}")

    rng = np.random.default_rng([plan.base_seed, run_index])
    assignments: list[list[str]] = [[] for _ in range(plan.k)]
    cursor = 0

    if plan.stratified:
        groups = [
            [p.patient_id for p in cohort.patients if p.outcome() == label]
            for label in (OutcomeLabel.GOOD, OutcomeLabel.POOR)
        ]
    else:
        groups = [[p.patient_id for p in cohort.patients]]

    for group in groups:
        for pos in rng.permutation(len(group)):
            assignments[cursor].append(group[int(pos)])
            cursor = (cursor + 1) % plan.k

    truth_by_id = {p.patient_id: p.outcome() for p in cohort.patients}
    folds = []
    for test_ids in assignments:
        test_set = set(test_ids)
        train_ids = tuple(p.patient_id for p in cohort.patients if p.patient_id not in test_set)
        train_classes = {truth_by_id[pid] for pid in train_ids}
        if len(train_classes) < 2:
            hint = "" if plan.stratified else "; enable stratification"
            raise DegenerateDataError(
                f"a training fold contains a single outcome class{hint}"
            )
        folds.append(Fold(train_ids=train_ids, test_ids=tuple(sorted(test_set))))
    return folds


def _fused_score(
    patient: PatientRecord, config: FusionConfig, prelim_threshold: float
) -> float:
    labels = derive_labels(patient.module_probs, prelim_threshold)
    if config.clinical_variable == "none":
        weights = uniform_weights(len(labels))
    else:
        covariate = config.normalizer.normalize(patient.covariate(config.clinical_variable))
        weights = compute_weights(labels, covariate)
    return fuse(patient.module_probs, weights)


def _searched(value: float, what: str) -> float:
    if not 0.0 < value < 1.0:
        raise DegenerateDataError(f"{what} search collapsed to the boundary ({value})")
    return value


def resolve_fold_config(
    train: Sequence[PatientRecord], config: FusionConfig, fold_index: int = 0
) -> tuple[FusionConfig, FoldResolution]:
    """Make thresholds and normalizer concrete using training patients only.

    Threshold searches need labeled training patients; a fully fixed config
    resolves without reading any outcome.
    """
    resolved = config
    if resolved.clinical_variable != "none" and resolved.normalizer is None:
        resolved = resolved.with_normalizer(
            normalizer_from_patients(train, resolved.clinical_variable)
        )

    prelim = resolved.prelim_threshold
    if prelim is None:
        truths = [p.outcome() for p in train]
        module_scores = [p for patient in train for p in patient.module_probs]
        module_truths = [t for patient, t in zip(train, truths) for _ in patient.module_probs]
        prelim = _searched(
            search_threshold(module_scores, module_truths, resolved.strategy),
            "preliminary threshold",
        )

    final = resolved.final_threshold
    if final is None:
        truths = [p.outcome() for p in train]
        fused_scores = [_fused_score(p, resolved, prelim) for p in train]
        final = _searched(
            search_threshold(fused_scores, truths, resolved.strategy),
            "final threshold",
        )

    resolved = resolved.with_thresholds(prelim, final)
    norm = resolved.normalizer
    resolution = FoldResolution(
        fold_index=fold_index,
        prelim_threshold=prelim,
        final_threshold=final,
        norm_min=None if norm is None else norm.min,
        norm_max=None if norm is None else norm.max,
    )
    return resolved, resolution


def _default_model_name(config: FusionConfig) -> str:
    if config.clinical_variable == "none":
        return "ensemble"
    return f"ensemble_w_{config.clinical_variable}"


def evaluate_model(
    cohort: Cohort,
    plan: CvPlan,
    config: FusionConfig,
    model_name: str | None = None,
) -> RunSummary:
    """Cross-validated evaluation of one fusion configuration.

    Per run: folds are drawn, thresholds resolved per training fold,
    test-fold predictions pooled, and the six measures computed once on the
    pooled predictions. Runs that hit degenerate data are recorded under
    ``failures`` and skipped in the aggregates.
    """
    violations = validate_cohort(cohort)
    if violations:
        listing = "; ".join(str(v) for v in violations[:5])
        raise ValidationError(f"cohort failed validation ({len(violations)} violations): {listing}")
    if not cohort.is_labeled():
        raise ValidationError("evaluation requires mrs for every patient")

    by_id = {p.patient_id: p for p in cohort.patients}
    runs: list[RunResult] = []
    failures: list[str] = []

    for run_index in range(plan.n_runs):
        try:
            folds = make_folds(cohort, plan, run_index)
            resolutions: list[FoldResolution] = []
            predicted: dict[str, OutcomeLabel] = {}
            fused: dict[str, float] = {}
            for fold_index, fold in enumerate(folds):
                train = [by_id[pid] for pid in fold.train_ids]
                resolved, resolution = resolve_fold_config(train, config, fold_index)
                resolutions.append(resolution)
                for pid in fold.test_ids:
                    result = fuse_patient(by_id[pid], resolved)
                    predicted[pid] = result.final_label
                    fused[pid] = result.fused_probability
            ordered_ids = [p.patient_id for p in cohort.patients]
            run_report = report(
                predicted=[predicted[pid] for pid in ordered_ids],
                fused_probs=[fused[pid] for pid in ordered_ids],
                truth=[by_id[pid].outcome() for pid in ordered_ids],
            )
            runs.append(RunResult(run_index=run_index, metrics=run_report, folds=tuple(resolutions)))
        except DegenerateDataError as exc:
            failures.append(f"run {run_index}: {exc}")

    return RunSummary(
        model=model_name or _default_model_name(config),
        plan=plan,
        config=config,
        runs=tuple(runs),
        failures=tuple(failures),
    )


def evaluate_per_module(cohort: Cohort, plan: CvPlan) -> dict[str, RunSummary]:
    """Evaluate each module's probabilities alone, as a single-module ensemble."""
    baseline = FusionConfig(clinical_variable="none", strategy="youden")
    return {
        name: evaluate_model(cohort.single_module_view(name), plan, baseline, model_name=name)
        for name in cohort.module_names
    }


def _compare_paired(
    pairs_a: Sequence[tuple[int, float]],
    pairs_b: Sequence[tuple[int, float]],
    schedule_a: dict,
    schedule_b: dict,
) -> TestResult:
    if schedule_a != schedule_b:
        raise ConfigError(
            f"seed schedules differ: {schedule_a} vs {schedule_b}; models must share runs"
        )
    if [i for i, _ in pairs_a] != [i for i, _ in pairs_b]:
        raise ConfigError("completed run indices differ; models must be compared run-by-run")
    if not pairs_a:
        raise DegenerateDataError("no completed runs to compare")
    sample = PairedSample(
        a=tuple(v for _, v in pairs_a),
        b=tuple(v for _, v in pairs_b),
    )
    return wilcoxon_signed_rank(sample)


def compare_models(a: RunSummary, b: RunSummary, measure: str) -> TestResult:
    """Two-sided signed-rank comparison of per-run measure values."""
    if measure not in MEASURES:
        raise ConfigError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    return _compare_paired(
        list(zip(a.completed_run_indices(), a.run_values(measure))),
        list(zip(b.completed_run_indices(), b.run_values(measure))),
        a.seed_schedule(),
        b.seed_schedule(),
    )


def compare_summary_dicts(a: dict, b: dict, measure: str) -> TestResult:
    """Same comparison, operating on serialized summaries."""
    if measure not in MEASURES:
        raise ConfigError(f"unknown measure {measure!r}; expected one of {MEASURES}")

    def pairs(d: dict) -> list[tuple[int, float]]:
        try:
            return [(r["run_index"], float(r["metrics"][measure])) for r in d["runs"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed summary: {exc}") from exc

    for d in (a, b):
        if "seed_schedule" not in d:
            raise ValidationError("malformed summary: missing seed_schedule")
    return _compare_paired(pairs(a), pairs(b), a["seed_schedule"], b["seed_schedule"])
