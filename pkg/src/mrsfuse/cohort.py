"""Patient cohort domain model.

Holds the record and cohort types, the binary outcome scale, min-max
normalization of clinical covariates, cohort validation, and the CSV
cohort schema used by the command-line tools.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, ValidationError

DEFAULT_MODULE_NAMES = ("ADC", "CBF", "CBV", "DWI", "Tmax")

# Canonical spellings for the standard MR modules; unknown CSV columns
# keep their suffix upper-cased.
_CANONICAL_MODULES = {name.lower(): name for name in DEFAULT_MODULE_NAMES}

CLINICAL_VARIABLES = ("age", "nihss")

NIHSS_MAX = 42
MRS_MAX = 6
GOOD_MRS_MAX = 2  # disability grades 0-2 count as good outcome, 3-6 as poor

CSV_REQUIRED_COLUMNS = ("patient_id", "age", "nihss", "mrs")
CSV_MODULE_PREFIX = "p_"


class OutcomeLabel(enum.IntEnum):
    """Binary clinical outcome. GOOD sorts below POOR."""

    GOOD = 0
    POOR = 1

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "OutcomeLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValidationError(f"unknown outcome label {text!r}") from None


def binarize_mrs(mrs: int, patient_id: str | None = None) -> OutcomeLabel:
    """Collapse a 0-6 disability grade to the binary outcome (0-2 good, else poor)."""
    if not isinstance(mrs, int) or isinstance(mrs, bool) or not 0 <= mrs <= MRS_MAX:
        who = f" for patient {patient_id!r}" if patient_id is not None else ""
        raise ValidationError(f"mrs must be an integer in 0..{MRS_MAX}{who}, got {mrs!r}")
    return OutcomeLabel.GOOD if mrs <= GOOD_MRS_MAX else OutcomeLabel.POOR


@dataclass(frozen=True)
class ClinicalNormalizer:
    """Min-max scaling of one clinical variable onto [0, 1], clamped at the bounds."""

    variable: str
    min: float
    max: float

    def __post_init__(self) -> None:
        if self.variable not in CLINICAL_VARIABLES:
            raise ConfigError(f"unknown clinical variable {self.variable!r}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ConfigError("normalizer bounds must be finite")
        if not self.max > self.min:
            raise ConfigError(
                f"normalizer requires max > min, got [{self.min}, {self.max}]"
            )

    def normalize(self, value: float) -> float:
        return normalize_clinical(value, self)


def normalize_clinical(value: float, normalizer: ClinicalNormalizer) -> float:
    """Scale a covariate onto [0, 1]; out-of-bounds values clamp to 0 or 1."""
    scaled = (value - normalizer.min) / (normalizer.max - normalizer.min)
    return min(1.0, max(0.0, scaled))


@dataclass(frozen=True)
class PatientRecord:
    """One patient: covariates, optional true mRS, and per-module probabilities.

    ``module_probs`` is ordered like the owning cohort's ``module_names``.
    ``mrs`` may be None for inference-only records; evaluation rejects those.
    Construction is permissive -- range checks live in :func:`validate_cohort`.
    """

    patient_id: str
    age: float
    nihss: int
    module_probs: tuple[float, ...]
    mrs: int | None = None

    def covariate(self, variable: str) -> float:
        if variable == "age":
            return float(self.age)
        if variable == "nihss":
            return float(self.nihss)
        raise ConfigError(f"unknown clinical variable {variable!r}")

    def outcome(self) -> OutcomeLabel:
        if self.mrs is None:
            raise ValidationError(f"patient {self.patient_id!r} has no recorded mrs")
        return binarize_mrs(self.mrs, self.patient_id)


@dataclass(frozen=True)
class Cohort:
    """An ordered module list plus the patients scored against it."""

    module_names: tuple[str, ...] = DEFAULT_MODULE_NAMES
    patients: tuple[PatientRecord, ...] = ()

    @property
    def n_modules(self) -> int:
        return len(self.module_names)

    def is_labeled(self) -> bool:
        return bool(self.patients) and all(p.mrs is not None for p in self.patients)

    def truths(self) -> tuple[OutcomeLabel, ...]:
        return tuple(p.outcome() for p in self.patients)

    def module_index(self, name: str) -> int:
        try:
            return self.module_names.index(name)
        except ValueError:
            raise ConfigError(f"unknown module {name!r}") from None

    def single_module_view(self, name: str) -> "Cohort":
        """Project the cohort onto one module, keeping ids, covariates, and mrs."""
        idx = self.module_index(name)
        patients = tuple(
            PatientRecord(
                patient_id=p.patient_id,
                age=p.age,
                nihss=p.nihss,
                module_probs=(p.module_probs[idx],),
                mrs=p.mrs,
            )
            for p in self.patients
        )
        return Cohort(module_names=(name,), patients=patients)


@dataclass(frozen=True)
class Violation:
    """One validation finding; ``patient_id`` is None for cohort-level findings."""

    patient_id: str | None
    field: str
    reason: str

    def __str__(self) -> str:
        who = self.patient_id if self.patient_id is not None else "<cohort>"
        return f"{who}: {self.field}: {self.reason}"


def _is_prob(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and 0.0 <= value <= 1.0


def validate_cohort(cohort: Cohort) -> list[Violation]:
    """Check every record invariant; violations are returned, never raised."""
    violations: list[Violation] = []
    if not cohort.module_names:
        violations.append(Violation(None, "module_names", "empty module list"))
    if len(set(cohort.module_names)) != len(cohort.module_names):
        violations.append(Violation(None, "module_names", "duplicate module names"))
    if not cohort.patients:
        violations.append(Violation(None, "patients", "empty cohort"))
        return violations

    seen_ids: set[str] = set()
    for p in cohort.patients:
        pid = p.patient_id
        if not pid:
            violations.append(Violation(pid, "patient_id", "empty patient id"))
        elif pid in seen_ids:
            violations.append(Violation(pid, "patient_id", "duplicate patient id"))
        seen_ids.add(pid)
        if not (isinstance(p.age, (int, float)) and math.isfinite(p.age) and p.age >= 0):
            violations.append(Violation(pid, "age", f"age must be a finite value >= 0, got {p.age!r}"))
        if not isinstance(p.nihss, int) or isinstance(p.nihss, bool) or not 0 <= p.nihss <= NIHSS_MAX:
            violations.append(
                Violation(pid, "nihss", f"nihss must be an integer in 0..{NIHSS_MAX}, got {p.nihss!r}")
            )
        if p.mrs is not None and (
            not isinstance(p.mrs, int) or isinstance(p.mrs, bool) or not 0 <= p.mrs <= MRS_MAX
        ):
            violations.append(
                Violation(pid, "mrs", f"mrs must be an integer in 0..{MRS_MAX} or absent, got {p.mrs!r}")
            )
        if len(p.module_probs) != cohort.n_modules:
            violations.append(
                Violation(
                    pid,
                    "module_probs",
                    f"expected {cohort.n_modules} probabilities, got {len(p.module_probs)}",
                )
            )
            continue
        for name, prob in zip(cohort.module_names, p.module_probs):
            if not _is_prob(prob):
                violations.append(
                    Violation(pid, f"p_{name.lower()}", f"probability must be in [0, 1], got {prob!r}")
                )
    return violations


def _module_name_from_column(column: str) -> str:
    suffix = column[len(CSV_MODULE_PREFIX):]
    return _CANONICAL_MODULES.get(suffix.lower(), suffix.upper())


def _module_column(name: str) -> str:
    return CSV_MODULE_PREFIX + name.lower()


def read_cohort_csv(path: str | Path) -> Cohort:
    """Read a cohort from CSV.

    Required columns: patient_id, age, nihss, mrs (value may be empty).
    Module probabilities are discovered by the ``p_`` column prefix and
    their header order defines the cohort's module ordering.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise ValidationError(f"{path}: missing header row")
        missing = [col for col in CSV_REQUIRED_COLUMNS if col not in header]
        if missing:
            raise ValidationError(f"{path}: missing required columns: {', '.join(missing)}")
        module_columns = [col for col in header if col.startswith(CSV_MODULE_PREFIX)]
        if not module_columns:
            raise ValidationError(f"{path}: no module probability columns (prefix {CSV_MODULE_PREFIX!r})")
        module_names = tuple(_module_name_from_column(col) for col in module_columns)

        patients: list[PatientRecord] = []
        for line_no, row in enumerate(reader, start=2):
            try:
                mrs_text = (row["mrs"] or "").strip()
                patients.append(
                    PatientRecord(
                        patient_id=(row["patient_id"] or "").strip(),
                        age=float(row["age"]),
                        nihss=int(row["nihss"]),
                        module_probs=tuple(float(row[col]) for col in module_columns),
                        mrs=int(mrs_text) if mrs_text else None,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{line_no}: unparseable row: {exc}") from exc
    return Cohort(module_names=module_names, patients=tuple(patients))


def write_cohort_csv(cohort: Cohort, path: str | Path) -> None:
    """Write a cohort in the standard CSV schema (atomically: temp file + rename)."""
    path = Path(path)
    header = list(CSV_REQUIRED_COLUMNS) + [_module_column(name) for name in cohort.module_names]
    tmp_path = path.with_name(path.name + ".tmp")
    with tmp_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for p in cohort.patients:
            writer.writerow(
                [p.patient_id, repr(float(p.age)), p.nihss, "" if p.mrs is None else p.mrs]
                + [repr(float(prob)) for prob in p.module_probs]
            )
    os.replace(tmp_path, path)
