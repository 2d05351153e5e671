"""Command-line interface.

Commands: ``fuse`` (per-patient fusion table), ``cv`` (cross-validated
evaluation of modules and ensembles), ``compare`` (signed-rank comparison
of two summaries), ``synth`` (synthetic cohort generation), ``validate``
(cohort schema checks).

Exit codes: 0 success, 2 validation or configuration problem, 3 I/O
problem. Errors are printed to stderr as single ``error: ...`` lines.
A JSON config file may preset shared options; explicit flags win. The
MRSFUSE_CONFIG environment variable names a default config file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .cohort import (
    ClinicalNormalizer,
    Cohort,
    read_cohort_csv,
    validate_cohort,
    write_cohort_csv,
)
from .crossval import (
    CvPlan,
    compare_summary_dicts,
    evaluate_model,
    evaluate_per_module,
    resolve_fold_config,
)
from .errors import ConfigError, DegenerateDataError, ValidationError
from .fusion import FUSION_VARIABLES, THRESHOLD_STRATEGIES, FusionConfig, fuse_patient
from .metrics import MEASURES
from .synth import SyntheticSpec, generate_cohort

CONFIG_ENV_VAR = "MRSFUSE_CONFIG"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

CONFIG_FILE_KEYS = (
    "cohort",
    "variable",
    "norm_min",
    "norm_max",
    "tau",
    "tau_star",
    "strategy",
    "k",
    "runs",
    "seed",
    "stratified",
    "out",
    "format",
)

SYNTH_SPEC_KEYS = (
    "n_patients",
    "prevalence_poor",
    "module_aucs",
    "module_names",
    "rho_age",
    "rho_nihss",
    "seed",
)


def _write_text_atomic(path: Path, text: str) -> None:
    tmp_path = path.with_name(path.name + ".tmp")
    tmp_path.write_text(text, encoding="utf-8")
    os.replace(tmp_path, path)


def _json_dumps(document: object) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _load_json(path: Path, allowed_keys: tuple[str, ...], what: str) -> dict:
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: {what} must be a JSON object")
    unknown = sorted(set(document) - set(allowed_keys))
    if unknown:
        raise ConfigError(f"{path}: unknown {what} keys: {', '.join(unknown)}")
    return document


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cohort", help="cohort CSV path")
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--variable", choices=FUSION_VARIABLES, help="clinical weighting variable")
    parser.add_argument("--norm-min", type=float, help="covariate normalization lower bound")
    parser.add_argument("--norm-max", type=float, help="covariate normalization upper bound")
    parser.add_argument("--tau", type=float, help="preliminary (module-label) threshold")
    parser.add_argument("--tau-star", type=float, help="final decision threshold")
    parser.add_argument("--strategy", choices=THRESHOLD_STRATEGIES, help="threshold selection strategy")
    parser.add_argument("--k", type=int, help="number of cross-validation folds")
    parser.add_argument("--runs", type=int, help="number of repeated runs")
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrsfuse",
        description="Covariate-weighted late fusion and evaluation for binary outcome prediction.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, description in (
        ("fuse", "fuse module probabilities into per-patient predictions"),
        ("cv", "cross-validated evaluation of modules and ensembles"),
        ("validate", "check a cohort CSV against the schema invariants"),
    ):
        sub = commands.add_parser(name, help=description)
        _add_shared_flags(sub)

    compare = commands.add_parser("compare", help="signed-rank comparison of two cv summaries")
    compare.add_argument("summary_a", help="first summary JSON")
    compare.add_argument("summary_b", help="second summary JSON")
    compare.add_argument("--measure", required=True, help=f"one of {', '.join(MEASURES)}")
    compare.add_argument("--variant-a", help="variant name in the first file (default: its primary)")
    compare.add_argument("--variant-b", help="variant name in the second file (default: its primary)")
    compare.add_argument("--out", help="output path (default: stdout)")

    synth = commands.add_parser("synth", help="generate a synthetic cohort CSV")
    synth.add_argument("--spec", help="synthetic spec JSON (flags override it)")
    synth.add_argument("--n-patients", type=int, help="cohort size")
    synth.add_argument("--prevalence", type=float, help="poor-outcome prevalence in (0, 1)")
    synth.add_argument("--module-aucs", help="comma-separated per-module AUC targets")
    synth.add_argument("--module-names", help="comma-separated module names")
    synth.add_argument("--rho-age", type=float, help="age-outcome copula correlation")
    synth.add_argument("--rho-nihss", type=float, help="nihss-outcome copula correlation")
    synth.add_argument("--seed", type=int, help="generator seed")
    synth.add_argument("--out", required=True, help="cohort CSV output path")

    return parser


class _Settings:
    """Flag values merged over config-file values merged over defaults."""

    DEFAULTS = {
        "variable": "nihss",
        "strategy": "youden",
        "k": 5,
        "runs": 10,
        "seed": 0,
        "stratified": True,
    }

    def __init__(self, args: argparse.Namespace):
        config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
        self.file_values: dict = {}
        if config_path:
            self.file_values = _load_json(Path(config_path), CONFIG_FILE_KEYS, "config")
        self.args = args

    def get(self, key: str, flag: str | None = None):
        flag_value = getattr(self.args, flag or key, None)
        if flag_value is not None:
            return flag_value
        if key in self.file_values:
            return self.file_values[key]
        return self.DEFAULTS.get(key)

    def fusion_config(self) -> FusionConfig:
        variable = self.get("variable")
        norm_min = self.get("norm_min")
        norm_max = self.get("norm_max")
        if (norm_min is None) != (norm_max is None):
            raise ConfigError("--norm-min and --norm-max must be given together")
        normalizer = None
        if norm_min is not None:
            if variable == "none":
                raise ConfigError("normalization bounds require a clinical variable")
            normalizer = ClinicalNormalizer(variable=variable, min=norm_min, max=norm_max)
        return FusionConfig(
            clinical_variable=variable,
            normalizer=normalizer,
            prelim_threshold=self.get("tau"),
            final_threshold=self.get("tau_star"),
            strategy=self.get("strategy"),
        )

    def plan(self) -> CvPlan:
        return CvPlan(
            k=self.get("k"),
            n_runs=self.get("runs"),
            base_seed=self.get("seed"),
            stratified=bool(self.get("stratified")),
        )

    def cohort_path(self) -> Path:
        cohort = self.get("cohort")
        if not cohort:
            raise ConfigError("a cohort CSV is required (--cohort or config file)")
        return Path(cohort)


def _read_valid_cohort(path: Path) -> Cohort:
    cohort = read_cohort_csv(path)
    violations = validate_cohort(cohort)
    if violations:
        for violation in violations:
            print(f"error: validation: {violation}", file=sys.stderr)
        raise ValidationError(f"{path}: {len(violations)} validation violations")
    return cohort


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text_atomic(Path(out), text)


def _cmd_fuse(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    cohort = _read_valid_cohort(settings.cohort_path())
    config = settings.fusion_config()
    resolved, _ = resolve_fold_config(cohort.patients, config)
    unweighted = FusionConfig(
        clinical_variable="none",
        prelim_threshold=resolved.prelim_threshold,
        final_threshold=resolved.final_threshold,
        strategy=resolved.strategy,
    )

    rows = []
    for patient in cohort.patients:
        weighted_result = fuse_patient(patient, resolved)
        unweighted_result = fuse_patient(patient, unweighted)
        row: dict = {"patient_id": patient.patient_id}
        for name, prob in zip(cohort.module_names, patient.module_probs):
            row[f"p_{name.lower()}"] = prob
        for name, weight in zip(cohort.module_names, weighted_result.weights):
            row[f"w_{name.lower()}"] = weight
        row["fused_prob"] = weighted_result.fused_probability
        row["label_unweighted"] = str(unweighted_result.final_label)
        row["label_weighted"] = str(weighted_result.final_label)
        rows.append(row)

    fmt = settings.get("format") or "csv"
    if fmt == "json":
        document = {
            "config": {
                "clinical_variable": resolved.clinical_variable,
                "prelim_threshold": resolved.prelim_threshold,
                "final_threshold": resolved.final_threshold,
            },
            "patients": rows,
        }
        _emit(_json_dumps(document), settings.get("out"))
    else:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
        _emit(buffer.getvalue(), settings.get("out"))
    return EXIT_OK


def _cmd_cv(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    cohort_path = settings.cohort_path()
    cohort = _read_valid_cohort(cohort_path)
    config = settings.fusion_config()
    plan = settings.plan()

    variants: dict[str, dict] = {}
    for name, summary in evaluate_per_module(cohort, plan).items():
        variants[name] = summary.as_dict()
    baseline = FusionConfig(
        clinical_variable="none",
        prelim_threshold=config.prelim_threshold,
        final_threshold=config.final_threshold,
        strategy=config.strategy,
    )
    ensemble = evaluate_model(cohort, plan, baseline)
    variants[ensemble.model] = ensemble.as_dict()
    primary = ensemble.model
    if config.clinical_variable != "none":
        weighted = evaluate_model(cohort, plan, config)
        variants[weighted.model] = weighted.as_dict()
        primary = weighted.model

    document = {
        "cohort": str(cohort_path),
        "plan": plan.as_dict(),
        "primary": primary,
        "variants": variants,
    }

    order = list(cohort.module_names) + ["ensemble"] + ([primary] if primary != "ensemble" else [])
    _print_cv_table(variants, order)

    fmt = settings.get("format") or "json"
    out = settings.get("out")
    if fmt == "csv":
        text = _cv_table_csv(variants, order)
        _emit(text, out)
    elif out is not None:
        _write_text_atomic(Path(out), _json_dumps(document))
    else:
        sys.stdout.write(_json_dumps(document))
    return EXIT_OK


def _variant_cell(variant: dict, measure: str) -> str:
    stats = variant["measures"][measure]
    if stats is None:
        return "n/a"
    return f"{stats['mean']:.3f} ± {stats['std']:.3f}"


def _print_cv_table(variants: dict[str, dict], order: list[str]) -> None:
    width = max(15, *(len(name) + 2 for name in order))
    header = "measure".ljust(12) + "".join(name.rjust(width) for name in order)
    print(header)
    for measure in MEASURES:
        cells = [_variant_cell(variants[name], measure).rjust(width) for name in order]
        print(measure.ljust(12) + "".join(cells))
    for name in order:
        failures = variants[name]["failures"]
        if failures:
            print(f"note: {name}: {len(failures)} failed runs ({failures[0]}...)")


def _cv_table_csv(variants: dict[str, dict], order: list[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["model"] + [f"{m}_{s}" for m in MEASURES for s in ("mean", "std")])
    for name in order:
        row: list = [name]
        for measure in MEASURES:
            stats = variants[name]["measures"][measure]
            row += ["", ""] if stats is None else [stats["mean"], stats["std"]]
        writer.writerow(row)
    return buffer.getvalue()


def _pick_variant(document: dict, requested: str | None, path: str) -> dict:
    if "variants" in document:
        name = requested or document.get("primary")
        if name not in document["variants"]:
            raise ConfigError(f"{path}: variant {name!r} not present")
        return document["variants"][name]
    if "runs" in document:
        return document
    raise ValidationError(f"{path}: not a recognizable summary file")


def _cmd_compare(args: argparse.Namespace) -> int:
    doc_a = json.loads(Path(args.summary_a).read_text(encoding="utf-8"))
    doc_b = json.loads(Path(args.summary_b).read_text(encoding="utf-8"))
    summary_a = _pick_variant(doc_a, args.variant_a, args.summary_a)
    summary_b = _pick_variant(doc_b, args.variant_b, args.summary_b)
    result = compare_summary_dicts(summary_a, summary_b, args.measure)
    document = {
        "measure": args.measure,
        "a": {"path": args.summary_a, "model": summary_a.get("model")},
        "b": {"path": args.summary_b, "model": summary_b.get("model")},
        **result.as_dict(),
    }
    _emit(_json_dumps(document), args.out)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    values: dict = {}
    if args.spec:
        values.update(_load_json(Path(args.spec), SYNTH_SPEC_KEYS, "synthetic spec"))
    if args.n_patients is not None:
        values["n_patients"] = args.n_patients
    if args.prevalence is not None:
        values["prevalence_poor"] = args.prevalence
    if args.module_aucs is not None:
        values["module_aucs"] = [float(x) for x in args.module_aucs.split(",")]
    if args.module_names is not None:
        values["module_names"] = [x.strip() for x in args.module_names.split(",")]
    if args.rho_age is not None:
        values["rho_age"] = args.rho_age
    if args.rho_nihss is not None:
        values["rho_nihss"] = args.rho_nihss
    if args.seed is not None:
        values["seed"] = args.seed
    if "n_patients" not in values:
        raise ConfigError("n_patients is required (--n-patients or spec file)")
    if "module_aucs" in values:
        values["module_aucs"] = tuple(values["module_aucs"])
    if "module_names" in values:
        values["module_names"] = tuple(values["module_names"])

    try:
        spec = SyntheticSpec(**values)
    except TypeError as exc:
        raise ConfigError(f"invalid synthetic spec: {exc}") from exc
    cohort = generate_cohort(spec)
    write_cohort_csv(cohort, args.out)
    print(f"wrote {len(cohort.patients)} patients to {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    cohort = read_cohort_csv(settings.cohort_path())
    violations = validate_cohort(cohort)
    if violations:
        for violation in violations:
            print(str(violation))
        print(f"error: validation: {len(violations)} violations", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {len(cohort.patients)} patients, {cohort.n_modules} modules")
    return EXIT_OK


_COMMANDS = {
    "fuse": _cmd_fuse,
    "cv": _cmd_cv,
    "compare": _cmd_compare,
    "synth": _cmd_synth,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ConfigError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
