"""Shared fixtures: the published worked-example rows and a CLI runner."""

from __future__ import annotations

import csv
import os
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

SRC_DIR = Path(__file__).resolve().parents[1] / "src"

MODULE_NAMES = ("ADC", "CBF", "CBV", "DWI", "Tmax")

# Operating points for the reference table. The preliminary threshold 0.40
# is consistent with every printed weight pattern. The printed final labels
# (both columns) are jointly consistent only with a final threshold in
# [0.4199, 0.428); 0.425 is used as the table-consistent operating point.
REFERENCE_PRELIM_THRESHOLD = 0.40
TABLE_CONSISTENT_FINAL_THRESHOLD = 0.425

AGE_BOUNDS = (21.3, 94.0)
NIHSS_BOUNDS = (0.0, 26.0)


@dataclass(frozen=True)
class ReferenceRow:
    """One row of the published fusion worked-example table."""

    panel: str  # which covariate the panel weights by: "age" or "nihss"
    patient_id: str
    covariate: float
    probs: tuple[float, ...]
    printed_weights: tuple[float, ...]
    label_unweighted: str
    label_weighted: str
    gs_outcome: str
    mrs: int
    fused_expected: float  # recomputed exactly from the panel's bounds


REFERENCE_ROWS = (
    ReferenceRow("age", "033", 45, (0.45, 0.42, 0.46, 0.27, 0.64),
                 (0.16, 0.16, 0.16, 0.34, 0.16), "poor", "good", "good", 2, 0.416682892907),
    ReferenceRow("age", "046", 80, (0.14, 0.27, 0.55, 0.59, 0.36),
                 (0.08, 0.08, 0.37, 0.37, 0.08), "good", "poor", "poor", 3, 0.487440401506),
    ReferenceRow("age", "162", 55, (0.50, 0.48, 0.46, 0.54, 0.16),
                 (0.19, 0.19, 0.19, 0.19, 0.23), "poor", "good", "good", 0, 0.419827387802),
    ReferenceRow("age", "198", 88, (0.24, 0.56, 0.31, 0.14, 0.35),
                 (0.06, 0.73, 0.06, 0.06, 0.06), "good", "poor", "poor", 5, 0.480617420066),
    ReferenceRow("age", "213", 94, (0.58, 0.39, 0.24, 0.38, 0.22),
                 (1.0, 0.0, 0.0, 0.0, 0.0), "good", "poor", "poor", 4, 0.580000000000),
    ReferenceRow("nihss", "023", 8, (0.68, 0.75, 0.74, 0.07, 0.24),
                 (0.13, 0.13, 0.13, 0.30, 0.30), "poor", "good", "good", 2, 0.382333333333),
    ReferenceRow("nihss", "024", 11, (0.48, 0.33, 0.59, 0.46, 0.31),
                 (0.17, 0.24, 0.17, 0.17, 0.24), "poor", "good", "good", 2, 0.419523809524),
    ReferenceRow("nihss", "027", 26, (0.31, 0.46, 0.17, 0.17, 0.20),
                 (0.0, 1.0, 0.0, 0.0, 0.0), "good", "poor", "poor", 3, 0.460000000000),
    ReferenceRow("nihss", "033", 5, (0.45, 0.42, 0.46, 0.27, 0.64),
                 (0.12, 0.12, 0.12, 0.51, 0.12), "poor", "good", "good", 2, 0.378536585366),
    ReferenceRow("nihss", "046", 23, (0.14, 0.27, 0.55, 0.59, 0.36),
                 (0.05, 0.05, 0.42, 0.42, 0.05), "good", "poor", "poor", 3, 0.518727272727),
)


def panel_rows(panel: str) -> tuple[ReferenceRow, ...]:
    return tuple(row for row in REFERENCE_ROWS if row.panel == panel)


def panel_bounds(panel: str) -> tuple[float, float]:
    return AGE_BOUNDS if panel == "age" else NIHSS_BOUNDS


def write_panel_csv(panel: str, path: Path) -> Path:
    """Write one panel of the reference table in the standard cohort schema."""
    rows = panel_rows(panel)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["patient_id", "age", "nihss", "mrs"] + [f"p_{m.lower()}" for m in MODULE_NAMES])
        for row in rows:
            age = row.covariate if panel == "age" else 70
            nihss = int(row.covariate) if panel == "nihss" else 10
            writer.writerow([row.patient_id, age, nihss, row.mrs] + list(row.probs))
    return path


@pytest.fixture
def nihss_panel_csv(tmp_path: Path) -> Path:
    return write_panel_csv("nihss", tmp_path / "nihss_panel.csv")


@pytest.fixture
def age_panel_csv(tmp_path: Path) -> Path:
    return write_panel_csv("age", tmp_path / "age_panel.csv")


def run_cli(
    *args: str, cwd: Path | None = None, env_config: str | None = None
) -> subprocess.CompletedProcess:
    """Run the CLI in a subprocess against the in-repo sources."""
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC_DIR) + os.pathsep + env.get("PYTHONPATH", "")
    env.pop("MRSFUSE_CONFIG", None)
    if env_config is not None:
        env["MRSFUSE_CONFIG"] = env_config
    return subprocess.run(
        [sys.executable, "-m", "mrsfuse.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        env=env,
    )
