"""Suite partitioning: conformance and distinguishing sets per model.

A test is *weak* when it always terminates under full weak fairness and
*strong* when only the strong check passes.  Conformance sets are
flavor-restricted to match that split: the weak variant of a model is
scored on weak tests, the strong variant on strong tests.  A
distinguishing test for a variant conforms to it but to none of the
strictly-less-fair variants, so it pins down the variant's boundary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .lts import DEFAULT_MAX_STATES
from .models import (
    Fairness,
    Hierarchy,
    ModelVariant,
    ProgressModel,
    all_model_variants,
    default_hierarchy,
    variant_token,
)
from .oracle import check_matrix

WEAK_FAIR = variant_token((ProgressModel.FAIR, Fairness.WEAK))
STRONG_FAIR = variant_token((ProgressModel.FAIR, Fairness.STRONG))
UNFAIR = variant_token((ProgressModel.UNFAIR, None))


@dataclass(frozen=True, slots=True)
class SuiteReport:
    names: tuple[str, ...]
    matrix: dict[str, dict[str, bool]]
    weak_tests: tuple[str, ...]
    strong_tests: tuple[str, ...]
    unclassified: tuple[str, ...]  # fail even strong full fairness
    conformance: dict[str, tuple[str, ...]]
    distinguishing: dict[str, tuple[str, ...]]
    anomalies: tuple[str, ...]
    errors: dict[str, str]
    hierarchy_tokens: tuple[str, ...]

    @property
    def weak_fraction(self) -> float:
        classified = len(self.weak_tests) + len(self.strong_tests) + len(self.unclassified)
        return len(self.weak_tests) / classified if classified else 0.0


def classify_suite(
    tests,
    hierarchy: Hierarchy | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> SuiteReport:
    """Verdict matrix plus partitions for a whole suite.

    The matrix always carries all verdict-producing variants; the
    hierarchy (default: without the HSA/OBE combination) decides which
    variants get conformance and distinguishing sets.
    """
    if hierarchy is None:
        hierarchy = default_hierarchy()
    matrix: dict[str, dict[str, bool]] = {}
    errors: dict[str, str] = {}
    names = []
    for test in tests:
        names.append(test.name)
        try:
            verdicts = check_matrix(test, max_states=max_states)
        except Exception as exc:  # noqa: BLE001 - recorded, not fatal
            errors[test.name] = f"{type(exc).__name__}: {exc}"
            continue
        matrix[test.name] = {tok: v.passed for tok, v in verdicts.items()}

    classified = [n for n in names if n in matrix]
    weak = tuple(n for n in classified if matrix[n][WEAK_FAIR])
    strong = tuple(
        n for n in classified if matrix[n][STRONG_FAIR] and not matrix[n][WEAK_FAIR]
    )
    unclassified = tuple(n for n in classified if not matrix[n][STRONG_FAIR])

    def pool(variant: ModelVariant) -> tuple[str, ...]:
        if variant[1] is Fairness.WEAK:
            return weak
        if variant[1] is Fairness.STRONG:
            return strong
        return tuple(classified)

    conformance: dict[str, tuple[str, ...]] = {}
    for variant in hierarchy.variants:
        tok = variant_token(variant)
        conformance[tok] = tuple(n for n in pool(variant) if matrix[n][tok])

    distinguishing: dict[str, tuple[str, ...]] = {}
    for variant in hierarchy.variants:
        tok = variant_token(variant)
        lower: set[str] = set()
        for q in hierarchy.strictly_below(variant):
            lower.update(conformance[variant_token(q)])
        distinguishing[tok] = tuple(
            n for n in conformance[tok] if n not in lower
        )

    anomalies = []
    ordered = hierarchy.variants
    for name in classified:
        row = matrix[name]
        for high in ordered:
            for low in hierarchy.strictly_below(high):
                lo_tok, hi_tok = variant_token(low), variant_token(high)
                if row[lo_tok] and not row[hi_tok]:
                    anomalies.append(
                        f"{name}: passes {lo_tok} but fails {hi_tok}"
                    )

    return SuiteReport(
        names=tuple(names),
        matrix=matrix,
        weak_tests=weak,
        strong_tests=strong,
        unclassified=unclassified,
        conformance=conformance,
        distinguishing=distinguishing,
        anomalies=tuple(anomalies),
        errors=errors,
        hierarchy_tokens=tuple(variant_token(v) for v in hierarchy.variants),
    )


def matrix_csv(report: SuiteReport) -> str:
    columns = [variant_token(v) for v in all_model_variants(True)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["test"] + columns)
    for name in sorted(report.matrix):
        row = report.matrix[name]
        writer.writerow([name] + ["pass" if row[c] else "fail" for c in columns])
    return buf.getvalue()


def partitions_json_dict(report: SuiteReport) -> dict:
    return {
        "weak_tests": list(report.weak_tests),
        "strong_tests": list(report.strong_tests),
        "unclassified": list(report.unclassified),
        "weak_fraction": report.weak_fraction,
        "conformance": {k: list(v) for k, v in report.conformance.items()},
        "distinguishing": {k: list(v) for k, v in report.distinguishing.items()},
        "anomalies": list(report.anomalies),
        "errors": dict(report.errors),
        "hierarchy": list(report.hierarchy_tokens),
    }


def _grid_rows(
    counts: dict[str, int], hierarchy_tokens
) -> list[tuple[str, str, str, str, str]]:
    """Rows for the distinguishing/conformance grid, 'full' last."""

    def cell(kind: str, flavor: str, model: str) -> str:
        return str(counts.get(f"{kind}:{flavor}-{model}", "-"))

    models = []
    for tok in hierarchy_tokens:
        if tok.startswith("weak-"):
            model = tok[len("weak-") :]
            if model != "fair" and model not in models:
                models.append(model)
    rows = []
    for model in models + ["fair"]:
        label = "full" if model == "fair" else model
        rows.append(
            (
                label,
                cell("D", "weak", model),
                cell("C", "weak", model),
                cell("D", "strong", model),
                cell("C", "strong", model),
            )
        )
    return rows


def summary_text(report: SuiteReport) -> str:
    lines = [summary_from_partitions(partitions_json_dict(report)).rstrip("\n")]
    if report.unclassified:
        lines.append("")
        lines.append(
            f"tests failing even strong full fairness: {len(report.unclassified)}"
        )
    if report.anomalies:
        lines.append("")
        lines.append("hierarchy anomalies:")
        lines.extend(f"  {a}" for a in report.anomalies)
    if report.errors:
        lines.append("")
        lines.append("errors:")
        lines.extend(f"  {n}: {msg}" for n, msg in sorted(report.errors.items()))
    return "\n".join(lines) + "\n"


def summary_from_partitions(data: dict) -> str:
    """Re-render the grid from a saved partitions document."""
    weak = data.get("weak_tests", [])
    strong = data.get("strong_tests", [])
    unclassified = data.get("unclassified", [])
    total = len(weak) + len(strong) + len(unclassified)
    lines = [
        f"tests classified: {total}",
        f"weak tests: {len(weak)}",
        f"strong tests: {len(strong)}",
        f"weak fraction: {data.get('weak_fraction', 0.0):.3f}",
        "",
    ]
    counts: dict[str, int] = {}
    for tok, tests in data.get("conformance", {}).items():
        counts[f"C:{tok}"] = len(tests)
    for tok, tests in data.get("distinguishing", {}).items():
        counts[f"D:{tok}"] = len(tests)
    hierarchy = data.get("hierarchy", [])
    header = f"{'model':<10}{'weak D':>8}{'weak C':>8}{'strong D':>10}{'strong C':>10}"
    lines.append(header)
    for label, wd, wc, sd, sc in _grid_rows(counts, hierarchy):
        lines.append(f"{label:<10}{wd:>8}{wc:>8}{sd:>10}{sc:>10}")
    return "\n".join(lines) + "\n"


def write_report(report: SuiteReport, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "matrix": out / "matrix.csv",
        "partitions": out / "partitions.json",
        "summary": out / "summary.txt",
    }
    paths["matrix"].write_text(matrix_csv(report), encoding="utf-8")
    paths["partitions"].write_text(
        json.dumps(partitions_json_dict(report), indent=2) + "\n", encoding="utf-8"
    )
    paths["summary"].write_text(summary_text(report), encoding="utf-8")
    return paths
