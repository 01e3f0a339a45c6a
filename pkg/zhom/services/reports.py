"""Rendering of reports: deterministic JSON and short human summaries."""

from __future__ import annotations

import json
from collections.abc import Sequence
from typing import Any

from zhom.services.algebra import ValidationReport
from zhom.services.regularity import DualityReport, RegularityReport, SuiteReport
from zhom.services.resolutions import FreeResolution, betti_rows, pd_of


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def summary(title: str, items: Sequence[tuple[str, Any]]) -> str:
    return "\n".join([f"{title}:", *(f"- {key}: {value}" for key, value in items)])


def table(header: Sequence[Any], rows: Sequence[Sequence[Any]]) -> str:
    cells = [[str(c) for c in header], *([str(c) for c in row] for row in rows)]
    widths = [max(len(row[n]) for row in cells) for n in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


# ── validation ───────────────────────────────────────────────────────────


def validation_text(report: ValidationReport) -> str:
    lines = [summary("Validation", [("algebra", report.algebra), ("violations", len(report.violations))])]
    for v in report.violations:
        basis = f" basis {list(v.basis)}" if v.basis else ""
        lines.append(f"  {v.axiom} at {list(v.degrees)}{basis}: {v.detail}")
    return "\n".join(lines)


# ── resolutions ──────────────────────────────────────────────────────────


def resolution_json(res: FreeResolution) -> dict[str, Any]:
    return {**res.to_json(), "pd": pd_of(res).to_json(), "bettiTable": betti_rows(res)}


def betti_text(res: FreeResolution) -> str:
    rows = betti_rows(res)
    if not rows:
        return "(zero module)"
    offsets = [j - p for (p, j) in res.betti()]
    lo = min(offsets)
    header = ["", *range(res.length + 1)]
    body = [[f"{lo + r}:", *(n or "." for n in row)] for r, row in enumerate(rows)]
    return table(header, body)


def resolution_text(res: FreeResolution) -> str:
    head = summary(
        "Resolution",
        [
            ("module", res.module.label),
            ("algebra", res.algebra.name),
            ("status", res.status),
            ("pd", pd_of(res)),
        ],
    )
    generators = "\n".join(f"  F{p}: {list(res.generators(p))}" for p in range(res.length + 1))
    return "\n".join([head, "Generators:", generators, "Betti table:", betti_text(res)])


# ── regularity ───────────────────────────────────────────────────────────


def regularity_text(report: RegularityReport) -> str:
    items: list[tuple[str, Any]] = [
        ("algebra", report.algebra),
        ("verdict", report.verdict),
        ("checked_range", f"[{report.checked_range[0]}, {report.checked_range[-1]}]"),
    ]
    if report.regular:
        items.append(("raw_offset", report.verdict.offset))
    else:
        items.append(("witness", dumps(report.verdict.witness).replace("\n", " ")))
    lines = [summary(f"{report.kind} check", items)]
    lines.extend(f"  caveat: {c}" for c in report.caveats)
    return "\n".join(lines)


def suite_text(suite: SuiteReport) -> str:
    items = [(name, r.verdict) for name, r in sorted(suite.reports.items())]
    items.append(("verdicts_agree", suite.verdicts_agree))
    items.append(("agree", suite.agree))
    lines = [summary(f"Equivalence suite for {suite.algebra}", items)]
    for side, rows in sorted(suite.generator_tables.items()):
        bad = [row for row in rows if row[2] != row[3]]
        lines.append(f"- generator_table[{side}]: {len(rows)} cells, {len(bad)} mismatched")
    if suite.generator_tables:
        lines.append(f"- hypothesis_mismatches: {len(suite.hypothesis_mismatches)}")
    return "\n".join(lines)


def duality_text(report: DualityReport) -> str:
    head = summary(
        "Local duality",
        [("module", report.module), ("d", report.d), ("matched", report.matched)],
    )
    rows = [
        [c.q, c.degree, c.lhs, c.rhs, "ok" if c.matched else "MISMATCH"] for c in report.cells
    ]
    lines = [head, table(["q", "degree", "D R^q", "Ext^(d-q)", ""], rows) if rows else "(no nonzero cells)"]
    lines.extend(f"- iso[q={q}]: {v}" for q, v in sorted(report.isos.items()))
    lines.extend(f"- undetermined[q={q}]" for q in report.undetermined)
    lines.extend(f"  axiom: {f}" for f in report.axiom_failures[:5])
    lines.extend(f"  caveat: {c}" for c in report.caveats)
    return "\n".join(lines)
