from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from django.core.management.base import CommandError
from django.db import transaction

from zhom.models import AlgebraRecord, VerdictRecord
from zhom.services.algebra_file import AlgebraFile
from zhom.services.regularity import DualityReport, Regular, RegularityReport, SuiteReport


@dataclass(frozen=True)
class ExportStats:
    total_verdicts: int
    regular_count: int
    failing_count: int
    output_path: Path


def record_algebra(spec: AlgebraFile) -> AlgebraRecord:
    record, _ = AlgebraRecord.objects.get_or_create(
        fingerprint=spec.fingerprint,
        defaults={"name": spec.name, "definition": spec.to_json()},
    )
    return record


@transaction.atomic
def record_regularity(spec: AlgebraFile, report: RegularityReport) -> VerdictRecord:
    verdict = report.verdict
    regular = isinstance(verdict, Regular)
    return VerdictRecord.objects.create(
        algebra=record_algebra(spec),
        kind=VerdictRecord.Kind(report.kind),
        verdict=VerdictRecord.Verdict.REGULAR if regular else VerdictRecord.Verdict.FAILS,
        d=verdict.d if regular else None,
        l=verdict.l if regular else None,
        report=report.to_json(),
    )


@transaction.atomic
def record_suite(spec: AlgebraFile, suite: SuiteReport) -> VerdictRecord:
    verdict = suite.reports["AS"].verdict
    regular = suite.agree and isinstance(verdict, Regular)
    return VerdictRecord.objects.create(
        algebra=record_algebra(spec),
        kind=VerdictRecord.Kind.SUITE,
        verdict=VerdictRecord.Verdict.REGULAR if regular else VerdictRecord.Verdict.FAILS,
        d=verdict.d if regular else None,
        l=verdict.l if regular else None,
        report=suite.to_json(),
    )


@transaction.atomic
def record_duality(spec: AlgebraFile, report: DualityReport) -> VerdictRecord:
    return VerdictRecord.objects.create(
        algebra=record_algebra(spec),
        kind=VerdictRecord.Kind.DUALITY,
        verdict=VerdictRecord.Verdict.MATCHED if report.matched else VerdictRecord.Verdict.MISMATCHED,
        d=report.d,
        subject=report.module,
        report=report.to_json(),
    )


def export_verdicts(*, out_dir: Path, kind: str | None = None) -> ExportStats:
    """Write every stored verdict to ``zhom_verdicts.csv`` in ``out_dir``."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CommandError(f"Could not create output directory: {out_dir}", returncode=4) from exc

    output_path = out_dir / "zhom_verdicts.csv"
    header = [
        "algebra",
        "fingerprint",
        "kind",
        "verdict",
        "d",
        "l",
        "subject",
        "created_at",
        "report",
    ]

    records = VerdictRecord.objects.select_related("algebra").order_by(
        "algebra__name", "kind", "created_at", "id"
    )
    if kind:
        records = records.filter(kind=kind)

    total = regular = failing = 0
    with output_path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for record in records.iterator():
            total += 1
            if record.verdict in {VerdictRecord.Verdict.REGULAR, VerdictRecord.Verdict.MATCHED}:
                regular += 1
            else:
                failing += 1
            writer.writerow(
                [
                    record.algebra.name,
                    record.algebra.fingerprint,
                    record.kind,
                    record.verdict,
                    "" if record.d is None else record.d,
                    "" if record.l is None else record.l,
                    record.subject,
                    record.created_at.isoformat(),
                    json.dumps(record.report, sort_keys=True, separators=(",", ":")),
                ]
            )

    return ExportStats(
        total_verdicts=total,
        regular_count=regular,
        failing_count=failing,
        output_path=output_path,
    )
