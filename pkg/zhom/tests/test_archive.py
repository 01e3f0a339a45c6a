from __future__ import annotations

import csv
import json

import pytest
from django.core.management import call_command

from zhom.models import AlgebraRecord, VerdictRecord
from zhom.services import archive
from zhom.services.algebra_file import builtin_file
from zhom.services.modules import truncation_quotient_row
from zhom.services.regularity import check_as_regular, verify_local_duality


def _read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


@pytest.mark.django_db
def test_record_regularity_stores_verdict_and_algebra():
    spec = builtin_file("poly", {"n": 1}, window=(0, 10), guard=2)
    report = check_as_regular(spec.build(), 1)

    record = archive.record_regularity(spec, report)
    archive.record_regularity(spec, report)

    assert AlgebraRecord.objects.count() == 1
    assert record.algebra.fingerprint == spec.fingerprint
    assert record.kind == VerdictRecord.Kind.AS
    assert record.verdict == VerdictRecord.Verdict.REGULAR
    assert (record.d, record.l) == (1, -1)
    assert record.report["checkedRange"] == [3, 4, 5, 6, 7]


@pytest.mark.django_db
def test_failing_verdict_has_no_parameters():
    spec = builtin_file("nil", window=(0, 10), guard=2)
    record = archive.record_regularity(spec, check_as_regular(spec.build(), 1))

    assert record.verdict == VerdictRecord.Verdict.FAILS
    assert record.d is None
    assert record.l is None


@pytest.mark.django_db
def test_record_duality_keeps_module_label():
    spec = builtin_file("poly", {"n": 1}, window=(0, 10), guard=2)
    a = spec.build()
    report = verify_local_duality(a, truncation_quotient_row(a, 3, 1), check_as_regular(a, 1))

    record = archive.record_duality(spec, report)
    assert record.kind == VerdictRecord.Kind.DUALITY
    assert record.verdict == VerdictRecord.Verdict.MATCHED
    assert record.subject == "e_3A0"


@pytest.mark.django_db
def test_export_verdicts_schema_and_rows(tmp_path):
    poly = builtin_file("poly", {"n": 1}, window=(0, 10), guard=2)
    nil = builtin_file("nil", window=(0, 10), guard=2)
    archive.record_regularity(poly, check_as_regular(poly.build(), 1))
    archive.record_regularity(nil, check_as_regular(nil.build(), 1))

    out = tmp_path / "exports"
    call_command("export_verdicts", out=str(out))

    rows = _read_csv(out / "zhom_verdicts.csv")
    assert rows[0] == [
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
    assert len(rows) == 3
    # ordered by algebra name
    assert [r[0] for r in rows[1:]] == ["nil", "poly(1)"]
    assert rows[1][3:6] == ["FAILS", "", ""]
    assert rows[2][3:6] == ["REGULAR", "1", "-1"]
    assert json.loads(rows[2][8])["verdict"] == "Regular"


@pytest.mark.django_db
def test_export_verdicts_filters_by_kind(tmp_path, capsys):
    spec = builtin_file("poly", {"n": 1}, window=(0, 10), guard=2)
    a = spec.build()
    report = check_as_regular(a, 1)
    archive.record_regularity(spec, report)
    archive.record_duality(spec, verify_local_duality(a, truncation_quotient_row(a, 3, 1), report))

    call_command("export_verdicts", out=str(tmp_path), kind="DUALITY")

    rows = _read_csv(tmp_path / "zhom_verdicts.csv")
    assert [r[2] for r in rows[1:]] == ["DUALITY"]
    out = capsys.readouterr().out
    assert "- total_verdicts: 1" in out
    assert "- regular_count: 1" in out


@pytest.mark.django_db
def test_check_command_records_when_asked():
    call_command(
        "zhom_check",
        "--builtin",
        "poly",
        "--param",
        "n=1",
        "--window",
        "0",
        "10",
        "--as",
        "--dmax",
        "1",
        "--record",
    )
    assert VerdictRecord.objects.filter(kind=VerdictRecord.Kind.AS).count() == 1
