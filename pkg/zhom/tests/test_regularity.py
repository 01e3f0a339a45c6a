from __future__ import annotations

import pytest

from zhom.services.algebra import (
    Window,
    make_nil,
    make_poly,
    make_skew,
    make_trivial,
    random_adjacent_presentation,
)
from zhom.services.derived import LocalCohomology
from zhom.services.errors import (
    ColimitNotStabilizedError,
    RequiresRegularError,
    WindowTooSmallError,
)
from zhom.services.field import Field
from zhom.services.modules import (
    GradedModule,
    bimodule_axiom_failures,
    random_finitely_generated_module,
    scramble_basis,
    truncation_quotient_row,
)
from zhom.services.regularity import (
    DualityCell,
    DualityReport,
    Fails,
    IsoVerdict,
    Regular,
    RegularityReport,
    SuiteReport,
    check_as_regular,
    check_asf_regular,
    check_top_cohomology_shape,
    check_truncation_ext_vanishing,
    dualizing_bimodule,
    dualizing_rows,
    interior_range,
    longest_run,
    module_iso_test,
    verify_equivalence_suite,
    verify_local_duality,
)
from zhom.services.reports import dumps


def _poly1():
    return make_poly(1, Window(0, 10, 2))


def test_interior_range_leaves_room_for_guard_and_dmax():
    a = _poly1()
    assert interior_range(a, 1) == [3, 4, 5, 6, 7]
    assert interior_range(a, 1, margin=2) == [3, 4, 5]


def test_interior_range_rejects_narrow_window():
    with pytest.raises(WindowTooSmallError):
        interior_range(make_poly(1, Window(0, 4, 2)), 3)


def test_poly1_is_as_regular():
    report = check_as_regular(_poly1(), 1)

    assert report.verdict == Regular(1, -1)
    assert report.verdict.offset == 1
    assert report.checked_range == [3, 4, 5, 6, 7]
    assert report.per_index[3]["ext"] == [[1, 4, 1]]
    payload = report.to_json()
    assert payload["verdict"] == "Regular"
    assert (payload["d"], payload["l"], payload["offset"]) == (1, -1, 1)


def test_poly1_is_asf_regular():
    report = check_asf_regular(_poly1(), 1)

    assert report.verdict == Regular(1, -1)
    assert report.checked_range == [3, 4, 5]
    assert report.per_index[5]["top"] == 4
    assert report.per_index[5]["iso"]["iso"] is True


def test_trivial_algebra_is_regular_of_dimension_zero():
    a = make_trivial(Window(0, 6, 1))
    assert check_as_regular(a, 1).verdict == Regular(0, 0)
    assert check_asf_regular(a, 1).verdict == Regular(0, 0)


def test_nil_algebra_fails_both_checks():
    a = make_nil(Window(0, 10, 2))
    as_report = check_as_regular(a, 1)
    asf_report = check_asf_regular(a, 1)

    assert isinstance(as_report.verdict, Fails)
    assert as_report.verdict.reason == "pd window-limited"
    assert not as_report.regular
    assert isinstance(asf_report.verdict, Fails)
    assert asf_report.verdict.reason == "R^0τ(e_jA) nonvanishing"
    assert asf_report.verdict.witness["dims"] == {"3": 1, "4": 1}


def test_checks_agree_with_worker_threads(settings):
    settings.ZHOM_THREADS = 2
    assert check_as_regular(_poly1(), 1).verdict == Regular(1, -1)


def test_module_iso_test_finds_change_of_basis_over_finite_field():
    a = make_poly(2, Window(0, 4, 1), Field.parse("GF5"))
    m = truncation_quotient_row(a, 0, 3)

    verdict = module_iso_test(m, scramble_basis(m, seed=3))
    assert verdict.iso
    assert verdict.certain


def test_module_iso_test_reports_dimension_mismatch():
    a = make_poly(2, Window(0, 4, 1))
    verdict = module_iso_test(truncation_quotient_row(a, 0, 3), truncation_quotient_row(a, 0, 2))

    assert not verdict.iso
    assert verdict.reason == "dimension mismatch at degree 2"


def test_module_iso_test_detects_singular_homomorphisms_over_q():
    a = make_poly(1, Window(0, 4, 1))
    cyclic = truncation_quotient_row(a, 0, 2)
    split = GradedModule(a, {0: 1, 1: 1}, None, label="S0+S1")

    verdict = module_iso_test(cyclic, split)
    assert not verdict.iso
    assert verdict.reason == "every homomorphism is singular at degree 1"


def test_local_duality_on_poly1_simple():
    a = _poly1()
    report = verify_local_duality(a, truncation_quotient_row(a, 3, 1), check_as_regular(a, 1))

    assert report.d == 1
    assert [(c.q, c.degree, c.lhs, c.rhs) for c in report.cells] == [(0, 3, 1, 1)]
    assert report.isos[0].iso
    assert report.matched
    assert report.to_json()["matched"] is True


def test_local_duality_requires_regular_algebra():
    a = make_nil(Window(0, 10, 2))
    with pytest.raises(RequiresRegularError):
        verify_local_duality(a, truncation_quotient_row(a, 3, 1), check_as_regular(a, 1))


def test_equivalence_suite_agrees_on_poly1():
    suite = verify_equivalence_suite(_poly1(), 1)

    assert set(suite.reports) == {"AS", "ASF", "AS~", "ASF~"}
    assert all(r.verdict == Regular(1, -1) for r in suite.reports.values())
    assert suite.agree
    assert suite.generator_tables["A"]
    assert all(lhs == rhs for _, _, lhs, rhs in suite.generator_tables["A"])
    assert suite.hypothesis_mismatches == []


def test_equivalence_suite_agrees_on_failure():
    suite = verify_equivalence_suite(make_nil(Window(0, 10, 2)), 1)

    assert suite.agree
    assert suite.generator_tables == {}
    assert suite.to_json()["agree"] is True


def test_vanishing_and_shape_checks_hold_on_poly1():
    a = _poly1()
    verdict = Regular(1, -1)
    indices = interior_range(a, 1)

    assert check_truncation_ext_vanishing(a, verdict, indices) == []
    assert check_top_cohomology_shape(a, verdict, indices) == []


_WIDE = Window(-2, 14, 2)


@pytest.fixture(scope="module", params=["poly2", "skew"])
def wide_quadratic(request):
    if request.param == "poly2":
        return make_poly(2, _WIDE)
    return make_skew(2, _WIDE)


def test_quadratic_algebras_are_regular_of_dimension_two(wide_quadratic):
    assert check_as_regular(wide_quadratic, 2).verdict == Regular(2, -2)
    assert check_asf_regular(wide_quadratic, 2).verdict == Regular(2, -2)


def test_equivalence_suite_on_quadratic_algebras_has_no_mismatches(wide_quadratic):
    suite = verify_equivalence_suite(wide_quadratic, 2)

    assert all(r.verdict == Regular(2, -2) for r in suite.reports.values())
    assert suite.verdicts_agree
    assert suite.hypothesis_mismatches == []
    assert suite.table_mismatches == []
    assert suite.generator_tables["A"]
    assert suite.generator_tables["A~"]
    assert suite.agree


def test_local_duality_on_quadratic_simple(wide_quadratic):
    a = wide_quadratic
    report = verify_local_duality(a, truncation_quotient_row(a, 3, 1), check_as_regular(a, 2))

    assert report.d == 2
    assert [(c.q, c.degree, c.lhs, c.rhs) for c in report.cells] == [(0, 3, 1, 1)]
    assert report.undetermined == []
    assert report.axiom_failures == []
    assert report.matched


@pytest.mark.parametrize("seed", [1, 2])
def test_local_duality_on_random_quadratic_modules(wide_quadratic, seed):
    a = wide_quadratic
    m = random_finitely_generated_module(a, seed, generators=[3], relations=[4])
    report = verify_local_duality(a, m, check_as_regular(a, 2))

    assert report.cells
    assert report.matched, report.to_json()


@pytest.mark.parametrize("seed", range(10))
def test_local_duality_on_random_poly1_modules(seed):
    a = _poly1()
    m = random_finitely_generated_module(a, seed, generators=[3, 4], relations=[5])
    report = verify_local_duality(a, m, check_as_regular(a, 1))

    assert report.matched, report.to_json()


@pytest.mark.parametrize("seed", range(6))
def test_as_regularity_implies_asf_regularity(seed):
    a = random_adjacent_presentation(seed, Window(0, 10, 2), max_generators=1)
    as_report = check_as_regular(a, 1)
    if as_report.regular:
        assert check_asf_regular(a, 1).verdict == as_report.verdict


def test_equivalence_suite_is_deterministic():
    first = verify_equivalence_suite(_poly1(), 1)
    second = verify_equivalence_suite(_poly1(), 1)
    assert dumps(first.to_json()) == dumps(second.to_json())


def _regular_reports(verdict=Regular(1, -1)):
    kinds = ("AS", "ASF", "AS~", "ASF~")
    return {kind: RegularityReport(kind, "A", verdict, [3]) for kind in kinds}


def test_suite_disagrees_on_mirror_mismatches():
    suite = SuiteReport("A", _regular_reports(), hypothesis_mismatches=[[3, 1, 2, 1]])

    assert suite.verdicts_agree
    assert not suite.agree
    assert suite.to_json()["verdictsAgree"] is True


def test_suite_disagrees_on_generator_table_mismatches():
    tables = {"A": [[3, 1, 1, 1], [3, 2, 1, 0]]}
    suite = SuiteReport("A", _regular_reports(), generator_tables=tables)

    assert suite.table_mismatches == [[3, 2, 1, 0]]
    assert not suite.agree


def test_suite_disagrees_on_mixed_verdicts():
    reports = _regular_reports()
    reports["ASF~"] = RegularityReport("ASF~", "A", Fails("x"), [3])
    assert not SuiteReport("A", reports).verdicts_agree


def test_duality_report_without_iso_test_is_not_matched():
    report = DualityReport("M", 1, cells=[DualityCell(0, 3, 1, 1)], undetermined=[0])
    assert not report.matched
    assert report.to_json()["undetermined"] == [0]

    failing = DualityReport("M", 1, axiom_failures=["ω: actions do not commute"])
    assert not failing.matched

    ok = DualityReport("M", 1, cells=[DualityCell(0, 3, 1, 1)], isos={0: IsoVerdict(True, "iso")})
    assert ok.matched


@pytest.mark.parametrize(
    ("degrees", "expected"),
    [
        ([0, 1, 3, 4, 5], [3, 4, 5]),
        ([5, 4, 0, 1], [0, 1]),
        ([2], [2]),
        ([], []),
    ],
)
def test_longest_run(degrees, expected):
    assert longest_run(degrees) == expected


def test_dualizing_bimodule_is_shared_and_commutes():
    a = _poly1()
    omega = dualizing_bimodule(a, 1)

    assert dualizing_bimodule(a, 1) is omega
    assert bimodule_axiom_failures(omega, range(0, 6), [3, 4]) == []


def test_dualizing_rows_refuse_uncertified_left_actions(monkeypatch):
    monkeypatch.setattr(LocalCohomology, "induced_map", lambda self, other, f, q: {})
    rows = dualizing_rows(_poly1(), 1)

    assert rows.dim(3, 2) == rows.dim(4, 2) == 1
    with pytest.raises(ColimitNotStabilizedError):
        rows.left_act_basis(3, 4, 0, 2)
    assert rows.left_act_basis(3, 4, 0, 9).shape == (0, 0)


def test_asf_check_fails_when_top_action_is_not_certified(monkeypatch):
    def refuse(*args, **kwargs):
        raise ColimitNotStabilizedError("stages do not overlap")

    monkeypatch.setattr("zhom.services.regularity.module_iso_test", refuse)
    report = check_asf_regular(_poly1(), 1)

    assert report.verdict == Fails("colimit not stabilized")
    assert all(entry["uncertifiedTop"] for entry in report.per_index.values())
