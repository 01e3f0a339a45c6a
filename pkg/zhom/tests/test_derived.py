from __future__ import annotations

import itertools

import pytest

from zhom.services.algebra import (
    Window,
    make_free,
    make_jordan,
    make_nil,
    make_poly,
    make_skew,
    make_trivial,
)
from zhom.services.derived import (
    ExtTable,
    LocalCohomology,
    TorBalanceReport,
    ext,
    ext_graded_quotient,
    ext_into_rows,
    global_dimension_balance,
    local_cohomology,
    local_cohomology_of_free_row,
    long_exact_sequence_euler,
    pd_via_tor,
    quotient_row_resolution,
    tor,
    tor_balance_check,
    twisting_cross_check,
)
from zhom.services.errors import AlgebraMismatchError, ColimitNotStabilizedError
from zhom.services.modules import (
    free_row,
    regular_bimodule,
    truncation_quotient_column,
    truncation_quotient_row,
)
from zhom.services.resolutions import ExactPd


def _poly(n, hi=10):
    return make_poly(n, Window(0, hi, 2))


@pytest.mark.parametrize(
    ("target", "expected"),
    [(2, 0), (3, 0), (4, 1), (5, 0)],
)
def test_ext1_of_simple_into_free_rows_of_poly1(target, expected):
    a = _poly(1)
    simple = truncation_quotient_row(a, 3, 1)
    assert ext(simple, free_row(a, target), 1).dim == expected
    assert ext(simple, free_row(a, target), 0).dim == 0


def test_ext_into_rows_table():
    a = _poly(1)
    res = quotient_row_resolution(a, 3, 1, 2)
    table = ext_into_rows(res, regular_bimodule(a), 1, rows=range(0, 8))

    assert isinstance(table, ExtTable)
    assert table.nonzero() == {(1, 4): 1}
    assert table.to_json()["entries"] == [[1, 4, 1]]


def test_ext_of_poly2_simple_sits_in_degree_two():
    a = _poly(2)
    simple = truncation_quotient_row(a, 2, 1)
    assert ext(simple, free_row(a, 4), 2).dim == 1
    assert ext(simple, free_row(a, 3), 1).dim == 0


def test_ext_rejects_target_over_other_algebra():
    a, b = _poly(1), _poly(1)
    with pytest.raises(AlgebraMismatchError):
        ext(truncation_quotient_row(a, 0, 1), free_row(b, 1), 0)


def test_graded_quotient_ext_skips_rows_beyond_the_guard():
    a = _poly(1)
    dims = ext_graded_quotient(a, 2, free_row(a, 5), 1)
    assert dims[3] == 1
    assert dims[4] == 1
    assert dims[2] == 0
    # e_j(A/A>=2) resolves with a generator at j + 2, certified only up to 8
    assert 7 not in dims


def test_twisting_and_euler_rows_agree_on_poly1():
    a = _poly(1)
    target = free_row(a, 5)
    twisting = twisting_cross_check(a, 2, target, 1)
    euler = long_exact_sequence_euler(a, 2, target, 1)

    assert twisting
    assert all(row.ok for row in twisting)
    assert euler
    assert all(row.ok for row in euler)


def test_tor_of_simples_over_poly2():
    a = _poly(2)
    assert tor(truncation_quotient_row(a, 4, 1), truncation_quotient_column(a, 5, 1), 1) == {0: 2}


def test_tor_is_balanced_on_poly2():
    report = tor_balance_check(_poly(2), 4, 5, 2)

    assert report.from_right == [0, 2, 0]
    assert report.from_left == [0, 2, 0]
    assert report.ok
    assert report.to_json()["ok"] is True


def test_pd_via_tor_matches_resolution_length():
    a = make_poly(2, Window(0, 8, 2))
    assert pd_via_tor(truncation_quotient_row(a, 0, 1)) == 2


def test_global_dimension_is_left_right_symmetric():
    balance = global_dimension_balance(_poly(2), [4, 5, 6])

    assert balance.right_sup == ExactPd(2)
    assert balance.left_sup == ExactPd(2)
    assert balance.ok


def test_local_cohomology_of_free_row_over_poly1():
    a = _poly(1)
    lc = LocalCohomology(free_row(a, 3), 1)

    assert lc.dims(0) == {}
    assert lc.dims(1) == {0: 1, 1: 1, 2: 1}
    assert lc.value(1, 0) == 1
    assert lc.stabilized_at(1, 0) == 3
    assert lc.certified_degrees(1)[:6] == [0, 1, 2, 3, 4, 5]
    # the last degrees never get enough stages to stabilize
    assert (1, 10) in lc.flagged()


def test_local_cohomology_module_structure_over_poly1():
    a = _poly(1)
    module = LocalCohomology(free_row(a, 3), 1).as_module(1)

    assert module.dim_vector() == {0: 1, 1: 1, 2: 1}
    assert not module.act_basis(0, 1, 0).is_zero()
    assert not module.act_basis(1, 2, 0).is_zero()
    assert module.act_basis(2, 3, 0).is_zero()


def test_local_cohomology_json_lists_nonzero_and_flagged_cells():
    a = _poly(1)
    payload = LocalCohomology(free_row(a, 3), 1).to_json()
    nonzero = [c for c in payload["cells"] if c["flag"] is None]

    assert payload["qMax"] == 1
    assert [(c["q"], c["degree"], c["dim"]) for c in nonzero] == [(1, 0, 1), (1, 1, 1), (1, 2, 1)]
    assert any(c["flag"] == "ColimitNotStabilized" for c in payload["cells"])


def test_local_cohomology_of_regular_bimodule_is_rowwise():
    a = _poly(1)
    rows = local_cohomology(regular_bimodule(a), 1)

    assert set(rows) == set(a.window.degrees)
    assert rows[3].dims(1) == {0: 1, 1: 1, 2: 1}
    assert rows[0].dims(1) == {}


def _cech_top_dimension(n, degree):
    """dim H^n_m(k[x_1..x_n]) in ``degree`` from the Čech complex: the top
    cohomology is spanned by the monomials x^-a with every a_i >= 1."""
    if degree > -n:
        return 0
    return sum(1 for a in itertools.product(range(1, -degree + 1), repeat=n) if sum(a) == -degree)


def _cech_value(n, q, degree):
    return _cech_top_dimension(n, degree) if q == n else 0


def _assert_matches_cech(lc, n, row):
    certified = [(q, i) for (q, i), cell in lc.cells.items() if cell.certified]
    assert certified
    for q, i in certified:
        assert lc.value(q, i) == _cech_value(n, q, i - row), (q, i)


def test_local_cohomology_of_poly1_matches_cech_complex():
    a = _poly(1)
    lc = LocalCohomology(free_row(a, 5), 1)

    _assert_matches_cech(lc, 1, 5)
    assert lc.dims(1) == {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_poly1_colimit_stabilizes_at_the_distance_to_the_row(n):
    lc = LocalCohomology(free_row(_poly(1), 5), 1)
    assert lc.stabilized_at(1, 5 - n) == n


@pytest.fixture(scope="module")
def poly2_wide():
    return make_poly(2, Window(-2, 14, 2))


def test_local_cohomology_of_poly2_matches_cech_complex(poly2_wide):
    lc = local_cohomology_of_free_row(poly2_wide, 4, 2)

    _assert_matches_cech(lc, 2, 4)
    assert lc.dims(0) == {}
    assert lc.dims(1) == {}
    assert lc.value(2, -2) == 5
    assert lc.certified_degrees(2) == list(range(-2, 9))


@pytest.mark.parametrize("degree", [-2, -1, 0, 1, 2])
def test_poly2_colimit_stabilizes_once_the_top_syzygy_reaches_the_row(poly2_wide, degree):
    lc = local_cohomology_of_free_row(poly2_wide, 4, 2)
    assert lc.stabilized_at(2, degree) == 3 - degree


def test_local_cohomology_over_the_opposite_matches_cech_complex(poly2_wide):
    opp = poly2_wide.opposite
    lc = local_cohomology_of_free_row(opp, -4, 2)

    _assert_matches_cech(lc, 2, -4)
    assert lc.value(2, -10) == 5
    assert lc.stabilized_at(2, -10) == 5


def test_zero_scans_cut_off_by_the_window_stay_flagged(poly2_wide):
    # ẽ_2 sits at the top of the opposite window; its nonzero colimit terms
    # at degree -4 need stages the window cannot resolve
    lc = local_cohomology_of_free_row(poly2_wide.opposite, 2, 2)
    cell = lc.cells[(2, -4)]

    assert cell.dims == [0, 0, 0]
    assert cell.stabilized_at is None
    assert (2, -4) in lc.flagged()
    assert lc.certified_degrees(2) == []


def test_as_module_refuses_actions_between_unaligned_stages():
    a = _poly(1)
    lc = LocalCohomology(free_row(a, 3), 1)
    # shrink the recorded stages of degree 1 so no common stage exists
    lc.cells[(1, 1)].dims[:] = lc.cells[(1, 1)].dims[:2]
    lc.cells[(1, 1)].stabilized_at = 2
    lc.cells[(1, 0)].stabilized_at = 5

    module = lc.as_module(1)
    with pytest.raises(ColimitNotStabilizedError):
        module.act_basis(0, 1, 0)


_KOSZUL_TOR = {
    "trivial": [1, 0, 0, 0, 0],
    "poly1": [1, 1, 0, 0, 0],
    "poly2": [1, 2, 1, 0, 0],
    "skew": [1, 2, 1, 0, 0],
    "jordan": [1, 2, 1, 0, 0],
    "nil": [1, 1, 1, 1, 1],
    "free2": [1, 2, 0, 0, 0],
}

_BUILTIN_WINDOWS = {
    "trivial": lambda: make_trivial(Window(0, 8, 1)),
    "poly1": lambda: make_poly(1, Window(0, 8, 1)),
    "poly2": lambda: make_poly(2, Window(0, 8, 1)),
    "skew": lambda: make_skew(2, Window(0, 8, 1)),
    "jordan": lambda: make_jordan(Window(0, 8, 1)),
    "nil": lambda: make_nil(Window(0, 8, 1)),
    "free2": lambda: make_free(2, Window(0, 7, 1)),
}


@pytest.mark.parametrize("name", sorted(_KOSZUL_TOR))
def test_tor_is_balanced_on_every_builtin(name):
    a = _BUILTIN_WINDOWS[name]()
    expected = _KOSZUL_TOR[name]
    for p in range(5):
        report = tor_balance_check(a, 2, 2 + p, 4)

        assert report.ok, report.to_json()
        assert p in report.compared
        assert report.from_right[p] == expected[p]
        assert report.from_left[p] == expected[p]


def test_tor_balance_ignores_window_limited_entries():
    report = TorBalanceReport(0, 1, [0, 1, -1], [0, 1, 3])

    assert report.compared == [0, 1]
    assert report.ok
    assert not TorBalanceReport(0, 1, [0, 2], [0, 1]).ok
