from __future__ import annotations

import copy

import pytest

from zhom.services.algebra import (
    Window,
    ZAlgebra,
    make_adjacent_presentation,
    make_builtin,
    make_free,
    make_jordan,
    make_nil,
    make_poly,
    make_skew,
    make_trivial,
    random_adjacent_presentation,
    validate,
)
from zhom.services.errors import (
    IndexOutsideWindowError,
    InvalidRelationDegreeError,
    RelationOutsideTensorSpaceError,
    WindowTooSmallError,
)
from zhom.services.field import Field


def _broken_poly():
    a = make_poly(1, Window(0, 3, 1))
    mult = copy.deepcopy(a.mult)
    mult[(0, 1, 2)] = {(0, 0): {0: 2}}
    return ZAlgebra(a.window, a.field, a.dims, mult, name="broken")


def test_window_bounds():
    w = Window(-1, 4, 2)
    assert list(w.degrees) == [-1, 0, 1, 2, 3, 4]
    assert w.reliable_top == 2
    assert w.flipped() == Window(-4, 1, 2)
    with pytest.raises(WindowTooSmallError):
        Window(3, 2)
    with pytest.raises(IndexOutsideWindowError):
        w.require(5)


def test_poly_dimensions_and_validation():
    a = make_poly(2, Window(0, 5, 1))
    assert a.dim(0, 0) == 1
    assert a.dim(0, 2) == 3
    assert a.dim(1, 5) == 5
    assert a.dim(3, 1) == 0
    assert validate(a).ok


@pytest.mark.parametrize(
    "build, expected",
    [
        (lambda w: make_trivial(w), [1, 0, 0, 0]),
        (lambda w: make_poly(1, w), [1, 1, 1, 1]),
        (lambda w: make_skew("2/3", w), [1, 2, 3, 4]),
        (lambda w: make_jordan(w), [1, 2, 3, 4]),
        (lambda w: make_nil(w), [1, 1, 0, 0]),
        (lambda w: make_free(2, w), [1, 2, 4, 8]),
    ],
)
def test_builtin_hilbert_functions(build, expected):
    a = build(Window(0, 4, 1))
    assert [a.dim(1, 1 + n) for n in range(4)] == expected
    assert validate(a).ok


def test_skew_relation_holds():
    a = make_skew(3, Window(0, 3, 1), Field.gf(7))
    # basis of V: x = 0, y = 1; y x = 3 x y in A_{02}
    x01, y01 = a.basis(0, 1)
    x12, y12 = a.basis(1, 2)
    yx = a.product(0, 1, 2, y01, x12)
    xy = a.product(0, 1, 2, x01, y12)
    assert yx == tuple(a.field.convert(3) * v for v in xy)


def test_validate_reports_associativity_violation():
    report = validate(_broken_poly())
    assert not report.ok
    first = report.first("associativity")
    assert first is not None
    assert first.degrees == (0, 1, 2, 3)
    assert report.to_json()["violations"][0]["axiom"] == "associativity"


def test_validate_reports_grading_violation():
    a = make_poly(1, Window(0, 2, 1))
    dims = dict(a.dims)
    dims[(0, 2)] = 0
    broken = ZAlgebra(a.window, a.field, dims, a.mult, name="bad-grading")
    assert validate(broken).first("grading") is not None


def test_opposite_flips_indices():
    a = make_free(2, Window(0, 4, 1))
    b = make_poly(1, Window(0, 4, 1))
    opp = a.opposite
    assert opp.window == Window(-4, 0, 1)
    assert opp.dim(-3, -1) == a.dim(1, 3)
    assert opp.opposite is a
    assert validate(opp).ok
    assert not b.same_structure(a)


def test_opposite_reverses_products():
    a = make_skew(2, Window(0, 3, 1))
    opp = a.opposite
    x01, y01 = a.basis(0, 1)
    x12, y12 = a.basis(1, 2)
    # in Ã^op, g in A_{12} times f in A_{01} is the product f g of A
    assert opp.product(-2, -1, 0, x12, y01) == a.product(0, 1, 2, y01, x12)


def test_generators_of_poly_are_degree_one():
    a = make_poly(2, Window(0, 4, 1))
    assert len(a.generator_basis(0, 1)) == 2
    assert a.generator_basis(0, 2) == []
    assert (0, 2) not in a.generator_pairs


def test_presentation_rejects_bad_relations():
    w = Window(0, 4, 1)
    with pytest.raises(InvalidRelationDegreeError):
        make_adjacent_presentation({m: 1 for m in range(4)}, {(0, 1): [[1]]}, w)
    with pytest.raises(RelationOutsideTensorSpaceError):
        make_adjacent_presentation({m: 2 for m in range(4)}, {(0, 2): [[1, 0]]}, w)


def test_random_presentation_is_seeded_and_valid():
    w = Window(0, 4, 1)
    a = random_adjacent_presentation(7, w)
    b = random_adjacent_presentation(7, w)
    assert a.same_structure(b)
    assert validate(a).ok


def test_make_builtin_unknown_name():
    with pytest.raises(KeyError):
        make_builtin("sphere", {}, Window(0, 3, 1))


def _mutations(a):
    for key, tensor in sorted(a.mult.items()):
        for pair, vec in sorted(tensor.items()):
            for u in sorted(vec):
                yield key, pair, u


def test_validate_catches_every_single_entry_mutation_of_poly2():
    a = make_poly(2, Window(0, 3, 1))
    uncaught = []
    for key, pair, u in _mutations(a):
        mult = copy.deepcopy(a.mult)
        mult[key][pair][u] = mult[key][pair][u] + a.field.one
        broken = ZAlgebra(a.window, a.field, a.dims, mult, name="mutated")
        if validate(broken).ok:
            uncaught.append((key, pair, u))

    assert sum(1 for _ in _mutations(a)) > 0
    assert uncaught == []


def test_memoized_builds_once_per_key():
    a = make_poly(1, Window(0, 3, 1))
    calls = []

    def build():
        calls.append(1)
        return object()

    first = a.memoized(("k", 1), build)
    assert a.memoized(("k", 1), build) is first
    assert len(calls) == 1
    assert a.memo[("k", 1)] is first
