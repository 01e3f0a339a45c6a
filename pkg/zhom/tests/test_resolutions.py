from __future__ import annotations

import pytest

from zhom.services.algebra import Window, make_nil, make_opposite, make_poly, make_trivial
from zhom.services.errors import NotLeftBoundedError, ResolutionTruncatedError
from zhom.services.linalg import SparseMatrix
from zhom.services.modules import (
    BELOW,
    GradedModule,
    ModuleMorphism,
    free_column,
    free_row,
    random_finitely_generated_module,
    truncation_quotient_row,
)
from zhom.services.resolutions import (
    AtLeast,
    ExactPd,
    audit_resolution,
    betti_rows,
    lift_chain_map,
    minimal_free_resolution,
    pd_of,
    projective_dimension,
)


def _poly2():
    return make_poly(2, Window(0, 8, 2))


def test_koszul_resolution_of_simple_over_poly2():
    a = _poly2()
    res = minimal_free_resolution(truncation_quotient_row(a, 0, 1))

    assert res.status.terminated
    assert [res.generators(p) for p in range(res.length + 1)] == [(0,), (1, 1), (2,)]
    assert res.betti() == {(0, 0): 1, (1, 1): 2, (2, 2): 1}
    assert betti_rows(res) == [[1, 2, 1]]
    assert pd_of(res) == ExactPd(2)
    assert audit_resolution(res) == []


def test_resolution_json_shape():
    res = minimal_free_resolution(truncation_quotient_row(_poly2(), 0, 1))
    payload = res.to_json()

    assert payload["status"] == "Terminated"
    assert payload["length"] == 2
    assert payload["generators"] == [[0], [1, 1], [2]]
    assert pd_of(res).to_json() == {"pd": 2, "exact": True}


def test_free_module_has_pd_zero():
    a = _poly2()
    res = minimal_free_resolution(free_row(a, 3))
    assert res.betti() == {(0, 3): 1}
    assert pd_of(res) == ExactPd(0)


def test_trivial_algebra_simple_is_projective():
    a = make_trivial(Window(0, 4, 1))
    res = minimal_free_resolution(truncation_quotient_row(a, 0, 1))
    assert res.betti() == {(0, 0): 1}
    assert projective_dimension(truncation_quotient_row(a, 0, 1)) == ExactPd(0)


def test_zero_module_has_pd_minus_one():
    a = _poly2()
    assert projective_dimension(GradedModule(a, {}, None, label="0")) == ExactPd(-1)


def test_max_length_truncation_is_reported():
    a = make_nil(Window(0, 12, 2))
    res = minimal_free_resolution(truncation_quotient_row(a, 0, 1), max_length=5)

    assert not res.status.terminated
    assert res.status.reason == "max_length"
    assert pd_of(res) == AtLeast(5)
    assert pd_of(res).to_json()["windowLimited"] is True
    assert res.known(5)
    assert not res.known(6)
    with pytest.raises(ResolutionTruncatedError):
        res.term(7)


def test_guard_band_stops_termination_claims():
    a = make_nil(Window(0, 6, 2))
    res = minimal_free_resolution(truncation_quotient_row(a, 0, 1), max_length=10)

    # generators sit at 0, 1, 2, ...; the first one above 4 trips the guard
    assert res.status.reason == "guard"
    assert res.generators(res.length) == (5,)
    assert res.last_trusted_step == 4
    assert pd_of(res) == AtLeast(5)


def test_module_unbounded_below_is_rejected():
    a = _poly2()
    m = GradedModule(a, {0: 1}, None, truncated={BELOW})
    with pytest.raises(NotLeftBoundedError):
        minimal_free_resolution(m)


def test_left_module_resolves_over_opposite():
    a = _poly2()
    res = minimal_free_resolution(free_column(a, 3))
    assert res.algebra is a.opposite
    assert res.algebra.name == make_opposite(a).name
    assert res.generators(0) == (-3,)
    assert pd_of(res) == ExactPd(0)


def test_strict_checks_audit_every_resolution(settings):
    settings.ZHOM_STRICT_CHECKS = True
    res = minimal_free_resolution(truncation_quotient_row(_poly2(), 2, 1))
    assert pd_of(res) == ExactPd(2)


def test_lift_chain_map_over_projection():
    a = _poly2()
    source_module = truncation_quotient_row(a, 0, 2)
    target_module = truncation_quotient_row(a, 0, 1)
    mats = {
        k: SparseMatrix.identity(a.field, target_module.dim(k))
        if target_module.dim(k)
        else SparseMatrix.zeros(a.field, 0, source_module.dim(k))
        for k in a.window.degrees
    }
    source = minimal_free_resolution(source_module, 3)
    target = minimal_free_resolution(target_module, 3)
    chain = lift_chain_map(source, target, ModuleMorphism(source_module, target_module, mats), 2)

    assert len(chain.images) == 3
    for p in range(1, 3):
        for k in a.window.degrees:
            left = target.differential(p, k) @ chain.matrix(p, k)
            right = chain.matrix(p - 1, k) @ source.differential(p, k)
            assert left == right


@pytest.mark.parametrize("seed", range(20))
def test_random_modules_over_poly2_have_pd_at_most_two(seed):
    a = make_poly(2, Window(0, 10, 1))
    m = random_finitely_generated_module(a, seed, generators=[1, 2], relations=[2, 3, 3])
    res = minimal_free_resolution(m, 4)
    pd = pd_of(res)

    assert isinstance(pd, ExactPd)
    assert pd.value <= 2
    assert res.length <= 2
