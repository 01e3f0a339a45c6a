from __future__ import annotations

import pytest

from zhom.services.algebra import Window, make_poly, make_skew
from zhom.services.errors import AlgebraMismatchError, IndexOutsideWindowError
from zhom.services.linalg import RowSpace
from zhom.services.modules import (
    ABOVE,
    LEFT,
    RIGHT,
    GradedModule,
    ModuleMorphism,
    QuotientModule,
    SubModule,
    bimodule_axiom_failures,
    closure_failures,
    cokernel,
    dual_D,
    free_column,
    free_row,
    from_opposite_module,
    hom_free,
    hom_space,
    hom_tensor_duality_dims,
    image,
    internal_hom,
    kernel,
    module_axiom_failures,
    module_from_json,
    module_to_json,
    random_finitely_generated_module,
    regular_bimodule,
    scramble_basis,
    tensor_hom_adjunction_dims,
    tensor_internal,
    to_opposite_module,
    torsion_submodule,
    truncation_ideal,
    truncation_quotient,
    truncation_quotient_column,
    truncation_quotient_row,
)


def _poly(n=1, hi=5):
    return make_poly(n, Window(0, hi, 1))


def _mult_by_first_variable(a, source, target):
    """e_sourceA -> e_targetA, y -> x_1^(source-target) y."""
    m, n = free_row(a, source), free_row(a, target)
    mats = {k: a.left_mult(target, source, k, 0) for k in a.window.degrees if a.dim(source, k)}
    return ModuleMorphism(m, n, mats)


def test_free_row_components_and_truncation():
    a = _poly(2)
    m = free_row(a, 1)
    assert m.dim_vector() == {1: 1, 2: 2, 3: 3, 4: 4, 5: 5}
    assert m.side == RIGHT
    assert ABOVE in m.truncated
    assert module_axiom_failures(m) == []


def test_free_column_is_left_module():
    a = _poly(2)
    n = free_column(a, 3)
    assert n.side == LEFT
    assert n.dim_vector() == {0: 4, 1: 3, 2: 2, 3: 1}
    assert n.act_basis(1, 2, 0).shape == (3, 2)
    assert module_axiom_failures(n) == []


def test_cokernel_of_multiplication_is_simple():
    a = _poly(1)
    f = _mult_by_first_variable(a, 1, 0)
    assert f.failures() == []
    assert cokernel(f).dim_vector() == {0: 1}
    assert kernel(f).is_zero()
    assert image(f).dim_vector() == {k: 1 for k in range(1, 6)}


def test_strict_checks_reverify_quotients(settings):
    settings.ZHOM_STRICT_CHECKS = True
    a = _poly(2, hi=4)
    f = _mult_by_first_variable(a, 1, 0)
    q = cokernel(f)
    assert q.dim_vector() == {0: 1, 1: 1, 2: 1, 3: 1, 4: 1}


def test_tensor_with_regular_bimodule_recovers_module():
    a = _poly(2, hi=4)
    m = truncation_quotient_row(a, 0, 2)
    t = tensor_internal(m, regular_bimodule(a))
    assert t.dim_vector() == m.dim_vector()
    assert module_axiom_failures(t) == []


def test_tensor_with_augmentation_counts_generators():
    a = _poly(2, hi=4)
    f = _mult_by_first_variable(a, 1, 0)
    t = tensor_internal(cokernel(f), truncation_quotient(a, 1))
    assert t.dim_vector() == {0: 1}


def test_tensor_rejects_left_modules():
    a = _poly(1)
    with pytest.raises(AlgebraMismatchError):
        tensor_internal(free_column(a, 2), regular_bimodule(a))


def test_duality_is_an_involution_on_dimensions():
    a = _poly(2, hi=4)
    m = truncation_quotient_row(a, 0, 3)
    d = dual_D(m)
    assert d.side == LEFT
    dd = dual_D(d)
    assert dd.side == RIGHT
    assert dd.dim_vector() == m.dim_vector()
    assert dd.act_basis(0, 1, 1) == m.act_basis(0, 1, 1)


def test_flip_round_trip():
    a = _poly(2, hi=4)
    m = truncation_quotient_row(a, 1, 2)
    flipped = to_opposite_module(m)
    assert flipped.algebra is a.opposite
    assert flipped.side == LEFT
    assert flipped.dim_vector() == {-2: 2, -1: 1}
    back = from_opposite_module(flipped)
    assert back.algebra is a
    assert back.dim_vector() == m.dim_vector()


def test_hom_between_free_rows():
    a = _poly(2, hi=4)
    assert hom_space(free_row(a, 1), free_row(a, 0)).dim == 2
    assert hom_space(free_row(a, 0), free_row(a, 1)).dim == 0
    with pytest.raises(AlgebraMismatchError):
        hom_space(free_row(a, 0), free_column(a, 0))


def test_hom_tensor_duality():
    a = _poly(2, hi=4)
    left, right = hom_tensor_duality_dims(
        truncation_quotient_row(a, 0, 2), truncation_quotient_column(a, 0, 1)
    )
    assert left == right == 1


def test_tensor_hom_adjunction():
    a = _poly(1, hi=4)
    x = truncation_quotient_row(a, 0, 2)
    p = truncation_quotient_row(a, 0, 3)
    left, right = tensor_hom_adjunction_dims(x, regular_bimodule(a), p)
    assert left == right


def test_internal_hom_from_regular_bimodule():
    a = _poly(1, hi=4)
    p = truncation_quotient_row(a, 0, 3)
    h = internal_hom(regular_bimodule(a), p)
    assert h.dim_vector() == p.dim_vector()


def test_torsion_submodule():
    a = _poly(1)
    assert torsion_submodule(truncation_quotient_row(a, 0, 2)).dim_vector() == {0: 1, 1: 1}
    assert torsion_submodule(free_row(a, 0)).is_zero()


def test_bimodule_axioms_of_regular_bimodule():
    a = make_skew(2, Window(0, 3, 1))
    assert bimodule_axiom_failures(regular_bimodule(a)) == []


def test_random_module_and_scramble_satisfy_axioms():
    a = _poly(2, hi=4)
    m = random_finitely_generated_module(a, 3, generators=[0, 1], relations=[1, 2])
    assert module_axiom_failures(m) == []
    s = scramble_basis(m, 11)
    assert s.dim_vector() == m.dim_vector()
    assert module_axiom_failures(s) == []


def test_module_json_round_trip():
    a = _poly(2, hi=3)
    m = truncation_quotient_row(a, 0, 3)
    restored = module_from_json(a, module_to_json(m))
    assert isinstance(restored, GradedModule)
    assert restored.dim_vector() == m.dim_vector()
    assert restored.act_basis(1, 2, 1) == m.act_basis(1, 2, 1)


def test_truncation_ideal_bimodule():
    a = make_skew(2, Window(0, 4, 1))
    ideal = truncation_ideal(a, 2)
    assert ideal.row(0).dim_vector() == {2: 3, 3: 4, 4: 5}
    assert bimodule_axiom_failures(ideal) == []


def test_hom_from_free_row_is_evaluation():
    a = _poly(2)
    assert hom_free(2, free_row(a, 0)).dim == 3
    with pytest.raises(IndexOutsideWindowError):
        hom_free(9, free_row(a, 0))


def _degree_one_only(a):
    m = free_row(a, 0)
    return m, {1: RowSpace.full(a.field, m.dim(1))}


def test_closure_failures_finds_subspaces_that_leak():
    a = _poly(1)
    m, spaces = _degree_one_only(a)
    leaking = {k: spaces.get(k) or RowSpace.zero(a.field, m.dim(k)) for k in a.window.degrees}
    ideal = {k: RowSpace.full(a.field, m.dim(k)) for k in range(1, 6)}
    ideal[0] = RowSpace.zero(a.field, 1)

    assert closure_failures(m, leaking) == [(1, 2)]
    assert closure_failures(m, ideal) == []


def test_sub_and_quotient_refuse_non_submodules():
    a = _poly(1)
    m, spaces = _degree_one_only(a)

    with pytest.raises(AssertionError, match="not closed"):
        SubModule(m, spaces)
    with pytest.raises(AssertionError, match="not closed"):
        QuotientModule(m, spaces)


def test_bimodule_axiom_check_restricts_to_degrees():
    a = make_skew(2, Window(0, 3, 1))
    n = regular_bimodule(a)

    assert bimodule_axiom_failures(n, [0, 1], [2, 3]) == []
    assert bimodule_axiom_failures(n, [0], [3]) == []


def _random_left_module(a, seed):
    right = random_finitely_generated_module(a.opposite, seed, generators=[-3, -2], relations=[-1])
    return to_opposite_module(right)


@pytest.mark.parametrize("seed", range(4))
def test_hom_tensor_duality_on_random_modules(seed):
    a = _poly(2, hi=4)
    m = random_finitely_generated_module(a, seed, generators=[0, 1], relations=[1, 2])
    n = _random_left_module(a, seed + 10)

    assert n.side == LEFT
    assert n.algebra is a
    left, right = hom_tensor_duality_dims(m, n)
    assert left == right


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("bimodule", [regular_bimodule, lambda a: truncation_ideal(a, 1)])
def test_tensor_hom_adjunction_on_random_modules(seed, bimodule):
    a = _poly(2, hi=4)
    x = random_finitely_generated_module(a, seed, generators=[0, 1], relations=[1, 2])
    p = random_finitely_generated_module(a, seed + 7, generators=[0], relations=[2])

    left, right = tensor_hom_adjunction_dims(x, bimodule(a), p)
    assert left == right
