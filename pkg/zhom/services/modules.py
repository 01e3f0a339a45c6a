"""Graded modules over a ZAlgebra, bimodules held as rows, and the standard
constructions on them (free rows/columns, truncations, kernels, cokernels,
internal tensor, internal Hom, the duality D, torsion, the index flip).

Conventions
-----------
Right module M: ``act(j, k, a)`` for a in A_{jk} is the matrix M_j -> M_k.
Left module N:  ``act(j, k, a)`` for a in A_{jk} is the matrix N_k -> N_j.
Bimodule rows:  ``left_act(l, i, a, j)`` for a in A_{li} is (e_iM)_j -> (e_lM)_j.

Module actions are computed lazily from a callback and cached per basis
element of A; algorithms only ever ask for the actions they need (mostly the
algebra generators).
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field as dataclass_field
from typing import Any

from zhom.services.algebra import Window, ZAlgebra, make_trivial
from zhom.services.conf import setting
from zhom.services.errors import AlgebraMismatchError
from zhom.services.field import Field
from zhom.services.linalg import (
    BlockBuilder,
    RowSpace,
    SparseMatrix,
    Vector,
    inverse,
    kernel_basis,
    unit_vector,
    vstack,
)

logger = logging.getLogger(__name__)

RIGHT = "right"
LEFT = "left"

BELOW = "below"
ABOVE = "above"

ActionFn = Callable[[int, int, int], SparseMatrix]
LeftActionFn = Callable[[int, int, int, int], SparseMatrix]


class GradedModule:
    """Graded module with finite-dimensional components on the window.

    ``truncated`` records the sides on which the genuine module may continue
    past the window (``"below"`` / ``"above"``); ``window_relative`` marks
    results whose content near the top of the window depends on the window.
    """

    def __init__(
        self,
        algebra: ZAlgebra,
        dims: Mapping[int, int],
        action: ActionFn | None,
        *,
        side: str = RIGHT,
        label: str = "",
        truncated: Iterable[str] = (),
        window_relative: bool = False,
    ) -> None:
        if side not in (RIGHT, LEFT):
            raise ValueError(f"side must be {RIGHT!r} or {LEFT!r}")
        self.algebra = algebra
        self.side = side
        self.label = label or "M"
        self.dims = {j: int(dims.get(j, 0)) for j in algebra.window.degrees}
        self._action = action
        self._cache: dict[tuple[int, int, int], SparseMatrix] = {}
        self.truncated = frozenset(truncated)
        self.window_relative = window_relative

    def __repr__(self) -> str:
        return f"GradedModule({self.label!r}, {self.side}, dims={self.dim_vector()})"

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def window(self) -> Window:
        return self.algebra.window

    def dim(self, j: int) -> int:
        return self.dims.get(j, 0)

    def dim_vector(self) -> dict[int, int]:
        return {j: d for j, d in self.dims.items() if d}

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return not any(self.dims.values())

    def support(self) -> list[int]:
        return [j for j, d in self.dims.items() if d]

    def lowest_degree(self) -> int | None:
        support = self.support()
        return support[0] if support else None

    def highest_degree(self) -> int | None:
        support = self.support()
        return support[-1] if support else None

    def action_shape(self, j: int, k: int) -> tuple[int, int]:
        if self.side == RIGHT:
            return (self.dim(k), self.dim(j))
        return (self.dim(j), self.dim(k))

    def act_basis(self, j: int, k: int, t: int) -> SparseMatrix:
        """Action of the t-th basis element of A_{jk}."""
        key = (j, k, t)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        rows, cols = self.action_shape(j, k)
        if j == k:
            result = SparseMatrix.identity(self.field, self.dim(j))
        elif rows == 0 or cols == 0 or self._action is None or j > k:
            result = SparseMatrix.zeros(self.field, rows, cols)
        else:
            result = self._action(j, k, t)
            if result.shape != (rows, cols):
                raise ValueError(
                    f"{self.label}: action ({j},{k},{t}) has shape {result.shape}, "
                    f"expected {(rows, cols)}"
                )
        self._cache[key] = result
        return result

    def act(self, j: int, k: int, a: Sequence) -> SparseMatrix:
        """Action of an arbitrary element a of A_{jk}."""
        rows, cols = self.action_shape(j, k)
        total = SparseMatrix.zeros(self.field, rows, cols)
        if rows == 0 or cols == 0:
            return total
        for t, c in enumerate(a):
            if c:
                total = total + self.act_basis(j, k, t).scale(c)
        return total

    def source_target(self, j: int, k: int) -> tuple[int, int]:
        """Degrees (source, target) of the action of A_{jk}."""
        return (j, k) if self.side == RIGHT else (k, j)


# ── free modules and truncations ─────────────────────────────────────────


def _reaches_top(a: ZAlgebra, i: int) -> bool:
    return i == a.window.hi or a.dim(i, a.window.hi) > 0


def _reaches_bottom(a: ZAlgebra, j: int) -> bool:
    return j == a.window.lo or a.dim(a.window.lo, j) > 0


def free_row(a: ZAlgebra, i: int) -> GradedModule:
    """e_iA: components A_{ij}, action by right multiplication."""
    a.window.require(i)
    return GradedModule(
        a,
        {j: a.dim(i, j) for j in a.window.degrees},
        lambda j, k, t: a.right_mult(i, j, k, t),
        label=f"e_{i}A",
        truncated={ABOVE} if _reaches_top(a, i) else (),
    )


def free_column(a: ZAlgebra, j: int) -> GradedModule:
    """Ae_j (left): components A_{ij}, action by left multiplication."""
    a.window.require(j)
    return GradedModule(
        a,
        {i: a.dim(i, j) for i in a.window.degrees},
        lambda i, m, t: a.left_mult(i, m, j, t),
        side=LEFT,
        label=f"Ae_{j}",
        truncated={BELOW} if _reaches_bottom(a, j) else (),
    )


def truncation_quotient_column(a: ZAlgebra, j: int, n: int) -> GradedModule:
    """(A/A_{>=n})e_j (left): components A_{ij} for j - i < n."""
    a.window.require(j)
    return GradedModule(
        a,
        {i: a.dim(i, j) if j - i < n else 0 for i in a.window.degrees},
        lambda i, m, t: a.left_mult(i, m, j, t),
        side=LEFT,
        label=f"(A/A>={n})e_{j}" if n != 1 else f"A0e_{j}",
        truncated={BELOW} if j - n + 1 < a.window.lo and _reaches_bottom(a, j) else (),
    )


class FreeModule(GradedModule):
    """Finite direct sum of free rows e_gA, one summand per listed degree."""

    def __init__(self, algebra: ZAlgebra, generators: Sequence[int], *, label: str = "") -> None:
        self.generators = tuple(int(g) for g in generators)
        for g in self.generators:
            algebra.window.require(g)
        self._offsets: dict[int, list[int | None]] = {}
        dims = {}
        for k in algebra.window.degrees:
            offset = 0
            offsets: list[int | None] = []
            for g in self.generators:
                d = algebra.dim(g, k)
                offsets.append(offset if d else None)
                offset += d
            self._offsets[k] = offsets
            dims[k] = offset
        truncated = {ABOVE} if any(_reaches_top(algebra, g) for g in self.generators) else ()
        super().__init__(
            algebra,
            dims,
            self._block_action,
            label=label or "F",
            truncated=truncated,
        )

    def offset(self, r: int, k: int) -> int | None:
        """Start of summand r inside F_k (None when that summand vanishes)."""
        return self._offsets.get(k, [None] * len(self.generators))[r]

    def _block_action(self, j: int, k: int, t: int) -> SparseMatrix:
        a = self.algebra
        builder = BlockBuilder(self.field, self.dim(k), self.dim(j))
        for r, g in enumerate(self.generators):
            src, tgt = self.offset(r, j), self.offset(r, k)
            if src is None or tgt is None:
                continue
            builder.add(tgt, src, a.right_mult(g, j, k, t))
        return builder.build()

    def element(self, r: int, k: int, component: Sequence) -> Vector:
        """Vector of F_k supported on summand r."""
        out = [self.field.zero] * self.dim(k)
        start = self.offset(r, k)
        if start is not None:
            for idx, v in enumerate(component):
                out[start + idx] = v
        return tuple(out)

    def generator_vector(self, r: int) -> Vector:
        return self.element(r, self.generators[r], (self.field.one,))

    def component(self, v: Sequence, r: int, k: int) -> Vector:
        """Summand-r part of v in F_k, as an element of A_{g_r, k}."""
        start = self.offset(r, k)
        if start is None:
            return ()
        return tuple(v[start : start + self.algebra.dim(self.generators[r], k)])

    def map_matrix(self, images: Sequence[Sequence], target: GradedModule, k: int) -> SparseMatrix:
        """Degree-k matrix of the map F -> target sending generator r to images[r]."""
        columns: list[Vector] = []
        for r, g in enumerate(self.generators):
            if self.offset(r, k) is None:
                continue
            for t in range(self.algebra.dim(g, k)):
                columns.append(target.act_basis(g, k, t).apply(images[r]))
        return SparseMatrix.from_columns(self.field, target.dim(k), columns)


def truncation_quotient_row(a: ZAlgebra, i: int, n: int) -> GradedModule:
    """e_i(A/A_{>=n}): components A_{ij} for j - i < n."""
    a.window.require(i)
    return GradedModule(
        a,
        {j: a.dim(i, j) if j - i < n else 0 for j in a.window.degrees},
        lambda j, k, t: a.right_mult(i, j, k, t),
        label=f"e_{i}(A/A>={n})" if n != 1 else f"e_{i}A0",
        truncated={ABOVE} if i + n - 1 > a.window.hi and _reaches_top(a, i) else (),
    )


def truncation_ideal_row(a: ZAlgebra, i: int, n: int) -> GradedModule:
    """e_i(A_{>=n}): components A_{ij} for j - i >= n."""
    a.window.require(i)
    return GradedModule(
        a,
        {j: a.dim(i, j) if j - i >= n else 0 for j in a.window.degrees},
        lambda j, k, t: a.right_mult(i, j, k, t),
        label=f"e_{i}A>={n}",
        truncated={ABOVE} if _reaches_top(a, i) else (),
    )


def graded_piece_row(a: ZAlgebra, i: int, n: int) -> GradedModule:
    """e_i(A_{>=n}/A_{>=n+1}): A_{i,i+n} in degree i+n, trivial action."""
    a.window.require(i)
    return GradedModule(
        a,
        {j: a.dim(i, j) if j - i == n else 0 for j in a.window.degrees},
        None,
        label=f"e_{i}(A>={n}/A>={n + 1})",
    )


# ── bimodules ────────────────────────────────────────────────────────────


class BimoduleRows:
    """A-B bimodule stored as rows e_iM (right B-modules) plus the left
    A-action between rows. B is either A itself or a one-point trivial
    algebra (left modules viewed as A-K bimodules)."""

    def __init__(
        self,
        left_algebra: ZAlgebra,
        right_algebra: ZAlgebra,
        rows: Mapping[int, GradedModule] | Callable[[int], GradedModule],
        left_action: LeftActionFn | None,
        *,
        label: str = "",
    ) -> None:
        self.left_algebra = left_algebra
        self.right_algebra = right_algebra
        self.label = label or "N"
        self._rows_source = rows
        self._rows: dict[int, GradedModule] = {}
        self._left_action = left_action
        self._cache: dict[tuple[int, int, int, int], SparseMatrix] = {}

    def __repr__(self) -> str:
        return f"BimoduleRows({self.label!r})"

    @property
    def field(self) -> Field:
        return self.left_algebra.field

    def row(self, i: int) -> GradedModule:
        if i not in self._rows:
            source = self._rows_source
            if callable(source):
                module = source(i) if i in self.left_algebra.window else None
            else:
                module = source.get(i)
            if module is None:
                module = GradedModule(self.right_algebra, {}, None, label=f"e_{i}{self.label}")
            self._rows[i] = module
        return self._rows[i]

    def dim(self, i: int, j: int) -> int:
        return self.row(i).dim(j)

    def left_act_basis(self, l: int, i: int, t: int, j: int) -> SparseMatrix:
        key = (l, i, t, j)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        rows, cols = self.dim(l, j), self.dim(i, j)
        if l == i:
            result = SparseMatrix.identity(self.field, cols)
        elif rows == 0 or cols == 0 or self._left_action is None or l > i:
            result = SparseMatrix.zeros(self.field, rows, cols)
        else:
            result = self._left_action(l, i, t, j)
        self._cache[key] = result
        return result

    def left_act(self, l: int, i: int, a: Sequence, j: int) -> SparseMatrix:
        total = SparseMatrix.zeros(self.field, self.dim(l, j), self.dim(i, j))
        for t, c in enumerate(a):
            if c:
                total = total + self.left_act_basis(l, i, t, j).scale(c)
        return total


def regular_bimodule(a: ZAlgebra) -> BimoduleRows:
    """A as an A-A bimodule."""
    return BimoduleRows(
        a,
        a,
        lambda i: free_row(a, i),
        lambda l, i, t, j: a.left_mult(l, i, j, t),
        label="A",
    )


def truncation_quotient(a: ZAlgebra, n: int) -> BimoduleRows:
    """A/A_{>=n}; rows e_i(A/A_{>=n})."""
    return BimoduleRows(
        a,
        a,
        lambda i: truncation_quotient_row(a, i, n),
        lambda l, i, t, j: a.left_mult(l, i, j, t),
        label=f"A/A>={n}" if n != 1 else "A0",
    )


def truncation_ideal(a: ZAlgebra, n: int) -> BimoduleRows:
    """A_{>=n}; rows e_i(A_{>=n})."""
    return BimoduleRows(
        a,
        a,
        lambda i: truncation_ideal_row(a, i, n),
        lambda l, i, t, j: a.left_mult(l, i, j, t),
        label=f"A>={n}",
    )


def graded_piece(a: ZAlgebra, n: int) -> BimoduleRows:
    """A_{>=n}/A_{>=n+1}; the left action between distinct rows vanishes."""
    return BimoduleRows(a, a, lambda i: graded_piece_row(a, i, n), None, label=f"gr{n}A")


def augmentation(a: ZAlgebra, n: int = 1) -> BimoduleRows:
    """A_0 = A/A_{>=1} (or A/A_{>=n} for other n)."""
    return truncation_quotient(a, n)


def point_algebra(field: Field) -> ZAlgebra:
    """The trivial algebra on the one-point window [0, 0]."""
    return make_trivial(Window(0, 0, 0), field)


def as_bimodule(n: GradedModule) -> BimoduleRows:
    """A left A-module N as an A-K bimodule: row i is N_i placed in degree 0."""
    if n.side != LEFT:
        raise AlgebraMismatchError("as_bimodule expects a left module")
    point = n.algebra.memoized("point", lambda: point_algebra(n.field))
    return BimoduleRows(
        n.algebra,
        point,
        lambda i: GradedModule(point, {0: n.dim(i)}, None, label=f"{n.label}_{i}"),
        lambda l, i, t, j: n.act_basis(l, i, t),
        label=n.label,
    )


# ── morphisms, kernels, cokernels ────────────────────────────────────────


@dataclass
class ModuleMorphism:
    source: GradedModule
    target: GradedModule
    mats: dict[int, SparseMatrix] = dataclass_field(default_factory=dict)

    def at(self, k: int) -> SparseMatrix:
        m = self.mats.get(k)
        if m is None:
            return SparseMatrix.zeros(self.source.field, self.target.dim(k), self.source.dim(k))
        return m

    @classmethod
    def identity(cls, m: GradedModule) -> ModuleMorphism:
        return cls(m, m, {k: SparseMatrix.identity(m.field, m.dim(k)) for k in m.window.degrees})

    @classmethod
    def zero(cls, source: GradedModule, target: GradedModule) -> ModuleMorphism:
        return cls(source, target, {})

    def compose(self, first: ModuleMorphism) -> ModuleMorphism:
        """self ∘ first."""
        degrees = self.source.window.degrees
        return ModuleMorphism(first.source, self.target, {k: self.at(k) @ first.at(k) for k in degrees})

    def failures(self) -> list[tuple[int, int]]:
        """Generator degree pairs where the commuting square fails."""
        a = self.source.algebra
        bad = []
        for j, k in a.generator_pairs:
            for g in a.generator_basis(j, k):
                src, tgt = self.source.source_target(j, k)
                lhs = self.at(tgt) @ self.source.act(j, k, g)
                rhs = self.target.act(j, k, g) @ self.at(src)
                if lhs != rhs:
                    bad.append((j, k))
                    break
        return bad


def _strict() -> bool:
    return bool(setting("ZHOM_STRICT_CHECKS"))


def closure_failures(ambient: GradedModule, spaces: Mapping[int, RowSpace]) -> list[tuple[int, int]]:
    """Generator pairs (j, k) whose action moves S_source outside S_target.

    Generators span A_{>=1}, so an empty result means the subspaces form a
    submodule and the induced sub and quotient actions are well defined.
    """
    a = ambient.algebra
    bad = []
    for j, k in a.generator_pairs:
        src, tgt = ambient.source_target(j, k)
        source_space, target_space = spaces[src], spaces[tgt]
        if not source_space.dim or target_space.is_full():
            continue
        for g in a.generator_basis(j, k):
            act = ambient.act(j, k, g)
            if not all(target_space.contains(act.apply(row)) for row in source_space.basis):
                bad.append((j, k))
                break
    return bad


def _assert_closed(label: str, ambient: GradedModule, spaces: Mapping[int, RowSpace]) -> None:
    bad = closure_failures(ambient, spaces)
    if bad:
        raise AssertionError(f"{label}: subspaces not closed under the action at {bad[:5]}")


class SubModule(GradedModule):
    """Submodule given by subspaces S_k ⊆ M_k; basis = reduced echelon rows."""

    def __init__(self, ambient: GradedModule, spaces: Mapping[int, RowSpace], *, label: str = ""):
        self.ambient = ambient
        self.spaces = {
            k: spaces.get(k) or RowSpace.zero(ambient.field, ambient.dim(k))
            for k in ambient.window.degrees
        }
        super().__init__(
            ambient.algebra,
            {k: s.dim for k, s in self.spaces.items()},
            self._restricted,
            side=ambient.side,
            label=label or f"sub({ambient.label})",
            truncated=ambient.truncated,
            window_relative=ambient.window_relative,
        )
        _assert_closed(self.label, ambient, self.spaces)
        if _strict():
            assert_module_axioms(self)

    def _restricted(self, j: int, k: int, t: int) -> SparseMatrix:
        src, tgt = self.source_target(j, k)
        act = self.ambient.act_basis(j, k, t)
        source_space, target_space = self.spaces[src], self.spaces[tgt]
        columns = []
        for row in source_space.basis:
            image = act.apply(row)
            columns.append(target_space.coords(image))
        return SparseMatrix.from_columns(self.field, target_space.dim, columns)

    def inclusion(self) -> ModuleMorphism:
        return ModuleMorphism(self, self.ambient, {k: s.inclusion() for k, s in self.spaces.items()})


class QuotientModule(GradedModule):
    """M / S for a submodule given by subspaces S_k ⊆ M_k."""

    def __init__(self, ambient: GradedModule, spaces: Mapping[int, RowSpace], *, label: str = ""):
        self.ambient = ambient
        self.spaces = {
            k: spaces.get(k) or RowSpace.zero(ambient.field, ambient.dim(k))
            for k in ambient.window.degrees
        }
        self._quotient = {k: s.quotient_map() for k, s in self.spaces.items()}
        self._section = {k: s.section() for k, s in self.spaces.items()}
        super().__init__(
            ambient.algebra,
            {k: ambient.dim(k) - s.dim for k, s in self.spaces.items()},
            self._induced,
            side=ambient.side,
            label=label or f"quot({ambient.label})",
            truncated=ambient.truncated,
            window_relative=ambient.window_relative,
        )
        _assert_closed(self.label, ambient, self.spaces)
        if _strict():
            assert_module_axioms(self)

    def _induced(self, j: int, k: int, t: int) -> SparseMatrix:
        src, tgt = self.source_target(j, k)
        return self._quotient[tgt] @ self.ambient.act_basis(j, k, t) @ self._section[src]

    def projection(self) -> ModuleMorphism:
        return ModuleMorphism(self.ambient, self, dict(self._quotient))


def kernel(f: ModuleMorphism) -> SubModule:
    spaces = {
        k: RowSpace.span(f.source.field, f.source.dim(k), kernel_basis(f.at(k)))
        for k in f.source.window.degrees
    }
    return SubModule(f.source, spaces, label=f"ker({f.source.label}->{f.target.label})")


def image(f: ModuleMorphism) -> SubModule:
    spaces = {
        k: RowSpace.span(f.target.field, f.target.dim(k), f.at(k).columns())
        for k in f.target.window.degrees
    }
    return SubModule(f.target, spaces, label=f"im({f.source.label}->{f.target.label})")


def cokernel(f: ModuleMorphism) -> QuotientModule:
    spaces = {
        k: RowSpace.span(f.target.field, f.target.dim(k), f.at(k).columns())
        for k in f.target.window.degrees
    }
    return QuotientModule(f.target, spaces, label=f"coker({f.source.label}->{f.target.label})")


def module_axiom_failures(m: GradedModule) -> list[str]:
    """Associativity of the action on all in-window basis triples."""
    a = m.algebra
    problems = []
    degrees = [j for j in m.window.degrees]
    for j in degrees:
        for k in degrees:
            if k <= j or not a.dim(j, k):
                continue
            for l in degrees:
                if l <= k or not a.dim(k, l):
                    continue
                for t, b in enumerate(a.basis(j, k)):
                    for u, c in enumerate(a.basis(k, l)):
                        bc = a.product(j, k, l, b, c)
                        if m.side == RIGHT:
                            lhs = m.act_basis(k, l, u) @ m.act_basis(j, k, t)
                        else:
                            lhs = m.act_basis(j, k, t) @ m.act_basis(k, l, u)
                        if lhs != m.act(j, l, bc):
                            problems.append(f"{m.label}: action not associative at {(j, k, l, t, u)}")
    return problems


def assert_module_axioms(m: GradedModule) -> None:
    problems = module_axiom_failures(m)
    if problems:
        raise AssertionError("; ".join(problems[:5]))


def bimodule_axiom_failures(
    n: BimoduleRows,
    left_degrees: Iterable[int] | None = None,
    right_degrees: Iterable[int] | None = None,
) -> list[str]:
    """Left and right actions commute on generators (checked per row pair).

    The optional degree sets restrict the left pairs (l, i) and right pairs
    (j, k) to those with both ends inside the set.
    """
    a, b = n.left_algebra, n.right_algebra
    left_pairs = _pairs_within(a.generator_pairs, left_degrees)
    right_pairs = _pairs_within(b.generator_pairs, right_degrees)
    problems = []
    for l, i in left_pairs:
        for g in a.generator_basis(l, i):
            for j, k in right_pairs:
                for h in b.generator_basis(j, k):
                    lhs = n.row(l).act(j, k, h) @ n.left_act(l, i, g, j)
                    rhs = n.left_act(l, i, g, k) @ n.row(i).act(j, k, h)
                    if lhs != rhs:
                        problems.append(f"{n.label}: actions do not commute at {(l, i, j, k)}")
    return problems


def _pairs_within(pairs: Iterable[tuple[int, int]], degrees: Iterable[int] | None) -> list[tuple[int, int]]:
    if degrees is None:
        return list(pairs)
    allowed = set(degrees)
    return [(x, y) for x, y in pairs if x in allowed and y in allowed]


# ── tensor, Hom, duality ─────────────────────────────────────────────────


def tensor_internal(m: GradedModule, n: BimoduleRows) -> QuotientModule:
    """M ⊗_A N: degreewise cokernel of μ⊗1 - 1⊗μ.

    The ambient module is ⊕_d M_d ⊗ e_dN; relations m·g ⊗ x - m ⊗ g·x are
    imposed for algebra generators g only (they generate A_{>=1}).
    """
    if m.side != RIGHT or m.algebra is not n.left_algebra:
        raise AlgebraMismatchError(f"cannot tensor {m.label} with {n.label}")
    a, b = m.algebra, n.right_algebra
    field = m.field
    support = m.support()
    offsets: dict[int, dict[int, int]] = {}
    dims: dict[int, int] = {}
    for k in b.window.degrees:
        offset = 0
        offsets[k] = {}
        for d in support:
            offsets[k][d] = offset
            offset += m.dim(d) * n.dim(d, k)
        dims[k] = offset

    def action(k: int, k2: int, t: int) -> SparseMatrix:
        builder = BlockBuilder(field, dims[k2], dims[k])
        for d in support:
            block = SparseMatrix.identity(field, m.dim(d)).kron(n.row(d).act_basis(k, k2, t))
            builder.add(offsets[k2][d], offsets[k][d], block)
        return builder.build()

    ambient = GradedModule(b, dims, action, label=f"{m.label}⊗{n.label}(free)")
    spaces = {}
    for k in b.window.degrees:
        relations = []
        for target_deg in support:
            width_t = n.dim(target_deg, k)
            for source_deg, g in a.generators_into(target_deg):
                width_s = n.dim(source_deg, k)
                if not m.dim(source_deg) or not width_t:
                    continue
                moved = m.act(source_deg, target_deg, g)
                lifted = n.left_act(source_deg, target_deg, g, k)
                for s in range(m.dim(source_deg)):
                    ms = moved.column(s)
                    for x in range(width_t):
                        vec = [field.zero] * dims[k]
                        base = offsets[k][target_deg]
                        for s2, c in enumerate(ms):
                            if c:
                                vec[base + s2 * width_t + x] += c
                        base = offsets[k][source_deg]
                        for x2, c in enumerate(lifted.column(x)):
                            if c:
                                vec[base + s * width_s + x2] -= c
                        relations.append(vec)
        spaces[k] = RowSpace.span(field, dims[k], relations)
    return QuotientModule(ambient, spaces, label=f"{m.label}⊗{n.label}")


def dual_D(m: GradedModule | BimoduleRows) -> GradedModule | BimoduleRows:
    """Componentwise dual; swaps sides, transposes bimodule indices."""
    if isinstance(m, BimoduleRows):
        return _dual_bimodule(m)
    other = LEFT if m.side == RIGHT else RIGHT
    return GradedModule(
        m.algebra,
        m.dims,
        lambda j, k, t: m.act_basis(j, k, t).transpose(),
        side=other,
        label=f"D({m.label})",
        truncated=m.truncated,
        window_relative=m.window_relative,
    )


def _dual_bimodule(n: BimoduleRows) -> BimoduleRows:
    if n.left_algebra is not n.right_algebra:
        raise AlgebraMismatchError("duality of bimodules needs an A-A bimodule")
    a = n.left_algebra

    def row(i: int) -> GradedModule:
        return GradedModule(
            a,
            {j: n.dim(j, i) for j in a.window.degrees},
            lambda j, k, t: n.left_act_basis(j, k, t, i).transpose(),
            label=f"e_{i}D({n.label})",
        )

    return BimoduleRows(
        a,
        a,
        row,
        lambda l, i, t, j: n.row(j).act_basis(l, i, t).transpose(),
        label=f"D({n.label})",
    )


def _flip_truncation(truncated: Iterable[str]) -> set[str]:
    swap = {BELOW: ABOVE, ABOVE: BELOW}
    return {swap[x] for x in truncated}


def to_opposite_module(m: GradedModule) -> GradedModule:
    """Transport along Gr A ≅ (Ã^op)-modules of the other side: degree i of
    the result is degree -i of m."""
    a = m.algebra
    opp = a.opposite
    side = LEFT if m.side == RIGHT else RIGHT
    return GradedModule(
        opp,
        {i: m.dim(-i) for i in opp.window.degrees},
        lambda i, j, t: m.act_basis(-j, -i, t),
        side=side,
        label=f"{m.label}~",
        truncated=_flip_truncation(m.truncated),
        window_relative=m.window_relative,
    )


def from_opposite_module(m: GradedModule) -> GradedModule:
    """Inverse of ``to_opposite_module`` (the flip is an involution)."""
    return to_opposite_module(m)


def hom_free(j: int, n: GradedModule) -> RowSpace:
    """Hom(e_jA, N) realized as N_j (evaluation at e_j)."""
    n.window.require(j)
    return RowSpace.full(n.field, n.dim(j))


def torsion_submodule(m: GradedModule) -> SubModule:
    """Window-relative τ(M): vectors v in M_j with v·A_{j,hi} = 0.

    Vectors of M_hi are never counted (nothing can be seen above them).
    """
    if m.side != RIGHT:
        raise AlgebraMismatchError("torsion_submodule expects a right module")
    a, hi = m.algebra, m.window.hi
    spaces = {}
    for j in m.window.degrees:
        if not m.dim(j):
            continue
        if j == hi:
            spaces[j] = RowSpace.zero(m.field, m.dim(j))
            continue
        blocks = [m.act_basis(j, hi, t) for t in range(a.dim(j, hi))]
        if not blocks:
            spaces[j] = RowSpace.full(m.field, m.dim(j))
            continue
        stacked = vstack(m.field, m.dim(j), blocks)
        spaces[j] = RowSpace.span(m.field, m.dim(j), kernel_basis(stacked))
    sub = SubModule(m, spaces, label=f"τ({m.label})")
    sub.window_relative = any(m.dim(j) for j in m.window.degrees if j > m.window.reliable_top)
    return sub


class HomSpace:
    """Degree-0 homomorphisms M -> N on a set of degrees.

    Each homomorphism is flattened as the concatenation of its component
    matrices X_k (row-major); ``space`` holds a reduced echelon basis.
    """

    def __init__(self, source: GradedModule, target: GradedModule, degrees: Sequence[int]):
        self.source = source
        self.target = target
        self.degrees = tuple(degrees)
        self.offsets: dict[int, int] = {}
        size = 0
        for k in self.degrees:
            self.offsets[k] = size
            size += target.dim(k) * source.dim(k)
        self.size = size
        self.space = RowSpace.zero(source.field, size)

    @property
    def dim(self) -> int:
        return self.space.dim

    def matrices(self, vector: Sequence) -> dict[int, SparseMatrix]:
        out = {}
        for k in self.degrees:
            rows, cols = self.target.dim(k), self.source.dim(k)
            base = self.offsets[k]
            data: dict[int, dict[int, Any]] = {}
            for r in range(rows):
                row = {c: vector[base + r * cols + c] for c in range(cols) if vector[base + r * cols + c]}
                if row:
                    data[r] = row
            out[k] = SparseMatrix(self.source.field, rows, cols, data)
        return out

    def flatten(self, mats: Mapping[int, SparseMatrix]) -> Vector:
        out = [self.source.field.zero] * self.size
        for k in self.degrees:
            cols = self.source.dim(k)
            base = self.offsets[k]
            m = mats.get(k)
            if m is None:
                continue
            for (r, c), v in m.entries.items():
                out[base + r * cols + c] = v
        return tuple(out)

    def basis_maps(self) -> list[dict[int, SparseMatrix]]:
        return [self.matrices(v) for v in self.space.basis]

    def element(self, coefficients: Sequence) -> dict[int, SparseMatrix]:
        return self.matrices(self.space.from_coords(coefficients))


def hom_space(
    m: GradedModule, n: GradedModule, degrees: Iterable[int] | None = None
) -> HomSpace:
    """Space of degree-0 module maps M -> N (restricted to an interval of
    degrees when given), from the commuting-square constraints on algebra
    generators."""
    if m.algebra is not n.algebra or m.side != n.side:
        raise AlgebraMismatchError(f"Hom({m.label}, {n.label}) across algebras or sides")
    a = m.algebra
    degs = sorted(set(degrees) if degrees is not None else set(m.window.degrees))
    hom = HomSpace(m, n, degs)
    field = m.field
    inside = set(degs)
    rows: list[Vector] = []
    for j, k in a.generator_pairs:
        if j not in inside or k not in inside:
            continue
        src, tgt = m.source_target(j, k)
        if not (m.dim(src) and n.dim(tgt)):
            continue
        for g in a.generator_basis(j, k):
            am, an = m.act(j, k, g), n.act(j, k, g)
            # X_tgt @ am - an @ X_src = 0, entry (r, c): r < n.dim(tgt), c < m.dim(src)
            cols_tgt, cols_src = m.dim(tgt), m.dim(src)
            for r in range(n.dim(tgt)):
                for c in range(cols_src):
                    vec = [field.zero] * hom.size
                    for p in range(cols_tgt):
                        x = am.get(p, c)
                        if x:
                            vec[hom.offsets[tgt] + r * cols_tgt + p] += x
                    for q in range(n.dim(src)):
                        y = an.get(r, q)
                        if y:
                            vec[hom.offsets[src] + q * cols_src + c] -= y
                    if any(vec):
                        rows.append(tuple(vec))
    if rows:
        solutions = kernel_basis(SparseMatrix.from_rows(field, hom.size, rows))
    else:
        solutions = [unit_vector(field, hom.size, idx) for idx in range(hom.size)]
    hom.space = RowSpace.span(field, hom.size, solutions)
    return hom


def internal_hom(n: BimoduleRows, p: GradedModule) -> GradedModule:
    """ūHom(N, P) for an A-A bimodule N and a right module P: component i is
    Hom(e_iN, P), right action by precomposition with left multiplication."""
    a = n.left_algebra
    homs = {i: hom_space(n.row(i), p) for i in a.window.degrees}

    def action(i: int, i2: int, t: int) -> SparseMatrix:
        source, target = homs[i], homs[i2]
        columns = []
        for maps in source.basis_maps():
            composed = {
                k: maps[k] @ n.left_act_basis(i, i2, t, k) for k in a.window.degrees
            }
            columns.append(target.space.coords(target.flatten(composed)))
        return SparseMatrix.from_columns(p.field, target.dim, columns)

    return GradedModule(
        a,
        {i: h.dim for i, h in homs.items()},
        action,
        label=f"Hom({n.label},{p.label})",
    )


def hom_tensor_duality_dims(m: GradedModule, n: GradedModule) -> tuple[int, int]:
    """(dim Hom(M, D(N)), dim M ⊗ N) for a right module M and a left module N."""
    left = hom_space(m, dual_D(n)).dim
    right = tensor_internal(m, as_bimodule(n)).total_dim()
    return left, right


def tensor_hom_adjunction_dims(
    x: GradedModule, n: BimoduleRows, p: GradedModule
) -> tuple[int, int]:
    """(dim Hom(X ⊗ N, P), dim Hom(X, ūHom(N, P))) for right modules X, P."""
    left = hom_space(tensor_internal(x, n), p).dim
    right = hom_space(x, internal_hom(n, p)).dim
    return left, right


# ── random and serialized modules ────────────────────────────────────────


def random_finitely_generated_module(
    a: ZAlgebra,
    seed: int,
    *,
    generators: Sequence[int],
    relations: Sequence[int] = (),
    bound: int = 3,
) -> QuotientModule:
    """Cokernel of a random map ⊕ e_hA -> ⊕ e_gA (h from ``relations``)."""
    rng = random.Random(seed)
    free = FreeModule(a, generators, label="F")
    spaces_vectors: dict[int, list[Vector]] = {}
    images = []
    for h in relations:
        vec = tuple(a.field.convert(rng.randint(-bound, bound)) for _ in range(free.dim(h)))
        images.append(vec)
    rel_free = FreeModule(a, relations, label="G")
    for k in a.window.degrees:
        spaces_vectors[k] = rel_free.map_matrix(images, free, k).columns()
    spaces = {k: RowSpace.span(a.field, free.dim(k), v) for k, v in spaces_vectors.items()}
    label = f"rand{seed}({','.join(map(str, generators))}|{','.join(map(str, relations))})"
    return QuotientModule(free, spaces, label=label)


def scramble_basis(m: GradedModule, seed: int) -> GradedModule:
    """Isomorphic copy of m under a random change of basis in every degree."""
    rng = random.Random(seed)
    field = m.field
    changes: dict[int, SparseMatrix] = {}
    inverses: dict[int, SparseMatrix] = {}
    for k in m.window.degrees:
        n = m.dim(k)
        while True:
            candidate = SparseMatrix.from_dense(
                field, [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)], n
            )
            inv = inverse(candidate)
            if inv is not None:
                break
        changes[k], inverses[k] = candidate, inv

    def action(j: int, k: int, t: int) -> SparseMatrix:
        src, tgt = m.source_target(j, k)
        return changes[tgt] @ m.act_basis(j, k, t) @ inverses[src]

    return GradedModule(
        m.algebra,
        m.dims,
        action,
        side=m.side,
        label=f"{m.label}'",
        truncated=m.truncated,
        window_relative=m.window_relative,
    )


def module_to_json(m: GradedModule) -> dict[str, Any]:
    a = m.algebra
    actions = []
    for j in m.window.degrees:
        for k in m.window.degrees:
            if k <= j:
                continue
            for t in range(a.dim(j, k)):
                mat = m.act_basis(j, k, t)
                if not mat.is_zero():
                    actions.append([j, k, t, mat.to_json()])
    return {
        "side": m.side,
        "label": m.label,
        "dims": [[j, d] for j, d in sorted(m.dims.items()) if d],
        "truncated": sorted(m.truncated),
        "action": actions,
    }


def module_from_json(a: ZAlgebra, obj: Mapping[str, Any]) -> GradedModule:
    field = a.field
    dims = {int(j): int(d) for j, d in obj.get("dims", [])}
    table = {
        (int(j), int(k), int(t)): SparseMatrix.from_json(field, mat)
        for j, k, t, mat in obj.get("action", [])
    }
    side = obj.get("side", RIGHT)

    def action(j: int, k: int, t: int) -> SparseMatrix:
        found = table.get((j, k, t))
        if found is not None:
            return found
        rows, cols = (dims.get(k, 0), dims.get(j, 0)) if side == RIGHT else (
            dims.get(j, 0),
            dims.get(k, 0),
        )
        return SparseMatrix.zeros(field, rows, cols)

    return GradedModule(
        a,
        dims,
        action,
        side=side,
        label=str(obj.get("label", "M")),
        truncated=obj.get("truncated", ()),
    )
