"""Internal Ext and Tor from minimal resolutions, the balance check and local
cohomology as the stabilized colimit of Ext(A/A_{>=n}, -).

Hom from a free module is evaluated on generators (Hom(e_gA, N) = N_g), so
every cochain complex here is a direct sum of module components indexed by
resolution generators.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field as dataclass_field
from typing import Any

from zhom.services.algebra import ZAlgebra
from zhom.services.conf import setting
from zhom.services.errors import (
    AlgebraMismatchError,
    ColimitNotStabilizedError,
    ResolutionTruncatedError,
)
from zhom.services.linalg import (
    BlockBuilder,
    RowSpace,
    SparseMatrix,
    Subquotient,
    inverse,
    kernel_basis,
    rank,
)
from zhom.services.modules import (
    LEFT,
    BimoduleRows,
    FreeModule,
    GradedModule,
    ModuleMorphism,
    as_bimodule,
    augmentation,
    free_row,
    graded_piece_row,
    hom_free,
    truncation_quotient_column,
    truncation_quotient_row,
)
from zhom.services.resolutions import (
    AtLeast,
    ExactPd,
    FreeResolution,
    lift_chain_map,
    minimal_free_resolution,
    pd_of,
)

logger = logging.getLogger(__name__)


# ── cached resolutions of standard rows ──────────────────────────────────


def _memoized(a: ZAlgebra, key: tuple, build: Callable[[], Any]) -> Any:
    return a.memoized(key, build)


def quotient_row_resolution(a: ZAlgebra, i: int, n: int, max_length: int) -> FreeResolution:
    """Minimal resolution of e_i(A/A_{>=n}), shared through ``a.memo``."""
    return _memoized(
        a,
        ("quotient-row", i, n, max_length),
        lambda: minimal_free_resolution(truncation_quotient_row(a, i, n), max_length),
    )


def _graded_piece_resolution(a: ZAlgebra, i: int, n: int, max_length: int) -> FreeResolution:
    return _memoized(
        a,
        ("graded-piece", i, n, max_length),
        lambda: minimal_free_resolution(graded_piece_row(a, i, n), max_length),
    )


def _default_length() -> int:
    return int(setting("ZHOM_MAX_LENGTH"))


# ── Ext ──────────────────────────────────────────────────────────────────


def cochain_dim(free: FreeModule, n: GradedModule) -> int:
    return sum(hom_free(g, n).dim for g in free.generators)


def _cochain_offsets(free: FreeModule, n: GradedModule) -> list[int]:
    offsets, total = [], 0
    for g in free.generators:
        offsets.append(total)
        total += n.dim(g)
    return offsets


def pullback_matrix(
    new: FreeModule, images: tuple, old: FreeModule, n: GradedModule
) -> SparseMatrix:
    """Hom(old, N) -> Hom(new, N), φ -> φ∘ψ, where ψ sends generator x of
    ``new`` to images[x] in ``old``."""
    field = n.field
    row_offsets, col_offsets = _cochain_offsets(new, n), _cochain_offsets(old, n)
    builder = BlockBuilder(field, cochain_dim(new, n), cochain_dim(old, n))
    for x, target_deg in enumerate(new.generators):
        if not n.dim(target_deg):
            continue
        for r, source_deg in enumerate(old.generators):
            if not n.dim(source_deg):
                continue
            component = old.component(images[x], r, target_deg)
            if any(component):
                builder.add(row_offsets[x], col_offsets[r], n.act(source_deg, target_deg, component))
    return builder.build()


def pushforward_matrix(
    free: FreeModule, n: GradedModule, n2: GradedModule, f: Callable[[int], SparseMatrix]
) -> SparseMatrix:
    """Hom(F, N) -> Hom(F, N2) induced by maps f(g): N_g -> N2_g."""
    builder = BlockBuilder(n.field, cochain_dim(free, n2), cochain_dim(free, n))
    rows, cols = _cochain_offsets(free, n2), _cochain_offsets(free, n)
    for r, g in enumerate(free.generators):
        if n.dim(g) and n2.dim(g):
            builder.add(rows[r], cols[r], f(g))
    return builder.build()


@dataclass
class ExtGroup:
    """Ext^q(M, N) = ker δ^q / im δ^{q-1} on Hom(F_•, N)."""

    q: int
    resolution: FreeResolution
    target: GradedModule
    space: Subquotient

    @property
    def dim(self) -> int:
        return self.space.dim


def _coboundary(res: FreeResolution, n: GradedModule, q: int) -> SparseMatrix:
    """δ^q: Hom(F_q, N) -> Hom(F_{q+1}, N)."""
    source = res.term(q)
    target = res.term(q + 1)
    images = res.steps[q + 1].images if q + 1 < len(res.steps) else ()
    return pullback_matrix(target, images, source, n)


def ext_from_resolution(res: FreeResolution, n: GradedModule, q: int) -> ExtGroup:
    if n.algebra is not res.algebra:
        raise AlgebraMismatchError("Ext target lives over a different algebra")
    if q < 0:
        outer = RowSpace.zero(n.field, 0)
        return ExtGroup(q, res, n, Subquotient(outer, ()))
    res.require(q + 1)
    delta = _coboundary(res, n, q)
    ambient = cochain_dim(res.term(q), n)
    outer = RowSpace.span(n.field, ambient, kernel_basis(delta))
    inner = _coboundary(res, n, q - 1).columns() if q >= 1 else ()
    return ExtGroup(q, res, n, Subquotient(outer, inner))


def ext(m: GradedModule, n: GradedModule, q: int, max_length: int | None = None) -> ExtGroup:
    res = minimal_free_resolution(m, max_length if max_length is not None else q + 1)
    return ext_from_resolution(res, n, q)


@dataclass
class ExtTable:
    """dims[(q, key)] with the groups that produced them; ``key`` is a target
    row or a degree depending on the caller."""

    provenance: str
    dims: dict[tuple[int, int], int] = dataclass_field(default_factory=dict)
    groups: dict[tuple[int, int], ExtGroup] = dataclass_field(default_factory=dict)

    def add(self, q: int, key: int, group: ExtGroup) -> None:
        self.dims[(q, key)] = group.dim
        self.groups[(q, key)] = group

    def nonzero(self) -> dict[tuple[int, int], int]:
        return {key: d for key, d in sorted(self.dims.items()) if d}

    def to_json(self) -> dict[str, Any]:
        return {
            "provenance": self.provenance,
            "entries": [[q, key, d] for (q, key), d in sorted(self.dims.items()) if d],
        }


def ext_into_rows(
    res: FreeResolution, n: BimoduleRows, q_max: int, rows: Any = None
) -> ExtTable:
    """Ext^q(M, e_iN) for q <= q_max and each row i."""
    table = ExtTable(f"Hom(F({res.module.label}), e_i{n.label})")
    for i in rows if rows is not None else n.left_algebra.window.degrees:
        for q in range(q_max + 1):
            table.add(q, i, ext_from_resolution(res, n.row(i), q))
    return table


def ext_left_module(res: FreeResolution, n: BimoduleRows, q: int) -> GradedModule:
    """Ext^q(M, N) for an A-A bimodule N as a left module: component i is
    Ext^q(M, e_iN); a in A_{li} acts through the left action of N."""
    a = n.left_algebra
    groups = {i: ext_from_resolution(res, n.row(i), q) for i in a.window.degrees}
    free = res.term(q)

    def action(l: int, i: int, t: int) -> SparseMatrix:
        source, target = groups[i], groups[l]
        chain = pushforward_matrix(
            free, n.row(i), n.row(l), lambda g: n.left_act_basis(l, i, t, g)
        )
        return source.space.map_matrix(target.space, chain)

    return GradedModule(
        a,
        {i: g.dim for i, g in groups.items()},
        action,
        side=LEFT,
        label=f"Ext^{q}({res.module.label},{n.label})",
    )


def ext_graded_quotient(
    a: ZAlgebra, n: int, target: GradedModule, q: int, max_length: int | None = None
) -> dict[int, int]:
    """ūExt^q(A/A_{>=n}, target)_j = Ext^q(e_j(A/A_{>=n}), target), per row j."""
    length = max_length if max_length is not None else q + 1
    out = {}
    for j in a.window.degrees:
        res = quotient_row_resolution(a, j, n, length)
        if res.known(q + 1):
            out[j] = ext_from_resolution(res, target, q).dim
    return out


@dataclass(frozen=True)
class TwistingRow:
    degree: int
    graded_piece: int
    twisted: int

    @property
    def ok(self) -> bool:
        return self.graded_piece == self.twisted


def twisting_cross_check(a: ZAlgebra, n: int, target: GradedModule, q: int) -> list[TwistingRow]:
    """dim Ext^q(e_j(A_{>=n}/A_{>=n+1}), T) against
    dim Ext^q(e_{j+n}A_0, T) · dim A_{j,j+n}, for rows with both sides certified."""
    rows = []
    for j in a.window.degrees:
        if j + n not in a.window:
            continue
        piece = _graded_piece_resolution(a, j, n, q + 1)
        simple = quotient_row_resolution(a, j + n, 1, q + 1)
        if not (piece.known(q + 1) and simple.known(q + 1)):
            continue
        lhs = ext_from_resolution(piece, target, q).dim
        rhs = ext_from_resolution(simple, target, q).dim * a.dim(j, j + n)
        rows.append(TwistingRow(j, lhs, rhs))
    return rows


@dataclass(frozen=True)
class EulerRow:
    degree: int
    terms: tuple[tuple[int, int, int], ...]
    flanked: bool

    @property
    def alternating_sum(self) -> int:
        return sum(low - high + piece for low, high, piece in self.terms)

    @property
    def ok(self) -> bool:
        return not self.flanked or self.alternating_sum == 0


def long_exact_sequence_euler(
    a: ZAlgebra, n: int, target: GradedModule, q_max: int
) -> list[EulerRow]:
    """Euler characteristic of the long exact Ext sequence of
    0 -> A_{>=n}/A_{>=n+1} -> A/A_{>=n+1} -> A/A_{>=n} -> 0, rowwise.

    Rows whose Ext groups do not vanish at q_max + 1 are reported unflanked.
    """
    length = q_max + 2
    out = []
    for j in a.window.degrees:
        resolutions = (
            quotient_row_resolution(a, j, n, length),
            quotient_row_resolution(a, j, n + 1, length),
            _graded_piece_resolution(a, j, n, length),
        )
        if not all(r.known(q_max + 2) for r in resolutions):
            continue
        terms = tuple(
            tuple(ext_from_resolution(r, target, q).dim for r in resolutions)
            for q in range(q_max + 1)
        )
        tail = [ext_from_resolution(r, target, q_max + 1).dim for r in resolutions]
        out.append(EulerRow(j, terms, flanked=not any(tail)))
    return out


# ── Tor ──────────────────────────────────────────────────────────────────


def _tor_boundary(res: FreeResolution, n: BimoduleRows, p: int, k: int) -> SparseMatrix:
    """∂_p: F_p ⊗ N -> F_{p-1} ⊗ N in right degree k (∂_0 = 0)."""
    field = n.field
    source = res.term(p)
    if p == 0:
        return SparseMatrix.zeros(field, 0, sum(n.dim(g, k) for g in source.generators))
    target = res.term(p - 1)
    images = res.steps[p].images if p < len(res.steps) else ()
    row_offsets, col_offsets = [], []
    total = 0
    for g in target.generators:
        row_offsets.append(total)
        total += n.dim(g, k)
    rows = total
    total = 0
    for g in source.generators:
        col_offsets.append(total)
        total += n.dim(g, k)
    builder = BlockBuilder(field, rows, total)
    for x, gx in enumerate(source.generators):
        if not n.dim(gx, k):
            continue
        for r, gr in enumerate(target.generators):
            if not n.dim(gr, k):
                continue
            component = target.component(images[x], r, gx)
            if any(component):
                builder.add(row_offsets[r], col_offsets[x], n.left_act(gr, gx, component, k))
    return builder.build()


def tor(
    m: GradedModule | FreeResolution, n: BimoduleRows | GradedModule, p: int
) -> dict[int, int]:
    """Tor_p(M, N) by right-hand degree (a single degree 0 for a left module N)."""
    res = m if isinstance(m, FreeResolution) else minimal_free_resolution(m, p + 1)
    bimodule = as_bimodule(n) if isinstance(n, GradedModule) else n
    res.require(p + 1)
    out = {}
    for k in bimodule.right_algebra.window.degrees:
        size = sum(bimodule.dim(g, k) for g in res.term(p).generators)
        if not size:
            continue
        value = size - rank(_tor_boundary(res, bimodule, p, k)) - rank(
            _tor_boundary(res, bimodule, p + 1, k)
        )
        if value:
            out[k] = value
    return out


def tor_with_left_resolution(m: GradedModule, left_res: FreeResolution, p: int) -> int:
    """dim Tor_p(M, N) from a resolution of the left module N (computed over
    the opposite): the complex is ⊕ M_h over the generators of G_p."""
    left_res.require(p + 1)
    field = m.field

    def degrees(q: int) -> list[int]:
        return [-g for g in left_res.term(q).generators]

    def boundary(q: int) -> SparseMatrix:
        if q == 0:
            return SparseMatrix.zeros(field, 0, sum(m.dim(h) for h in degrees(0)))
        source, target = left_res.term(q), left_res.term(q - 1)
        images = left_res.steps[q].images if q < len(left_res.steps) else ()
        src_deg, tgt_deg = degrees(q), degrees(q - 1)
        col_offsets, row_offsets = [], []
        total = 0
        for h in src_deg:
            col_offsets.append(total)
            total += m.dim(h)
        cols = total
        total = 0
        for h in tgt_deg:
            row_offsets.append(total)
            total += m.dim(h)
        builder = BlockBuilder(field, total, cols)
        for x, hx in enumerate(src_deg):
            if not m.dim(hx):
                continue
            for s, hs in enumerate(tgt_deg):
                if not m.dim(hs):
                    continue
                # component in Ã_{-hs,-hx} = A_{hx,hs}
                component = target.component(images[x], s, -hx)
                if any(component):
                    builder.add(row_offsets[s], col_offsets[x], m.act(hx, hs, component))
        return builder.build()

    size = sum(m.dim(h) for h in degrees(p))
    return size - rank(boundary(p)) - rank(boundary(p + 1))


@dataclass
class TorBalanceReport:
    i: int
    j: int
    from_right: list[int]
    from_left: list[int]

    @property
    def compared(self) -> list[int]:
        """Indices p known on both sides (-1 marks a window-limited entry)."""
        pairs = enumerate(zip(self.from_right, self.from_left))
        return [p for p, (r, l) in pairs if r >= 0 and l >= 0]

    @property
    def ok(self) -> bool:
        return all(self.from_right[p] == self.from_left[p] for p in self.compared)

    def to_json(self) -> dict[str, Any]:
        return {
            "i": self.i,
            "j": self.j,
            "fromRight": self.from_right,
            "fromLeft": self.from_left,
            "compared": self.compared,
            "ok": self.ok,
        }


def tor_balance_check(a: ZAlgebra, i: int, j: int, p_max: int) -> TorBalanceReport:
    """dim Tor_p(e_iA_0, A_0e_j) from a right resolution of e_iA_0 and from a
    left resolution of A_0e_j."""
    simple_row = truncation_quotient_row(a, i, 1)
    simple_column = truncation_quotient_column(a, j, 1)
    right_res = minimal_free_resolution(simple_row, p_max + 1)
    left_res = minimal_free_resolution(simple_column, p_max + 1)
    from_right, from_left = [], []
    for p in range(p_max + 1):
        from_right.append(sum(tor(right_res, simple_column, p).values()) if right_res.known(p + 1) else -1)
        from_left.append(
            tor_with_left_resolution(simple_row, left_res, p) if left_res.known(p + 1) else -1
        )
    report = TorBalanceReport(i, j, from_right, from_left)
    if not report.ok:
        logger.warning("Tor balance fails at (%d, %d): %s vs %s", i, j, from_right, from_left)
    return report


def pd_via_tor(m: GradedModule) -> int | None:
    """sup{p : Tor_p(M, A_0) != 0} (Tor_p(A_0, M) for a left module), or None
    when the resolution is window-limited."""
    res = minimal_free_resolution(m)
    if not res.status.terminated:
        return None
    a = res.algebra
    top = -1
    for p in range(res.length + 1):
        if m.side == LEFT:
            # Tor_p(A_0, M) through the resolution over the opposite
            value = sum(
                tor_with_left_resolution(truncation_quotient_row(m.algebra, i, 1), res, p)
                for i in m.algebra.window.degrees
            )
        else:
            value = sum(tor(res, augmentation(a), p).values())
        if value:
            top = p
    return top


@dataclass
class GlobalDimensionBalance:
    right: dict[int, ExactPd | AtLeast]
    left: dict[int, ExactPd | AtLeast]

    @staticmethod
    def _sup(values: Mapping[int, ExactPd | AtLeast]) -> ExactPd | AtLeast | None:
        if not values:
            return None
        top = max(v.value for v in values.values())
        if all(v.exact for v in values.values()):
            return ExactPd(top)
        return AtLeast(top)

    @property
    def right_sup(self) -> ExactPd | AtLeast | None:
        return self._sup(self.right)

    @property
    def left_sup(self) -> ExactPd | AtLeast | None:
        return self._sup(self.left)

    @property
    def ok(self) -> bool:
        r, l = self.right_sup, self.left_sup
        if r is None or l is None or not (r.exact and l.exact):
            return True
        return r == l


def global_dimension_balance(
    a: ZAlgebra, degrees: Any, max_length: int | None = None
) -> GlobalDimensionBalance:
    """sup_i pd(e_iA_0) against sup_j pd(A_0e_j) over the given degrees."""
    right = {i: pd_of(quotient_row_resolution(a, i, 1, max_length or _default_length())) for i in degrees}
    left = {
        j: pd_of(minimal_free_resolution(truncation_quotient_column(a, j, 1), max_length))
        for j in degrees
    }
    return GlobalDimensionBalance(right, left)


# ── local cohomology ─────────────────────────────────────────────────────


@dataclass
class ColimitCell:
    q: int
    degree: int
    dims: list[int]
    isos: list[bool]
    stabilized_at: int | None

    @property
    def certified(self) -> bool:
        return self.stabilized_at is not None

    @property
    def value(self) -> int | None:
        if self.stabilized_at is not None:
            return self.dims[self.stabilized_at - 1]
        return self.dims[-1] if self.dims else None

    def to_json(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "degree": self.degree,
            "dim": self.value,
            "stabilizedAt": self.stabilized_at,
            "flag": None if self.certified else "ColimitNotStabilized",
        }


class LocalCohomology:
    """R^qτ(M) for q <= q_max and every window degree.

    Cell (q, i) scans H(n) = Ext^q(e_i(A/A_{>=n}), M) for n = 1, 2, ... while
    the resolution of e_i(A/A_{>=n}) is trustworthy through step q + 1, with
    the transition maps H(n) -> H(n+1) induced by the projections
    e_i(A/A_{>=n+1}) -> e_i(A/A_{>=n}). The cell is stabilized at the
    smallest n0 after which every scanned transition is an isomorphism,
    provided at least ``stability_runs`` of them were seen and the scan
    reached a stage whose truncation e_i(A/A_{>=n}) meets the lowest
    in-window support degree of M. Short all-zero scans cut off by the
    window stay flagged.
    """

    def __init__(
        self,
        module: GradedModule,
        q_max: int,
        *,
        n_max: int | None = None,
        stability_runs: int | None = None,
    ) -> None:
        self.module = module
        self.algebra = module.algebra
        self.q_max = q_max
        self.length = q_max + 1
        self.n_max = n_max if n_max is not None else module.window.width
        self.stability_runs = int(
            setting("ZHOM_STABILITY_RUNS") if stability_runs is None else stability_runs
        )
        self.cells: dict[tuple[int, int], ColimitCell] = {}
        self.support_floor = module.lowest_degree()
        self._groups: dict[tuple[int, int, int], ExtGroup] = {}
        self._transitions: dict[tuple[int, int, int], SparseMatrix] = {}
        self._module_cache: dict[int, GradedModule] = {}
        for i in module.window.degrees:
            self._scan(i)

    def __repr__(self) -> str:
        return f"LocalCohomology({self.module.label!r}, q<={self.q_max})"

    def resolution(self, i: int, n: int) -> FreeResolution:
        return quotient_row_resolution(self.algebra, i, n, self.length)

    def _projection_lift(self, i: int, n: int):
        """Chain map F(e_i(A/A>=n+1)) -> F(e_i(A/A>=n)) over the projection."""

        def build():
            source, target = self.resolution(i, n + 1), self.resolution(i, n)
            mats = {
                k: SparseMatrix.identity(self.algebra.field, target.module.dim(k))
                if target.module.dim(k)
                else SparseMatrix.zeros(self.algebra.field, 0, source.module.dim(k))
                for k in self.algebra.window.degrees
            }
            projection = ModuleMorphism(source.module, target.module, mats)
            return lift_chain_map(source, target, projection, self.q_max)

        return _memoized(self.algebra, ("projection-lift", i, n, self.length), build)

    def _scan(self, i: int) -> None:
        top = min(self.n_max, self.module.window.hi - i)
        for q in range(self.q_max + 1):
            dims: list[int] = []
            isos: list[bool] = []
            for n in range(1, top + 1):
                res = self.resolution(i, n)
                if not res.known(q + 1):
                    break
                group = ext_from_resolution(res, self.module, q)
                self._groups[(q, i, n)] = group
                if dims:
                    t = self._transition_matrix(q, i, n - 1)
                    isos.append(
                        group.dim == dims[-1] and (group.dim == 0 or rank(t) == group.dim)
                    )
                dims.append(group.dim)
            n0 = len(dims)
            while n0 > 1 and isos[n0 - 2]:
                n0 -= 1
            stabilized = None
            if len(dims) >= self.required_stage(i) and len(dims) - n0 >= self.stability_runs:
                stabilized = n0
            if dims and stabilized is None:
                logger.info("%s: R^%dτ at degree %d did not stabilize (dims %s)", self.module.label, q, i, dims)
            self.cells[(q, i)] = ColimitCell(q, i, dims, isos, stabilized)

    def required_stage(self, i: int) -> int:
        """Smallest n with i + n - 1 >= lowest support degree of M."""
        if self.support_floor is None:
            return 1
        return max(1, self.support_floor - i + 1)

    def _transition_matrix(self, q: int, i: int, n: int) -> SparseMatrix:
        """H(i, n) -> H(i, n+1) on Ext^q."""
        key = (q, i, n)
        if key not in self._transitions:
            chain = self._projection_lift(i, n)
            source, target = self.resolution(i, n), self.resolution(i, n + 1)
            images = chain.images[q] if q < len(chain.images) else ()
            pullback = pullback_matrix(target.term(q), images, source.term(q), self.module)
            self._transitions[key] = self._groups[(q, i, n)].space.map_matrix(
                self._groups[(q, i, n + 1)].space, pullback
            )
        return self._transitions[key]

    # ── access ────────────────────────────────────────────────────────────

    def value(self, q: int, i: int) -> int | None:
        cell = self.cells.get((q, i))
        return cell.value if cell else None

    def stabilized_at(self, q: int, i: int) -> int | None:
        cell = self.cells.get((q, i))
        return cell.stabilized_at if cell else None

    def dims(self, q: int, *, certified_only: bool = True) -> dict[int, int]:
        out = {}
        for (qq, i), cell in self.cells.items():
            if qq != q or (certified_only and not cell.certified):
                continue
            if cell.value:
                out[i] = cell.value
        return dict(sorted(out.items()))

    def certified_degrees(self, q: int) -> list[int]:
        return sorted(i for (qq, i), cell in self.cells.items() if qq == q and cell.certified)

    def flagged(self) -> list[tuple[int, int]]:
        return sorted(key for key, cell in self.cells.items() if not cell.certified)

    def group(self, q: int, i: int, n: int | None = None) -> ExtGroup:
        cell = self.cells[(q, i)]
        return self._groups[(q, i, n if n is not None else cell.stabilized_at)]

    def to_json(self) -> dict[str, Any]:
        return {
            "module": self.module.label,
            "qMax": self.q_max,
            "cells": [cell.to_json() for _, cell in sorted(self.cells.items()) if cell.value or not cell.certified],
        }

    # ── transport between colimit stages ─────────────────────────────────

    def forward(self, q: int, i: int, n_to: int) -> SparseMatrix:
        """Canonical stage H(i, n0) -> H(i, n_to), n_to >= n0."""
        cell = self.cells[(q, i)]
        n0 = cell.stabilized_at
        size = self.group(q, i).dim
        result = SparseMatrix.identity(self.algebra.field, size)
        for n in range(n0, n_to):
            result = self._transition_matrix(q, i, n) @ result
        return result

    def back(self, q: int, i: int, n_from: int) -> SparseMatrix:
        """H(i, n_from) -> canonical stage H(i, n0)."""
        inv = inverse(self.forward(q, i, n_from))
        if inv is None:
            raise ResolutionTruncatedError(f"transitions at degree {i} are not invertible")
        return inv

    def _last_stage(self, q: int, i: int) -> int:
        return len(self.cells[(q, i)].dims)

    # ── module structure ─────────────────────────────────────────────────

    def _left_mult_lift(self, i: int, i2: int, t: int, n2: int):
        """Chain map over e_{i2}(A/A>=n2) -> e_i(A/A>=n2+δ), x -> b_t x."""
        a = self.algebra
        delta = i2 - i

        def build():
            source = self.resolution(i2, n2)
            target = self.resolution(i, n2 + delta)
            mats = {}
            for k in a.window.degrees:
                if source.module.dim(k):
                    mats[k] = a.left_mult(i, i2, k, t)
            return lift_chain_map(source, target, ModuleMorphism(source.module, target.module, mats), self.q_max)

        return _memoized(a, ("left-mult-lift", i, i2, t, n2, self.length), build)

    def action_matrix(self, q: int, i: int, i2: int, t: int) -> SparseMatrix | None:
        """Right action of basis t of A_{i,i2} on R^qτ(M): degree i -> i2,
        or None when the needed stages are not certified."""
        c1, c2 = self.cells[(q, i)], self.cells[(q, i2)]
        if not (c1.certified and c2.certified):
            return None
        delta = i2 - i
        n2 = max(c2.stabilized_at, c1.stabilized_at - delta, 1)
        if n2 > self._last_stage(q, i2) or n2 + delta > self._last_stage(q, i):
            return None
        chain = self._left_mult_lift(i, i2, t, n2)
        source = self.resolution(i2, n2)
        target = self.resolution(i, n2 + delta)
        images = chain.images[q] if q < len(chain.images) else ()
        pullback = pullback_matrix(source.term(q), images, target.term(q), self.module)
        middle = self._groups[(q, i, n2 + delta)].space.map_matrix(
            self._groups[(q, i2, n2)].space, pullback
        )
        return self.back(q, i2, n2) @ middle @ self.forward(q, i, n2 + delta)

    def as_module(self, q: int) -> GradedModule:
        """R^qτ(M) as a right module on its certified degrees.

        Acting between certified degrees whose stages do not overlap raises
        ColimitNotStabilizedError.
        """
        if q in self._module_cache:
            return self._module_cache[q]
        a = self.algebra
        certified = set(self.certified_degrees(q))
        dims = {i: self.cells[(q, i)].value for i in certified}

        def action(i: int, i2: int, t: int) -> SparseMatrix:
            found = self.action_matrix(q, i, i2, t)
            if found is None:
                if not dims.get(i) or not dims.get(i2):
                    return SparseMatrix.zeros(a.field, dims.get(i2, 0), dims.get(i, 0))
                raise ColimitNotStabilizedError(
                    f"{self.module.label}: R^{q}τ action {i}->{i2} outside certified stages"
                )
            return found

        module = GradedModule(
            a,
            dims,
            action,
            label=f"R^{q}τ({self.module.label})",
            window_relative=bool(self.flagged()),
        )
        self._module_cache[q] = module
        return module

    def induced_map(self, other: LocalCohomology, f: ModuleMorphism, q: int) -> dict[int, SparseMatrix]:
        """R^qτ(f): R^qτ(M) -> R^qτ(M') for a module map f: M -> M', degreewise
        on the degrees certified on both sides."""
        out = {}
        for i in self.certified_degrees(q):
            if (q, i) not in other.cells or not other.cells[(q, i)].certified:
                continue
            n = max(self.cells[(q, i)].stabilized_at, other.cells[(q, i)].stabilized_at)
            if n > self._last_stage(q, i) or n > other._last_stage(q, i):
                continue
            free = self.resolution(i, n).term(q)
            chain = pushforward_matrix(free, self.module, other.module, f.at)
            middle = self._groups[(q, i, n)].space.map_matrix(other._groups[(q, i, n)].space, chain)
            out[i] = other.back(q, i, n) @ middle @ self.forward(q, i, n)
        return out


def local_cohomology(
    m: GradedModule | BimoduleRows,
    q_max: int,
    n_max: int | None = None,
    stability_runs: int | None = None,
) -> LocalCohomology | dict[int, LocalCohomology]:
    """R^qτ of a right module, or rowwise for a bimodule."""
    if isinstance(m, BimoduleRows):
        return {
            i: LocalCohomology(m.row(i), q_max, n_max=n_max, stability_runs=stability_runs)
            for i in m.left_algebra.window.degrees
        }
    return LocalCohomology(m, q_max, n_max=n_max, stability_runs=stability_runs)


def local_cohomology_of_free_row(a: ZAlgebra, j: int, q_max: int) -> LocalCohomology:
    """R^qτ(e_jA), shared through ``a.memo``."""
    return _memoized(
        a, ("local-cohomology-row", j, q_max), lambda: LocalCohomology(free_row(a, j), q_max)
    )
