"""Sparse exact matrices and the rank / kernel / solve kernel.

Elimination is delegated to sympy's ``DomainMatrix`` (sparse ``SDM`` format)
over ``QQ`` or ``GF(p)``; everything else here is bookkeeping around a
dict-of-dicts representation that never stores zeros.

Vectors are plain tuples of domain elements.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

from sympy.polys.matrices import DomainMatrix

from zhom.services.errors import MixedFieldsError
from zhom.services.field import Field

logger = logging.getLogger(__name__)

Vector = tuple


def zero_vector(field: Field, n: int) -> Vector:
    return (field.zero,) * n


def unit_vector(field: Field, n: int, index: int) -> Vector:
    out = [field.zero] * n
    out[index] = field.one
    return tuple(out)


def is_zero_vector(v: Sequence) -> bool:
    return not any(v)


def combine(field: Field, n: int, terms: Iterable[tuple[Any, Sequence]]) -> Vector:
    """Linear combination sum(c * v) of length-n vectors."""
    out = [field.zero] * n
    for c, v in terms:
        if not c:
            continue
        for idx, x in enumerate(v):
            if x:
                out[idx] += c * x
    return tuple(out)


class SparseMatrix:
    """rows x cols matrix over one field, zeros omitted."""

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(
        self,
        field: Field,
        rows: int,
        cols: int,
        data: Mapping[int, Mapping[int, Any]] | None = None,
    ) -> None:
        self.field = field
        self.rows = int(rows)
        self.cols = int(cols)
        clean: dict[int, dict[int, Any]] = {}
        for r, row in (data or {}).items():
            kept = {c: v for c, v in row.items() if v}
            if kept:
                clean[r] = kept
        self._data = clean

    # ── constructors ──────────────────────────────────────────────────────

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> SparseMatrix:
        return cls(field, rows, cols)

    @classmethod
    def identity(cls, field: Field, n: int) -> SparseMatrix:
        return cls(field, n, n, {i: {i: field.one} for i in range(n)})

    @classmethod
    def from_entries(
        cls, field: Field, rows: int, cols: int, entries: Mapping[tuple[int, int], Any]
    ) -> SparseMatrix:
        data: dict[int, dict[int, Any]] = {}
        for (r, c), v in entries.items():
            data.setdefault(r, {})[c] = field.convert(v)
        return cls(field, rows, cols, data)

    @classmethod
    def from_dense(cls, field: Field, rows: Sequence[Sequence[Any]], cols: int | None = None):
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        data = {
            r: {c: field.convert(v) for c, v in enumerate(row)} for r, row in enumerate(rows)
        }
        return cls(field, len(rows), ncols, data)

    @classmethod
    def from_columns(cls, field: Field, rows: int, columns: Sequence[Sequence]) -> SparseMatrix:
        data: dict[int, dict[int, Any]] = {}
        for c, col in enumerate(columns):
            for r, v in enumerate(col):
                if v:
                    data.setdefault(r, {})[c] = v
        return cls(field, rows, len(columns), data)

    @classmethod
    def from_rows(cls, field: Field, cols: int, rows: Sequence[Sequence]) -> SparseMatrix:
        data = {r: {c: v for c, v in enumerate(row) if v} for r, row in enumerate(rows)}
        return cls(field, len(rows), cols, data)

    @classmethod
    def from_domain_matrix(cls, field: Field, dm: DomainMatrix) -> SparseMatrix:
        rows, cols = dm.shape
        rep = dm.to_sparse().rep
        return cls(field, rows, cols, {r: dict(row) for r, row in rep.items()})

    def to_domain_matrix(self) -> DomainMatrix:
        data = {r: dict(row) for r, row in self._data.items()}
        return DomainMatrix(data, (self.rows, self.cols), self.field.domain)

    # ── access ────────────────────────────────────────────────────────────

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def entries(self) -> dict[tuple[int, int], Any]:
        return {(r, c): v for r, row in self._data.items() for c, v in row.items()}

    def get(self, r: int, c: int):
        return self._data.get(r, {}).get(c, self.field.zero)

    def row(self, r: int) -> Vector:
        out = [self.field.zero] * self.cols
        for c, v in self._data.get(r, {}).items():
            out[c] = v
        return tuple(out)

    def column(self, c: int) -> Vector:
        out = [self.field.zero] * self.rows
        for r, row in self._data.items():
            v = row.get(c)
            if v:
                out[r] = v
        return tuple(out)

    def columns(self) -> list[Vector]:
        return [self.column(c) for c in range(self.cols)]

    def is_zero(self) -> bool:
        return not self._data

    def nnz(self) -> int:
        return sum(len(row) for row in self._data.values())

    # ── arithmetic ────────────────────────────────────────────────────────

    def _check_field(self, other: SparseMatrix) -> None:
        if other.field != self.field:
            raise MixedFieldsError(f"{self.field.label} and {other.field.label} matrices")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and self._data == other._data
        )

    def __hash__(self) -> int:
        return hash((self.field, self.shape, tuple(sorted(self.entries.items(), key=str))))

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()}, {self.field.label})"

    def transpose(self) -> SparseMatrix:
        data: dict[int, dict[int, Any]] = {}
        for r, row in self._data.items():
            for c, v in row.items():
                data.setdefault(c, {})[r] = v
        return SparseMatrix(self.field, self.cols, self.rows, data)

    @property
    def T(self) -> SparseMatrix:
        return self.transpose()

    def __matmul__(self, other: SparseMatrix) -> SparseMatrix:
        self._check_field(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.is_zero() or other.is_zero():
            return SparseMatrix.zeros(self.field, self.rows, other.cols)
        product = self.to_domain_matrix().matmul(other.to_domain_matrix())
        return SparseMatrix.from_domain_matrix(self.field, product)

    def _merge(self, other: SparseMatrix, sign: int) -> SparseMatrix:
        self._check_field(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        data = {r: dict(row) for r, row in self._data.items()}
        for r, row in other._data.items():
            target = data.setdefault(r, {})
            for c, v in row.items():
                target[c] = target.get(c, self.field.zero) + (v if sign > 0 else -v)
        return SparseMatrix(self.field, self.rows, self.cols, data)

    def __add__(self, other: SparseMatrix) -> SparseMatrix:
        return self._merge(other, 1)

    def __sub__(self, other: SparseMatrix) -> SparseMatrix:
        return self._merge(other, -1)

    def __neg__(self) -> SparseMatrix:
        return self.scale(-self.field.one)

    def scale(self, c) -> SparseMatrix:
        if not c:
            return SparseMatrix.zeros(self.field, self.rows, self.cols)
        data = {r: {k: c * v for k, v in row.items()} for r, row in self._data.items()}
        return SparseMatrix(self.field, self.rows, self.cols, data)

    def apply(self, v: Sequence) -> Vector:
        """Matrix-vector product."""
        if len(v) != self.cols:
            raise ValueError(f"vector of length {len(v)} for {self.shape} matrix")
        out = [self.field.zero] * self.rows
        for r, row in self._data.items():
            acc = self.field.zero
            for c, x in row.items():
                y = v[c]
                if y:
                    acc += x * y
            out[r] = acc
        return tuple(out)

    def kron(self, other: SparseMatrix) -> SparseMatrix:
        """Kronecker product; row (r, s) -> r * other.rows + s."""
        self._check_field(other)
        data: dict[int, dict[int, Any]] = {}
        for r, row in self._data.items():
            for s, orow in other._data.items():
                target = data.setdefault(r * other.rows + s, {})
                for c, v in row.items():
                    for d, w in orow.items():
                        target[c * other.cols + d] = v * w
        return SparseMatrix(self.field, self.rows * other.rows, self.cols * other.cols, data)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> SparseMatrix:
        col_index = {c: k for k, c in enumerate(cols)}
        data: dict[int, dict[int, Any]] = {}
        for new_r, r in enumerate(rows):
            row = self._data.get(r)
            if not row:
                continue
            kept = {col_index[c]: v for c, v in row.items() if c in col_index}
            if kept:
                data[new_r] = kept
        return SparseMatrix(self.field, len(rows), len(cols), data)

    def to_json(self) -> dict[str, Any]:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [
                [r, c, self.field.to_json_value(v)] for (r, c), v in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, field: Field, obj: Mapping[str, Any]) -> SparseMatrix:
        entries = {(int(r), int(c)): v for r, c, v in obj.get("entries", [])}
        return cls.from_entries(field, int(obj["rows"]), int(obj["cols"]), entries)


class BlockBuilder:
    """Accumulates blocks at offsets into one sparse matrix."""

    def __init__(self, field: Field, rows: int, cols: int) -> None:
        self.field = field
        self.rows = rows
        self.cols = cols
        self._data: dict[int, dict[int, Any]] = {}

    def add(self, row_offset: int, col_offset: int, block: SparseMatrix) -> None:
        for (r, c), v in block.entries.items():
            target = self._data.setdefault(row_offset + r, {})
            key = col_offset + c
            target[key] = target.get(key, self.field.zero) + v

    def build(self) -> SparseMatrix:
        return SparseMatrix(self.field, self.rows, self.cols, self._data)


def hstack(field: Field, rows: int, blocks: Sequence[SparseMatrix]) -> SparseMatrix:
    builder = BlockBuilder(field, rows, sum(b.cols for b in blocks))
    offset = 0
    for block in blocks:
        builder.add(0, offset, block)
        offset += block.cols
    return builder.build()


def vstack(field: Field, cols: int, blocks: Sequence[SparseMatrix]) -> SparseMatrix:
    builder = BlockBuilder(field, sum(b.rows for b in blocks), cols)
    offset = 0
    for block in blocks:
        builder.add(offset, 0, block)
        offset += block.rows
    return builder.build()


# ── elimination ──────────────────────────────────────────────────────────


def rref(m: SparseMatrix) -> tuple[SparseMatrix, list[int], int]:
    """Reduced row echelon form, pivot columns and rank."""
    if m.rows == 0 or m.cols == 0 or m.is_zero():
        return SparseMatrix.zeros(m.field, m.rows, m.cols), [], 0
    reduced, pivots = m.to_domain_matrix().rref()
    pivots = [int(p) for p in pivots]
    return SparseMatrix.from_domain_matrix(m.field, reduced), pivots, len(pivots)


def rank(m: SparseMatrix) -> int:
    return rref(m)[2]


def kernel_basis(m: SparseMatrix) -> list[Vector]:
    """Basis of the right null space, one vector per non-pivot column.

    The vector for free column f has a 1 in position f and the negated rref
    entries of column f in the pivot positions.
    """
    reduced, pivots, _ = rref(m)
    pivot_set = set(pivots)
    field = m.field
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = [field.zero] * m.cols
        v[free] = field.one
        for r, p in enumerate(pivots):
            entry = reduced.get(r, free)
            if entry:
                v[p] = -entry
        basis.append(tuple(v))
    return basis


def solve(m: SparseMatrix, b: Sequence) -> Vector | None:
    """Some x with m @ x == b, or None (no solution) when b is outside the
    column space."""
    if len(b) != m.rows:
        raise ValueError(f"right-hand side of length {len(b)} for {m.shape} matrix")
    field = m.field
    if is_zero_vector(b):
        return zero_vector(field, m.cols)
    augmented = hstack(field, m.rows, [m, SparseMatrix.from_columns(field, m.rows, [tuple(b)])])
    reduced, pivots, _ = rref(augmented)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [field.zero] * m.cols
    for r, p in enumerate(pivots):
        x[p] = reduced.get(r, m.cols)
    return tuple(x)


def inverse(m: SparseMatrix) -> SparseMatrix | None:
    """Inverse of a square matrix, or None when singular."""
    if m.rows != m.cols:
        raise ValueError(f"inverse of non-square {m.shape} matrix")
    n = m.rows
    field = m.field
    if n == 0:
        return SparseMatrix.zeros(field, 0, 0)
    reduced, pivots, r = rref(hstack(field, n, [m, SparseMatrix.identity(field, n)]))
    if r < n or pivots[n - 1] != n - 1:
        return None
    return reduced.submatrix(range(n), range(n, 2 * n))


def is_invertible(m: SparseMatrix) -> bool:
    return m.rows == m.cols and rank(m) == m.rows


# ── subspaces ────────────────────────────────────────────────────────────


class RowSpace:
    """Subspace of field^n held as a reduced echelon basis.

    Coordinates of a member v with respect to ``basis`` are simply the entries
    of v at the pivot columns.
    """

    __slots__ = ("field", "ambient", "basis", "pivots")

    def __init__(self, field: Field, ambient: int, basis: Sequence[Vector], pivots: Sequence[int]):
        self.field = field
        self.ambient = ambient
        self.basis = tuple(basis)
        self.pivots = tuple(pivots)

    @classmethod
    def span(cls, field: Field, ambient: int, vectors: Iterable[Sequence]) -> RowSpace:
        rows = [tuple(v) for v in vectors if any(v)]
        if not rows:
            return cls(field, ambient, (), ())
        reduced, pivots, r = rref(SparseMatrix.from_rows(field, ambient, rows))
        return cls(field, ambient, [reduced.row(k) for k in range(r)], pivots)

    @classmethod
    def full(cls, field: Field, ambient: int) -> RowSpace:
        return cls(
            field,
            ambient,
            [unit_vector(field, ambient, k) for k in range(ambient)],
            range(ambient),
        )

    @classmethod
    def zero(cls, field: Field, ambient: int) -> RowSpace:
        return cls(field, ambient, (), ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def is_full(self) -> bool:
        return self.dim == self.ambient

    def coords(self, v: Sequence) -> Vector:
        return tuple(v[p] for p in self.pivots)

    def from_coords(self, coords: Sequence) -> Vector:
        return combine(self.field, self.ambient, zip(coords, self.basis, strict=True))

    def reduce(self, v: Sequence) -> Vector:
        """v minus its projection along the pivots; zero iff v is a member."""
        out = list(v)
        for p, row in zip(self.pivots, self.basis, strict=True):
            c = out[p]
            if c:
                for idx, x in enumerate(row):
                    if x:
                        out[idx] -= c * x
        return tuple(out)

    def contains(self, v: Sequence) -> bool:
        return is_zero_vector(self.reduce(v))

    def contains_space(self, other: RowSpace) -> bool:
        return all(self.contains(v) for v in other.basis)

    def complement_indices(self) -> list[int]:
        pivot_set = set(self.pivots)
        return [c for c in range(self.ambient) if c not in pivot_set]

    def inclusion(self) -> SparseMatrix:
        """ambient x dim matrix whose columns are the basis."""
        return SparseMatrix.from_columns(self.field, self.ambient, self.basis)

    def coordinate_map(self) -> SparseMatrix:
        """dim x ambient matrix picking pivot entries (valid on members)."""
        return SparseMatrix(
            self.field,
            self.dim,
            self.ambient,
            {k: {p: self.field.one} for k, p in enumerate(self.pivots)},
        )

    def quotient_map(self) -> SparseMatrix:
        """(ambient - dim) x ambient matrix of field^n -> field^n / self.

        The quotient basis is the standard vectors at non-pivot columns.
        """
        free = self.complement_indices()
        data: dict[int, dict[int, Any]] = {}
        for k, c in enumerate(free):
            row = {c: self.field.one}
            for p, basis_row in zip(self.pivots, self.basis, strict=True):
                x = basis_row[c]
                if x:
                    row[p] = -x
            data[k] = row
        return SparseMatrix(self.field, len(free), self.ambient, data)

    def section(self) -> SparseMatrix:
        """ambient x (ambient - dim) lift of the quotient basis."""
        free = self.complement_indices()
        return SparseMatrix(
            self.field,
            self.ambient,
            len(free),
            {c: {k: self.field.one} for k, c in enumerate(free)},
        )


class Subquotient:
    """outer / inner for inner ⊆ outer ⊆ field^n (cohomology of a complex)."""

    __slots__ = ("outer", "inner", "_free")

    def __init__(self, outer: RowSpace, inner_vectors: Iterable[Sequence]) -> None:
        self.outer = outer
        self.inner = RowSpace.span(
            outer.field, outer.dim, (outer.coords(v) for v in inner_vectors)
        )
        self._free = self.inner.complement_indices()

    @property
    def field(self) -> Field:
        return self.outer.field

    @property
    def dim(self) -> int:
        return len(self._free)

    @property
    def representatives(self) -> list[Vector]:
        return [self.outer.basis[c] for c in self._free]

    def coords(self, v: Sequence) -> Vector:
        """Coordinates of the class of v (v must lie in ``outer``)."""
        reduced = self.inner.reduce(self.outer.coords(v))
        return tuple(reduced[c] for c in self._free)

    def map_matrix(self, target: Subquotient, f: SparseMatrix) -> SparseMatrix:
        """Matrix of the map induced by f between subquotients."""
        columns = [target.coords(f.apply(rep)) for rep in self.representatives]
        return SparseMatrix.from_columns(self.field, target.dim, columns)
