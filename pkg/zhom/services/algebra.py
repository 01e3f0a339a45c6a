"""Connected ℤ-algebras on a finite degree window.

A ``ZAlgebra`` stores, for lo <= i <= j <= hi, the dimension of A_{ij} and the
structure constants of A_{ij} x A_{jk} -> A_{ik}, keyed sparsely by basis
index: ``mult[(i, j, k)][(s, t)] = {u: coefficient}``.

Constructors: the trivial algebra K, polynomial algebras, algebras presented
by generators in adjacent degrees modulo relations (computed degreewise by
exact linear algebra), and the index-flipped opposite.
"""

from __future__ import annotations

import itertools
import logging
import random
import threading
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property
from math import comb, prod
from typing import Any

from sympy.polys.monomials import monomial_mul
from sympy.polys.orderings import lex

from zhom.services.errors import (
    IndexOutsideWindowError,
    InvalidRelationDegreeError,
    RelationOutsideTensorSpaceError,
    WindowTooSmallError,
)
from zhom.services.field import Field
from zhom.services.linalg import RowSpace, SparseMatrix, Vector, unit_vector

logger = logging.getLogger(__name__)

DEFAULT_GUARD = 2


@dataclass(frozen=True)
class Window:
    lo: int
    hi: int
    guard: int = DEFAULT_GUARD

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise WindowTooSmallError(f"empty window [{self.lo}, {self.hi}]")
        if self.guard < 0 or self.guard > self.hi - self.lo:
            raise WindowTooSmallError(
                f"guard {self.guard} does not fit window [{self.lo}, {self.hi}]"
            )

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def width(self) -> int:
        return self.hi - self.lo

    @property
    def reliable_top(self) -> int:
        """Highest degree that may carry a termination claim."""
        return self.hi - self.guard

    def __contains__(self, degree: object) -> bool:
        return isinstance(degree, int) and self.lo <= degree <= self.hi

    def require(self, degree: int) -> None:
        if degree not in self:
            raise IndexOutsideWindowError(f"degree {degree} outside [{self.lo}, {self.hi}]")

    def flipped(self) -> Window:
        return Window(-self.hi, -self.lo, self.guard)

    def to_json(self) -> dict[str, int]:
        return {"lo": self.lo, "hi": self.hi, "guard": self.guard}

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}] guard {self.guard}"


MultTensor = dict[tuple[int, int], dict[int, Any]]


class ZAlgebra:
    """Connected ℤ-algebra with A_{ii} = k on a window.

    Instances are treated as immutable; derived data (multiplication
    matrices, generator bases, cached resolutions) lives in private caches.
    """

    def __init__(
        self,
        window: Window,
        field: Field,
        dims: Mapping[tuple[int, int], int],
        mult: Mapping[tuple[int, int, int], Mapping[tuple[int, int], Mapping[int, Any]]],
        *,
        name: str = "",
    ) -> None:
        self.window = window
        self.field = field
        self.name = name or "algebra"
        self.dims: dict[tuple[int, int], int] = {key: int(d) for key, d in dims.items()}
        self.mult: dict[tuple[int, int, int], MultTensor] = {}
        for key, tensor in mult.items():
            clean: MultTensor = {}
            for pair, vec in tensor.items():
                kept = {int(u): field.convert(v) for u, v in vec.items()}
                kept = {u: v for u, v in kept.items() if v}
                if kept:
                    clean[(int(pair[0]), int(pair[1]))] = kept
            if clean:
                self.mult[tuple(int(x) for x in key)] = clean
        self._right: dict[tuple[int, int, int], list[SparseMatrix]] = {}
        self._left: dict[tuple[int, int, int], list[SparseMatrix]] = {}
        self._generators: dict[tuple[int, int], list[Vector]] = {}
        self._opposite: ZAlgebra | None = None
        self.memo: dict[Any, Any] = {}
        self._memo_lock = threading.Lock()

    def __repr__(self) -> str:
        return f"ZAlgebra({self.name!r}, {self.window}, {self.field.label})"

    # ── components ────────────────────────────────────────────────────────

    def memoized(self, key: Any, build: Callable[[], Any]) -> Any:
        """Shared cache for derived objects (resolutions, colimits, ω).

        ``build`` runs outside the lock; when two workers race on one key the
        first stored value wins.
        """
        with self._memo_lock:
            if key in self.memo:
                return self.memo[key]
        value = build()
        with self._memo_lock:
            return self.memo.setdefault(key, value)

    def dim(self, i: int, j: int) -> int:
        if i > j or i not in self.window or j not in self.window:
            return 0
        return self.dims.get((i, j), 0)

    def unit(self, i: int) -> Vector:
        return unit_vector(self.field, 1, 0)

    def zero(self, i: int, j: int) -> Vector:
        return (self.field.zero,) * self.dim(i, j)

    def basis(self, i: int, j: int) -> list[Vector]:
        n = self.dim(i, j)
        return [unit_vector(self.field, n, s) for s in range(n)]

    def product(self, i: int, j: int, k: int, a: Sequence, b: Sequence) -> Vector:
        """a * b for a in A_{ij}, b in A_{jk}."""
        out = [self.field.zero] * self.dim(i, k)
        for (s, t), vec in self.mult.get((i, j, k), {}).items():
            c = a[s] * b[t] if a[s] and b[t] else None
            if c:
                for u, v in vec.items():
                    out[u] += c * v
        return tuple(out)

    def _split(self, i: int, j: int, k: int) -> None:
        n_ij, n_jk, n_ik = self.dim(i, j), self.dim(j, k), self.dim(i, k)
        right: list[dict[int, dict[int, Any]]] = [{} for _ in range(n_jk)]
        left: list[dict[int, dict[int, Any]]] = [{} for _ in range(n_ij)]
        for (s, t), vec in self.mult.get((i, j, k), {}).items():
            for u, v in vec.items():
                right[t].setdefault(u, {})[s] = v
                left[s].setdefault(u, {})[t] = v
        self._right[(i, j, k)] = [SparseMatrix(self.field, n_ik, n_ij, d) for d in right]
        self._left[(i, j, k)] = [SparseMatrix(self.field, n_ik, n_jk, d) for d in left]

    def right_mult(self, i: int, j: int, k: int, t: int) -> SparseMatrix:
        """Matrix of A_{ij} -> A_{ik}, x -> x * b_t (b_t basis of A_{jk})."""
        if (i, j, k) not in self._right:
            self._split(i, j, k)
        return self._right[(i, j, k)][t]

    def left_mult(self, i: int, j: int, k: int, s: int) -> SparseMatrix:
        """Matrix of A_{jk} -> A_{ik}, y -> b_s * y (b_s basis of A_{ij})."""
        if (i, j, k) not in self._left:
            self._split(i, j, k)
        return self._left[(i, j, k)][s]

    def right_mult_by(self, i: int, j: int, k: int, b: Sequence) -> SparseMatrix:
        total = SparseMatrix.zeros(self.field, self.dim(i, k), self.dim(i, j))
        for t, c in enumerate(b):
            if c:
                total = total + self.right_mult(i, j, k, t).scale(c)
        return total

    def left_mult_by(self, i: int, j: int, k: int, a: Sequence) -> SparseMatrix:
        total = SparseMatrix.zeros(self.field, self.dim(i, k), self.dim(j, k))
        for s, c in enumerate(a):
            if c:
                total = total + self.left_mult(i, j, k, s).scale(c)
        return total

    def generator_basis(self, i: int, j: int) -> list[Vector]:
        """Basis of a complement of the decomposables sum_{i<m<j} A_{im} A_{mj}.

        Every element of A_{ij} with i < j is a sum of products whose last
        factor is one of these generators.
        """
        if (i, j) in self._generators:
            return self._generators[(i, j)]
        n = self.dim(i, j)
        if i >= j or n == 0:
            gens: list[Vector] = []
        else:
            products = []
            for m in range(i + 1, j):
                for vec in self.mult.get((i, m, j), {}).values():
                    products.append(
                        tuple(vec.get(u, self.field.zero) for u in range(n))
                    )
            decomposables = RowSpace.span(self.field, n, products)
            gens = [unit_vector(self.field, n, c) for c in decomposables.complement_indices()]
        self._generators[(i, j)] = gens
        return gens

    @cached_property
    def generator_pairs(self) -> tuple[tuple[int, int], ...]:
        """Degree pairs (i, j), i < j, carrying algebra generators."""
        pairs = []
        for i in self.window.degrees:
            for j in range(i + 1, self.window.hi + 1):
                if self.generator_basis(i, j):
                    pairs.append((i, j))
        return tuple(pairs)

    def generators_into(self, j: int) -> list[tuple[int, Vector]]:
        """(source degree, generator) pairs for generators of A_{ij}, i < j."""
        return [
            (i, g)
            for i in range(self.window.lo, j)
            for g in self.generator_basis(i, j)
        ]

    @property
    def opposite(self) -> ZAlgebra:
        if self._opposite is None:
            opp = make_opposite(self)
            opp._opposite = self
            self._opposite = opp
        return self._opposite

    def same_structure(self, other: ZAlgebra) -> bool:
        """Componentwise equality (window, field, dims, structure constants)."""
        if self.window != other.window or self.field != other.field:
            return False
        pairs = {(i, j) for i in self.window.degrees for j in self.window.degrees if i <= j}
        if any(self.dim(i, j) != other.dim(i, j) for i, j in pairs):
            return False
        return self.mult == other.mult


# ── validation ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Violation:
    axiom: str
    degrees: tuple[int, ...]
    basis: tuple[int, ...] = ()
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "degrees": list(self.degrees),
            "basis": list(self.basis),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ValidationReport:
    algebra: str
    violations: tuple[Violation, ...] = dataclass_field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def first(self, axiom: str | None = None) -> Violation | None:
        for v in self.violations:
            if axiom is None or v.axiom == axiom:
                return v
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra,
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
        }


def _grading_violations(a: ZAlgebra) -> list[Violation]:
    w = a.window
    found = []
    for (i, j), d in sorted(a.dims.items()):
        if i not in w or j not in w:
            found.append(Violation("grading", (i, j), detail="component outside window"))
        elif i > j and d:
            found.append(Violation("grading", (i, j), detail="nonzero component with i > j"))
        elif d < 0:
            found.append(Violation("grading", (i, j), detail="negative dimension"))
    for i in w.degrees:
        for j in range(i, w.hi + 1):
            if (i, j) not in a.dims:
                found.append(Violation("grading", (i, j), detail="missing component"))
    for (i, j, k), tensor in sorted(a.mult.items()):
        if not (i <= j <= k and i in w and k in w):
            found.append(Violation("grading", (i, j, k), detail="tensor off the window"))
            continue
        for (s, t), vec in sorted(tensor.items()):
            bad_out = [u for u in vec if not 0 <= u < a.dim(i, k)]
            if not 0 <= s < a.dim(i, j) or not 0 <= t < a.dim(j, k) or bad_out:
                found.append(
                    Violation("grading", (i, j, k), (s, t), detail="basis index out of range")
                )
    return found


def _identity_violations(a: ZAlgebra) -> list[Violation]:
    found = []
    for i in a.window.degrees:
        if a.dim(i, i) != 1:
            found.append(
                Violation("connected", (i, i), detail=f"dim A_ii = {a.dim(i, i)}, expected 1")
            )
            continue
        e = a.unit(i)
        for j in range(i, a.window.hi + 1):
            for t, b in enumerate(a.basis(i, j)):
                if a.product(i, i, j, e, b) != b:
                    found.append(Violation("identity", (i, i, j), (0, t), detail="e_i * b != b"))
        for h in range(a.window.lo, i + 1):
            if a.dim(h, h) != 1:
                continue
            for s, b in enumerate(a.basis(h, i)):
                if a.product(h, i, i, b, e) != b:
                    found.append(Violation("identity", (h, i, i), (s, 0), detail="b * e_i != b"))
    return found


def _associativity_violations(a: ZAlgebra) -> list[Violation]:
    found = []
    degrees = list(a.window.degrees)
    for i, j, k, m in itertools.combinations(degrees, 4):
        if not (a.dim(i, j) and a.dim(j, k) and a.dim(k, m)):
            continue
        for t, b in enumerate(a.basis(j, k)):
            for u, c in enumerate(a.basis(k, m)):
                bc = a.product(j, k, m, b, c)
                lhs = a.right_mult(i, k, m, u) @ a.right_mult(i, j, k, t)
                rhs = a.right_mult_by(i, j, m, bc)
                if lhs == rhs:
                    continue
                diff = lhs - rhs
                bad = min(col for (_, col) in diff.entries)
                found.append(
                    Violation(
                        "associativity",
                        (i, j, k, m),
                        (bad, t, u),
                        detail="(ab)c != a(bc)",
                    )
                )
    return found


def validate(a: ZAlgebra) -> ValidationReport:
    """Check grading, connectedness, the identity law and associativity.

    Violations are returned as data, ordered by axiom then by degrees.
    """
    violations = _grading_violations(a)
    if not violations:
        violations += _identity_violations(a)
        violations += _associativity_violations(a)
    order = {"grading": 0, "connected": 1, "identity": 2, "associativity": 3}
    violations.sort(key=lambda v: (order.get(v.axiom, 9), v.degrees, v.basis))
    if violations:
        logger.info("%s: %d axiom violation(s)", a.name, len(violations))
    return ValidationReport(a.name, tuple(violations))


# ── constructors ─────────────────────────────────────────────────────────


def make_trivial(window: Window, field: Field | None = None) -> ZAlgebra:
    """The algebra K: A_{ii} = k, all other components zero."""
    field = field or Field.rational()
    dims = {(i, j): int(i == j) for i in window.degrees for j in range(i, window.hi + 1)}
    mult = {(i, i, i): {(0, 0): {0: field.one}} for i in window.degrees}
    return ZAlgebra(window, field, dims, mult, name="trivial")


def _monomials(n: int, degree: int) -> list[tuple[int, ...]]:
    exps = []
    for combo in itertools.combinations_with_replacement(range(n), degree):
        exps.append(tuple(combo.count(v) for v in range(n)))
    return sorted(exps, key=lex, reverse=True)


def make_poly(n: int, window: Window, field: Field | None = None) -> ZAlgebra:
    """ℤ-algebra of k[x_1..x_n]: A_{ij} = monomials of degree j - i in
    lexicographic order (x_1^d first)."""
    if n < 1:
        raise ValueError("poly needs at least one variable")
    field = field or Field.rational()
    width = window.width
    monos = {d: _monomials(n, d) for d in range(width + 1)}
    index = {d: {m: s for s, m in enumerate(ms)} for d, ms in monos.items()}
    dims = {
        (i, j): comb(j - i + n - 1, n - 1)
        for i in window.degrees
        for j in range(i, window.hi + 1)
    }
    tensors: dict[tuple[int, int], MultTensor] = {}
    for d1 in range(width + 1):
        for d2 in range(width + 1 - d1):
            tensors[(d1, d2)] = {
                (s, t): {index[d1 + d2][monomial_mul(m1, m2)]: field.one}
                for s, m1 in enumerate(monos[d1])
                for t, m2 in enumerate(monos[d2])
            }
    mult = {}
    for i in window.degrees:
        for j in range(i, window.hi + 1):
            for k in range(j, window.hi + 1):
                mult[(i, j, k)] = tensors[(j - i, k - j)]
    return ZAlgebra(window, field, dims, mult, name=f"poly({n})")


def _decode_word(index: int, radices: Sequence[int]) -> tuple[int, ...]:
    """Row-major tensor index -> generator word (first factor most significant)."""
    word = []
    for radix in reversed(radices):
        index, letter = divmod(index, radix)
        word.append(letter)
    return tuple(reversed(word))


def make_adjacent_presentation(
    gens: Mapping[int, int],
    rels: Mapping[tuple[int, int], Sequence[Sequence[Any]]],
    window: Window,
    field: Field | None = None,
    *,
    name: str = "presentation",
) -> ZAlgebra:
    """Algebra generated by V_{i,i+1} (dimension ``gens[i]``) modulo relations.

    ``rels[(a, b)]`` lists vectors in V_{a,a+1} ⊗ ... ⊗ V_{b-1,b}, indexed
    row-major by generator words. A_{ij} is built one degree at a time as
    (A_{i,j-1} ⊗ V_{j-1,j}) / (images of relations ending at j); the quotient
    basis is the set of non-pivot coordinates, so every basis element of A_{ij}
    is a normal word.
    """
    field = field or Field.rational()
    w = window
    g = {m: int(gens.get(m, 0)) for m in range(w.lo, w.hi)}
    relations: dict[int, list[tuple[int, list[tuple[tuple[int, ...], Any]]]]] = {}
    for (a, b), vectors in sorted(rels.items()):
        if b - a < 2:
            raise InvalidRelationDegreeError(f"relation degree ({a}, {b}) must span >= 2 steps")
        if a not in w or b not in w:
            raise InvalidRelationDegreeError(f"relation degree ({a}, {b}) outside window {w}")
        radices = [g[m] for m in range(a, b)]
        size = prod(radices)
        for vec in vectors:
            if len(vec) != size:
                raise RelationOutsideTensorSpaceError(
                    f"relation at ({a}, {b}) has {len(vec)} coordinates, "
                    f"tensor space has {size}"
                )
            terms = [
                (_decode_word(idx, radices), field.convert(c))
                for idx, c in enumerate(vec)
                if field.convert(c)
            ]
            if terms:
                relations.setdefault(b, []).append((a, terms))

    dims: dict[tuple[int, int], int] = {}
    # append[(i, m)][letter]: A_{im} -> A_{i,m+1}; parent[(i, m+1)][u'] = (u, letter)
    append: dict[tuple[int, int], list[SparseMatrix]] = {}
    parent: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for i in w.degrees:
        dims[(i, i)] = 1
        for m in range(i, w.hi):
            d_im, g_m = dims[(i, m)], g[m]
            size = d_im * g_m
            images = []
            for a, terms in relations.get(m + 1, []):
                if a < i:
                    continue
                for s in range(dims[(i, a)]):
                    image = [field.zero] * size
                    for word, c in terms:
                        x = unit_vector(field, dims[(i, a)], s)
                        for offset, letter in enumerate(word[:-1]):
                            x = append[(i, a + offset)][letter].apply(x)
                        for u, xu in enumerate(x):
                            if xu:
                                image[u * g_m + word[-1]] += c * xu
                    images.append(tuple(image))
            killed = RowSpace.span(field, size, images)
            quotient = killed.quotient_map()
            append[(i, m)] = [
                quotient.submatrix(range(quotient.rows), [u * g_m + letter for u in range(d_im)])
                for letter in range(g_m)
            ]
            parent[(i, m + 1)] = [divmod(c, g_m) for c in killed.complement_indices()]
            dims[(i, m + 1)] = quotient.rows

    mult: dict[tuple[int, int, int], MultTensor] = {}
    for i in w.degrees:
        for j in range(i, w.hi + 1):
            # images[t] = b_s * (word t of A_{jk}) for every s, grown one letter at a time
            current = [[unit_vector(field, dims[(i, j)], s)] for s in range(dims[(i, j)])]
            for k in range(j, w.hi + 1):
                tensor: MultTensor = {}
                for s, row in enumerate(current):
                    for t, vec in enumerate(row):
                        nonzero = {u: v for u, v in enumerate(vec) if v}
                        if nonzero:
                            tensor[(s, t)] = nonzero
                mult[(i, j, k)] = tensor
                if k == w.hi:
                    break
                current = [
                    [append[(i, k)][letter].apply(row[u]) for u, letter in parent[(j, k + 1)]]
                    for row in current
                ]
    logger.info("%s: built presentation on %s", name, w)
    return ZAlgebra(w, field, dims, mult, name=name)


def make_opposite(a: ZAlgebra) -> ZAlgebra:
    """The index-flipped opposite: (Ã^op)_{ij} = A_{-j,-i}, f·g := g f."""
    w = a.window.flipped()
    dims = {(i, j): a.dim(-j, -i) for i in w.degrees for j in range(i, w.hi + 1)}
    mult: dict[tuple[int, int, int], MultTensor] = {}
    for (i, j, k), tensor in a.mult.items():
        mult[(-k, -j, -i)] = {(t, s): dict(vec) for (s, t), vec in tensor.items()}
    name = a.name[3:-1] if a.name.startswith("op(") else f"op({a.name})"
    return ZAlgebra(w, a.field, dims, mult, name=name)


# ── built-in presentations ───────────────────────────────────────────────


def _uniform(window: Window, count: int) -> dict[int, int]:
    return {m: count for m in range(window.lo, window.hi)}


def _quadratic(window: Window, vectors: Sequence[Sequence[Any]]) -> dict:
    return {(i, i + 2): list(vectors) for i in range(window.lo, window.hi - 1)}


def make_skew(q: Any, window: Window, field: Field | None = None) -> ZAlgebra:
    """Skew polynomial ℤ-algebra: y x = q x y (basis x, y of each V)."""
    field = field or Field.rational()
    qv = field.convert(q)
    # tensor basis: xx, xy, yx, yy
    relation = [field.zero, -qv, field.one, field.zero]
    return make_adjacent_presentation(
        _uniform(window, 2),
        _quadratic(window, [relation]),
        window,
        field,
        name=f"skew({field.format(qv)})",
    )


def make_jordan(window: Window, field: Field | None = None) -> ZAlgebra:
    """Jordan plane: y x = x y + x x."""
    field = field or Field.rational()
    relation = [-field.one, -field.one, field.one, field.zero]
    return make_adjacent_presentation(
        _uniform(window, 2), _quadratic(window, [relation]), window, field, name="jordan"
    )


def make_nil(window: Window, field: Field | None = None) -> ZAlgebra:
    """One generator per step with x x = 0."""
    field = field or Field.rational()
    return make_adjacent_presentation(
        _uniform(window, 1), _quadratic(window, [[field.one]]), window, field, name="nil"
    )


def make_free(generators: int, window: Window, field: Field | None = None) -> ZAlgebra:
    field = field or Field.rational()
    return make_adjacent_presentation(
        _uniform(window, generators), {}, window, field, name=f"free({generators})"
    )


def random_adjacent_presentation(
    seed: int,
    window: Window,
    field: Field | None = None,
    *,
    max_generators: int = 2,
    bound: int = 3,
) -> ZAlgebra:
    """Translation-invariant quadratic presentation with random relations."""
    field = field or Field.rational()
    rng = random.Random(seed)
    count = rng.randint(1, max_generators)
    size = count * count
    n_rel = rng.randint(0, size)
    vectors = [
        [field.convert(rng.randint(-bound, bound)) for _ in range(size)] for _ in range(n_rel)
    ]
    return make_adjacent_presentation(
        _uniform(window, count),
        _quadratic(window, vectors),
        window,
        field,
        name=f"random({seed})",
    )


BUILTINS = ("trivial", "poly", "skew", "jordan", "nil", "free")


def make_builtin(
    name: str,
    params: Mapping[str, Any] | None,
    window: Window,
    field: Field | None = None,
) -> ZAlgebra:
    """Build a named algebra; ``params`` carries n (poly), q (skew), g (free)."""
    params = dict(params or {})
    field = field or Field.rational()
    if name == "trivial":
        return make_trivial(window, field)
    if name == "poly":
        return make_poly(int(params.get("n", 1)), window, field)
    if name == "skew":
        return make_skew(params.get("q", 1), window, field)
    if name == "jordan":
        return make_jordan(window, field)
    if name == "nil":
        return make_nil(window, field)
    if name == "free":
        return make_free(int(params.get("g", 1)), window, field)
    raise KeyError(f"unknown builtin algebra {name!r} (choose from {', '.join(BUILTINS)})")


def algebra_to_payload(a: ZAlgebra) -> dict[str, Any]:
    """Structure-constant payload (dims + sparse mult triples), deterministic."""
    f = a.field
    dims = [
        [i, j, a.dim(i, j)]
        for i in a.window.degrees
        for j in range(i, a.window.hi + 1)
    ]
    mult = []
    for (i, j, k), tensor in sorted(a.mult.items()):
        for (s, t), vec in sorted(tensor.items()):
            for u, v in sorted(vec.items()):
                mult.append([i, j, k, s, t, u, f.to_json_value(v)])
    return {"dims": dims, "mult": mult}
