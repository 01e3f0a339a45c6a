"""Minimal free resolutions of left-bounded graded modules.

Generators are chosen degree by degree (ascending) as a complement of
(M·A_{>=1})_k, the complement being the non-pivot coordinates of the
reduced echelon form of the decomposables. Successive kernels are resolved
the same way until a kernel vanishes on the whole window or the window
runs out.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from zhom.services.algebra import ZAlgebra
from zhom.services.conf import setting
from zhom.services.errors import NotLeftBoundedError, ResolutionTruncatedError, ZhomError
from zhom.services.linalg import RowSpace, SparseMatrix, Vector, rank, solve, unit_vector
from zhom.services.modules import (
    BELOW,
    LEFT,
    FreeModule,
    GradedModule,
    ModuleMorphism,
    SubModule,
    kernel,
    to_opposite_module,
)

logger = logging.getLogger(__name__)

TERMINATED = "Terminated"
WINDOW_TRUNCATED = "WindowTruncated"


@dataclass(frozen=True)
class ResolutionStatus:
    kind: str
    at_step: int
    reason: str = ""

    @property
    def terminated(self) -> bool:
        return self.kind == TERMINATED

    def to_json(self) -> dict[str, Any]:
        if self.terminated:
            return {"status": TERMINATED, "length": self.at_step}
        return {"status": WINDOW_TRUNCATED, "atStep": self.at_step, "reason": self.reason}

    def __str__(self) -> str:
        if self.terminated:
            return TERMINATED
        return f"{WINDOW_TRUNCATED}(at step {self.at_step}, {self.reason})"


@dataclass(frozen=True)
class Cover:
    """Minimal generators of a module and the surjection from the free module
    on them. ``vectors[r]`` lies in the module's degree ``degrees[r]``."""

    module: GradedModule
    degrees: tuple[int, ...]
    vectors: tuple[Vector, ...]
    free: FreeModule

    def matrix(self, k: int) -> SparseMatrix:
        return self.free.map_matrix(self.vectors, self.module, k)

    def surjection(self) -> ModuleMorphism:
        return ModuleMorphism(
            self.free, self.module, {k: self.matrix(k) for k in self.module.window.degrees}
        )


def _require_left_bounded(m: GradedModule) -> None:
    if BELOW in m.truncated:
        raise NotLeftBoundedError(f"{m.label} is not left-bounded inside the window")


def decomposables(m: GradedModule, k: int) -> RowSpace:
    """(M·A_{>=1})_k, spanned by M_j·g for algebra generators g in A_{jk}."""
    a = m.algebra
    vectors = []
    for j, g in a.generators_into(k):
        if not m.dim(j):
            continue
        act = m.act(j, k, g)
        vectors.extend(act.columns())
    return RowSpace.span(m.field, m.dim(k), vectors)


def minimal_generators(m: GradedModule) -> Cover:
    """Nakayama cover ⊕_{j∈J} e_jA -> M."""
    _require_left_bounded(m)
    degrees: list[int] = []
    vectors: list[Vector] = []
    for k in m.window.degrees:
        if not m.dim(k):
            continue
        for c in decomposables(m, k).complement_indices():
            degrees.append(k)
            vectors.append(unit_vector(m.field, m.dim(k), c))
    free = FreeModule(m.algebra, degrees, label=f"F({m.label})")
    return Cover(m, tuple(degrees), tuple(vectors), free)


@dataclass
class ResolutionStep:
    index: int
    free: FreeModule
    images: tuple[Vector, ...]

    @property
    def generators(self) -> tuple[int, ...]:
        return self.free.generators


class FreeResolution:
    """F_L -> ... -> F_0 -> M, steps[p].images[r] = image of generator r of
    F_p in F_{p-1} (in M for p = 0)."""

    def __init__(self, module: GradedModule, steps: Sequence[ResolutionStep], status: ResolutionStatus):
        self.module = module
        self.steps = list(steps)
        self.status = status
        self._differentials: dict[tuple[int, int], SparseMatrix] = {}

    def __repr__(self) -> str:
        return f"FreeResolution({self.module.label!r}, {self.status})"

    @property
    def algebra(self) -> ZAlgebra:
        return self.module.algebra

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    @property
    def last_trusted_step(self) -> int:
        """Largest p whose term and differential are complete in the window."""
        if self.status.terminated:
            return self.length
        if self.status.reason == "guard":
            return self.status.at_step - 1
        return self.status.at_step

    def known(self, p: int) -> bool:
        return p < 0 or self.status.terminated or p <= self.last_trusted_step

    def require(self, p: int) -> None:
        if not self.known(p):
            raise ResolutionTruncatedError(
                f"step {p} of the resolution of {self.module.label} is beyond the window "
                f"({self.status})"
            )

    def generators(self, p: int) -> tuple[int, ...]:
        if 0 <= p < len(self.steps):
            return self.steps[p].generators
        self.require(p)
        return ()

    def term(self, p: int) -> FreeModule:
        if 0 <= p < len(self.steps):
            return self.steps[p].free
        self.require(p)
        return FreeModule(self.algebra, [], label=f"F{p}")

    def differential(self, p: int, k: int) -> SparseMatrix:
        """F_p,k -> F_{p-1},k for p >= 1; the augmentation F_0,k -> M_k for p = 0."""
        key = (p, k)
        found = self._differentials.get(key)
        if found is not None:
            return found
        source = self.term(p)
        target = self.module if p == 0 else self.term(p - 1)
        if p < len(self.steps):
            matrix = source.map_matrix(self.steps[p].images, target, k)
        else:
            matrix = SparseMatrix.zeros(self.module.field, target.dim(k), source.dim(k))
        self._differentials[key] = matrix
        return matrix

    def betti(self) -> dict[tuple[int, int], int]:
        table: Counter[tuple[int, int]] = Counter()
        for step in self.steps:
            for g in step.generators:
                table[(step.index, g)] += 1
        return dict(sorted(table.items()))

    def to_json(self) -> dict[str, Any]:
        return {
            "module": self.module.label,
            "algebra": self.algebra.name,
            **self.status.to_json(),
            "generators": [list(step.generators) for step in self.steps],
            "betti": [[p, j, n] for (p, j), n in self.betti().items()],
        }


def minimal_free_resolution(m: GradedModule, max_length: int | None = None) -> FreeResolution:
    """Resolve m (left modules are resolved as right modules over the opposite)."""
    if m.side == LEFT:
        m = to_opposite_module(m)
    _require_left_bounded(m)
    max_length = int(setting("ZHOM_MAX_LENGTH") if max_length is None else max_length)
    window = m.window
    steps: list[ResolutionStep] = []
    current: GradedModule = m
    previous: GradedModule = m
    p = 0
    while True:
        cover = minimal_generators(current)
        if isinstance(current, SubModule):
            images = tuple(
                current.spaces[g].from_coords(v) for g, v in zip(cover.degrees, cover.vectors)
            )
        else:
            images = cover.vectors
        free = FreeModule(m.algebra, cover.degrees, label=f"F{p}")
        steps.append(ResolutionStep(p, free, images))
        logger.info("%s: step %d generators %s", m.label, p, list(cover.degrees))
        if any(g > window.reliable_top for g in cover.degrees):
            status = ResolutionStatus(WINDOW_TRUNCATED, p, "guard")
            break
        differential = ModuleMorphism(
            free, previous, {k: free.map_matrix(images, previous, k) for k in window.degrees}
        )
        syzygies = kernel(differential)
        if syzygies.is_zero():
            status = ResolutionStatus(TERMINATED, p)
            break
        if p >= max_length:
            status = ResolutionStatus(WINDOW_TRUNCATED, p, "max_length")
            break
        previous, current = free, syzygies
        p += 1
    resolution = FreeResolution(m, steps, status)
    if setting("ZHOM_STRICT_CHECKS"):
        problems = audit_resolution(resolution)
        if problems:
            raise AssertionError("; ".join(problems[:5]))
    return resolution


@dataclass(frozen=True)
class ExactPd:
    value: int
    exact = True

    def to_json(self) -> dict[str, Any]:
        return {"pd": self.value, "exact": True}

    def __str__(self) -> str:
        return f"ExactPd({self.value})"


@dataclass(frozen=True)
class AtLeast:
    value: int
    exact = False

    def to_json(self) -> dict[str, Any]:
        return {"pd": self.value, "exact": False, "windowLimited": True}

    def __str__(self) -> str:
        return f"AtLeast({self.value}, window-limited)"


def pd_of(resolution: FreeResolution) -> ExactPd | AtLeast:
    """Projective dimension read off a resolution; the zero module has pd -1."""
    if resolution.status.terminated:
        if resolution.length == 0 and not resolution.steps[0].generators:
            return ExactPd(-1)
        return ExactPd(resolution.length)
    return AtLeast(resolution.status.at_step)


def projective_dimension(m: GradedModule, max_length: int | None = None) -> ExactPd | AtLeast:
    return pd_of(minimal_free_resolution(m, max_length))


def audit_resolution(resolution: FreeResolution) -> list[str]:
    """Minimality and exactness by exact rank computations."""
    problems = []
    label = resolution.module.label
    degrees = resolution.module.window.degrees
    last = resolution.length if resolution.status.terminated else resolution.last_trusted_step
    for p in range(1, min(last, resolution.length) + 1):
        step = resolution.steps[p]
        previous = resolution.term(p - 1)
        for r, g in enumerate(step.generators):
            for s, h in enumerate(previous.generators):
                if h == g and any(previous.component(step.images[r], s, g)):
                    problems.append(f"{label}: step {p} generator {r} not minimal")
    for k in degrees:
        if rank(resolution.differential(0, k)) != resolution.module.dim(k):
            problems.append(f"{label}: augmentation not onto in degree {k}")
        for p in range(0, last + 1):
            if p >= 1:
                composite = resolution.differential(p - 1, k) @ resolution.differential(p, k)
                if not composite.is_zero():
                    problems.append(f"{label}: d{p - 1}∘d{p} != 0 in degree {k}")
            if p == last and not resolution.status.terminated:
                continue
            kernel_dim = resolution.term(p).dim(k) - rank(resolution.differential(p, k))
            image_dim = rank(resolution.differential(p + 1, k))
            if kernel_dim != image_dim:
                problems.append(f"{label}: homology at step {p} in degree {k}")
    return problems


@dataclass
class ChainMap:
    """Lift F -> G of a module map; images[p][r] is the image of generator r
    of F_p in G_p."""

    source: FreeResolution
    target: FreeResolution
    images: list[tuple[Vector, ...]]

    def matrix(self, p: int, k: int) -> SparseMatrix:
        source, target = self.source.term(p), self.target.term(p)
        if p >= len(self.images):
            return SparseMatrix.zeros(source.field, target.dim(k), source.dim(k))
        return source.map_matrix(self.images[p], target, k)


def lift_chain_map(
    source: FreeResolution, target: FreeResolution, f: ModuleMorphism, up_to: int
) -> ChainMap:
    """Comparison theorem: lift f: M -> N to F -> G through step ``up_to``."""
    images: list[tuple[Vector, ...]] = []
    for p in range(up_to + 1):
        if not (source.known(p) and target.known(p)) or p > source.length:
            break
        step = source.steps[p]
        lifted = []
        for r, g in enumerate(step.generators):
            if p == 0:
                wanted = f.at(g).apply(step.images[r])
            else:
                below = source.term(p - 1).map_matrix(images[p - 1], target.term(p - 1), g)
                wanted = below.apply(step.images[r])
            found = solve(target.differential(p, g), wanted)
            if found is None:
                raise ZhomError(f"map into {target.module.label} does not lift at step {p}")
            lifted.append(found)
        images.append(tuple(lifted))
    return ChainMap(source, target, images)


def betti_rows(resolution: FreeResolution) -> list[list[int]]:
    """Macaulay-style table: row r lists betti(p, j) with j - p = r + shift."""
    betti = resolution.betti()
    if not betti:
        return []
    offsets = [j - p for (p, j) in betti]
    lo, hi = min(offsets), max(offsets)
    width = resolution.length + 1
    return [[betti.get((p, p + r), 0) for p in range(width)] for r in range(lo, hi + 1)]
