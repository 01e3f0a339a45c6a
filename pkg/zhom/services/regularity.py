"""AS / ASF regularity checkers, the module isomorphism test, local duality
and the equivalence suite.

Every check runs on the interior indices [lo + dMax + guard, hi - dMax - guard]
so that the resolutions and Ext targets it needs are complete inside the
window. The Gorenstein parameter is reported as l with j = i - l, together
with the raw concentration offset j - i.
"""

from __future__ import annotations

import itertools
import logging
import random
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Any

import sympy

from zhom.services.algebra import ZAlgebra
from zhom.services.conf import setting
from zhom.services.derived import (
    LocalCohomology,
    ext_from_resolution,
    ext_graded_quotient,
    ext_left_module,
    local_cohomology_of_free_row,
    quotient_row_resolution,
)
from zhom.services.errors import (
    ColimitNotStabilizedError,
    RequiresRegularError,
    WindowTooSmallError,
)
from zhom.services.linalg import SparseMatrix, is_invertible
from zhom.services.modules import (
    BimoduleRows,
    GradedModule,
    ModuleMorphism,
    bimodule_axiom_failures,
    dual_D,
    free_column,
    free_row,
    hom_space,
)
from zhom.services.resolutions import minimal_free_resolution, pd_of

logger = logging.getLogger(__name__)

AS = "AS"
ASF = "ASF"


@dataclass(frozen=True)
class Regular:
    d: int
    l: int

    @property
    def offset(self) -> int:
        """Raw concentration offset j - i (= -l)."""
        return -self.l

    def to_json(self) -> dict[str, Any]:
        return {"verdict": "Regular", "d": self.d, "l": self.l, "offset": self.offset}

    def __str__(self) -> str:
        return f"Regular(d={self.d}, l={self.l})"


@dataclass(frozen=True)
class Fails:
    reason: str
    witness: dict[str, Any] = dataclass_field(default_factory=dict, compare=False)

    def to_json(self) -> dict[str, Any]:
        return {"verdict": "Fails", "reason": self.reason, "witness": self.witness}

    def __str__(self) -> str:
        return f"Fails({self.reason})"


@dataclass
class RegularityReport:
    kind: str
    algebra: str
    verdict: Regular | Fails
    checked_range: list[int]
    per_index: dict[int, dict[str, Any]] = dataclass_field(default_factory=dict)
    caveats: list[str] = dataclass_field(default_factory=list)

    @property
    def regular(self) -> bool:
        return isinstance(self.verdict, Regular)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "algebra": self.algebra,
            **self.verdict.to_json(),
            "checkedRange": self.checked_range,
            "perIndex": {str(i): v for i, v in sorted(self.per_index.items())},
            "caveats": self.caveats,
        }


def interior_range(a: ZAlgebra, d_max: int | None = None, margin: int = 0) -> list[int]:
    """Indices whose checks stay inside the window; ``margin`` extra degrees
    are kept free at the top (colimit scans need room to stabilize)."""
    d_max = int(setting("ZHOM_DMAX") if d_max is None else d_max)
    w = a.window
    lo, hi = w.lo + d_max + w.guard, w.hi - d_max - w.guard - margin
    if lo > hi:
        raise WindowTooSmallError(
            f"window {w} leaves no interior indices for dMax={d_max}"
        )
    return list(range(lo, hi + 1))


def _per_index(fn: Callable[[int], Any], indices: Iterable[int]) -> list[Any]:
    indices = list(indices)
    threads = int(setting("ZHOM_THREADS") or 1)
    if threads <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, indices))


def _max_length(d_max: int) -> int:
    return max(int(setting("ZHOM_MAX_LENGTH")), d_max + 1)


# ── AS ───────────────────────────────────────────────────────────────────


def check_as_regular(a: ZAlgebra, d_max: int | None = None) -> RegularityReport:
    """pd e_iA_0 = d for every checked i and Ext^q(e_iA_0, e_jA) is
    one-dimensional exactly at (q, j) = (d, i - l)."""
    d_max = int(setting("ZHOM_DMAX") if d_max is None else d_max)
    indices = interior_range(a, d_max)
    length = _max_length(d_max)

    def examine(i: int) -> dict[str, Any]:
        res = quotient_row_resolution(a, i, 1, length)
        pd = pd_of(res)
        entry: dict[str, Any] = {"pd": pd.to_json()}
        if not pd.exact:
            return entry
        nonzero = []
        for q in range(pd.value + 1):
            for j in a.window.degrees:
                dim = ext_from_resolution(res, free_row(a, j), q).dim
                if dim:
                    nonzero.append([q, j, dim])
        entry["ext"] = nonzero
        return entry

    per_index = dict(zip(indices, _per_index(examine, indices)))
    report = RegularityReport(AS, a.name, Fails("unchecked"), indices, per_index)
    report.verdict = _as_verdict(per_index)
    logger.info("%s: AS check %s", a.name, report.verdict)
    return report


def _as_verdict(per_index: dict[int, dict[str, Any]]) -> Regular | Fails:
    pds = {}
    for i, entry in per_index.items():
        if not entry["pd"]["exact"]:
            return Fails("pd window-limited", {"index": i, "pdAtLeast": entry["pd"]["pd"]})
        pds[i] = entry["pd"]["pd"]
    if len(set(pds.values())) != 1:
        return Fails("nonuniform pd", {"pd": {str(i): v for i, v in pds.items()}})
    d = next(iter(pds.values()))
    offsets = {}
    for i, entry in per_index.items():
        ext = entry["ext"]
        if len(ext) != 1 or ext[0][0] != d or ext[0][2] != 1:
            return Fails("Ext not concentrated", {"index": i, "ext": ext})
        offsets[i] = ext[0][1] - i
    if len(set(offsets.values())) != 1:
        return Fails("nonuniform Gorenstein parameter", {"offset": {str(i): v for i, v in offsets.items()}})
    return Regular(d, -next(iter(offsets.values())))


# ── module isomorphism ───────────────────────────────────────────────────


@dataclass
class IsoVerdict:
    iso: bool
    reason: str
    witness: dict[int, SparseMatrix] | None = None
    certain: bool = True

    def to_json(self) -> dict[str, Any]:
        return {"iso": self.iso, "reason": self.reason, "certain": self.certain}

    def __str__(self) -> str:
        return f"{'Iso' if self.iso else 'NotIso'}({self.reason})"


def _invertible_everywhere(maps: dict[int, SparseMatrix]) -> bool:
    return all(is_invertible(m) for m in maps.values() if m.rows or m.cols)


def module_iso_test(
    m: GradedModule, n: GradedModule, degrees: Sequence[int] | None = None, *, seed: int = 0
) -> IsoVerdict:
    """Search the degree-0 homomorphisms m -> n for one invertible in every
    degree (degrees restricted to an interval when given)."""
    degs = list(degrees) if degrees is not None else list(m.window.degrees)
    for k in degs:
        if m.dim(k) != n.dim(k):
            return IsoVerdict(False, f"dimension mismatch at degree {k}")
    hom = hom_space(m, n, degs)
    active = [k for k in degs if m.dim(k)]
    if not active:
        return IsoVerdict(True, "both zero", {})
    if hom.dim == 0:
        return IsoVerdict(False, "no nonzero homomorphisms")
    field = m.field
    rng = random.Random(seed)
    for _ in range(int(setting("ZHOM_ISO_SAMPLES"))):
        coefficients = [field.random_element(rng) for _ in range(hom.dim)]
        maps = hom.element(coefficients)
        if _invertible_everywhere({k: maps[k] for k in active}):
            return IsoVerdict(True, "random homomorphism invertible", maps)
    if field.characteristic:
        p = field.characteristic
        if p**hom.dim <= int(setting("ZHOM_ISO_EXHAUSTIVE_LIMIT")):
            for values in itertools.product(range(p), repeat=hom.dim):
                maps = hom.element([field.convert(v) for v in values])
                if _invertible_everywhere({k: maps[k] for k in active}):
                    return IsoVerdict(True, "exhaustive search", maps)
            return IsoVerdict(False, "no invertible homomorphism (exhaustive)")
        return IsoVerdict(False, "no invertible homomorphism found", certain=False)
    return _symbolic_iso(hom, active)


def _symbolic_iso(hom, active: list[int]) -> IsoVerdict:
    """Over ℚ: a generic homomorphism is invertible iff no degree has an
    identically vanishing determinant."""
    symbols = sympy.symbols(f"c0:{hom.dim}")
    field = hom.source.field
    basis = hom.basis_maps()
    for k in active:
        size = hom.source.dim(k)
        generic = sympy.zeros(size, size)
        for c, maps in zip(symbols, basis, strict=True):
            for (r, col), v in maps[k].entries.items():
                generic[r, col] += c * field.domain.to_sympy(v)
        if sympy.expand(generic.det(method="berkowitz")) == 0:
            return IsoVerdict(False, f"every homomorphism is singular at degree {k}")
    return IsoVerdict(True, "generic homomorphism invertible (symbolic determinant)")


# ── ASF ──────────────────────────────────────────────────────────────────


def _contiguous_certified(lc: LocalCohomology, q: int) -> list[int]:
    certified = set(lc.certified_degrees(q))
    out = []
    for k in lc.module.window.degrees:
        if k not in certified:
            break
        out.append(k)
    return out


def check_asf_regular(a: ZAlgebra, d_max: int | None = None) -> RegularityReport:
    """sup pd e_jA_0 = d < ∞, R^qτ(e_jA) = 0 for q != d and
    R^dτ(e_jA) ≅ D(Ae_{j+l}) as graded right modules."""
    d_max = int(setting("ZHOM_DMAX") if d_max is None else d_max)
    indices = interior_range(a, d_max, margin=int(setting("ZHOM_STABILITY_RUNS")))
    length = _max_length(d_max)
    report = RegularityReport(ASF, a.name, Fails("unchecked"), indices)

    pds = {i: pd_of(quotient_row_resolution(a, i, 1, length)) for i in indices}
    for i, pd in pds.items():
        report.per_index[i] = {"pd": pd.to_json()}
    if not all(pd.exact for pd in pds.values()):
        for j in indices:
            torsion = local_cohomology_of_free_row(a, j, 0).dims(0)
            if torsion:
                report.verdict = Fails(
                    "R^0τ(e_jA) nonvanishing", {"index": j, "dims": _json_dims(torsion)}
                )
                return report
        i = next(i for i, pd in pds.items() if not pd.exact)
        report.verdict = Fails("pd window-limited", {"index": i, "pdAtLeast": pds[i].value})
        return report
    d = max(pd.value for pd in pds.values())

    def examine(j: int) -> dict[str, Any]:
        lc = local_cohomology_of_free_row(a, j, d)
        entry: dict[str, Any] = {"flagged": [list(c) for c in lc.flagged() if c[0] <= d]}
        for q in range(d):
            if lc.dims(q):
                entry["vanishingFails"] = {"q": q, "dims": _json_dims(lc.dims(q))}
                return entry
        top_dims = lc.dims(d)
        entry["dims"] = _json_dims(top_dims)
        if not top_dims:
            return entry
        top = max(top_dims)
        entry["top"] = top
        target = top
        degrees = _contiguous_certified(lc, d)
        if not degrees or degrees[-1] < top:
            entry["uncertifiedTop"] = True
            return entry
        mismatch = [k for k in degrees if top_dims.get(k, 0) != a.dim(k, target)]
        if mismatch:
            entry["dimMismatch"] = mismatch
            return entry
        try:
            verdict = module_iso_test(lc.as_module(d), dual_D(free_column(a, target)), degrees)
        except ColimitNotStabilizedError as exc:
            logger.info("%s: %s", a.name, exc)
            entry["uncertifiedTop"] = True
            return entry
        entry["iso"] = verdict.to_json()
        return entry

    for j, entry in zip(indices, _per_index(examine, indices)):
        report.per_index[j].update(entry)
        if entry["flagged"]:
            report.caveats.append(f"index {j}: unstabilized cells {entry['flagged']}")
    report.verdict = _asf_verdict(d, report.per_index)
    logger.info("%s: ASF check %s", a.name, report.verdict)
    return report


def _json_dims(dims: dict[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(dims.items())}


def _asf_verdict(d: int, per_index: dict[int, dict[str, Any]]) -> Regular | Fails:
    offsets = {}
    for j, entry in per_index.items():
        if "vanishingFails" in entry:
            q = entry["vanishingFails"]["q"]
            return Fails(f"R^{q}τ(e_jA) nonvanishing", {"index": j, **entry["vanishingFails"]})
        if "top" not in entry:
            return Fails(f"R^{d}τ(e_jA) vanishes", {"index": j})
        if entry.get("uncertifiedTop"):
            return Fails("colimit not stabilized", {"index": j})
        if "dimMismatch" in entry:
            return Fails("dimension mismatch with D(Ae_{j+l})", {"index": j, "degrees": entry["dimMismatch"]})
        if not entry["iso"]["iso"]:
            return Fails("not isomorphic to D(Ae_{j+l})", {"index": j, **entry["iso"]})
        offsets[j] = entry["top"] - j
    if len(set(offsets.values())) != 1:
        return Fails("nonuniform Gorenstein parameter", {"l": {str(j): v for j, v in offsets.items()}})
    return Regular(d, next(iter(offsets.values())))


# ── local duality ────────────────────────────────────────────────────────


def dualizing_rows(a: ZAlgebra, d: int) -> BimoduleRows:
    """R^dτ(A) as an A-A bimodule: row g is R^dτ(e_gA); b in A_{lg} acts by
    the map induced from left multiplication e_gA -> e_lA."""
    lcs = {g: local_cohomology_of_free_row(a, g, d) for g in a.window.degrees}
    induced: dict[tuple[int, int, int], dict[int, SparseMatrix]] = {}

    def left_action(l: int, g: int, t: int, i: int) -> SparseMatrix:
        key = (l, g, t)
        if key not in induced:
            source, target = lcs[g], lcs[l]
            mats = {k: a.left_mult(l, g, k, t) for k in a.window.degrees if a.dim(g, k)}
            f = ModuleMorphism(source.module, target.module, mats)
            induced[key] = source.induced_map(target, f, d)
        rows, cols = lcs[l].as_module(d).dim(i), lcs[g].as_module(d).dim(i)
        found = induced[key].get(i)
        if found is not None:
            return found
        if rows and cols:
            raise ColimitNotStabilizedError(
                f"R^{d}τ(e_{g}A) -> R^{d}τ(e_{l}A) at degree {i} outside certified stages"
            )
        return SparseMatrix.zeros(a.field, rows, cols)

    return BimoduleRows(a, a, lambda g: lcs[g].as_module(d), left_action, label=f"R^{d}τ(A)")


def dualizing_bimodule(a: ZAlgebra, d: int) -> BimoduleRows:
    """ω = D(R^dτ(A)), ω_{ig} = (R^dτ(e_gA)_i)^*."""
    return a.memoized(("omega", d), lambda: dual_D(dualizing_rows(a, d)))


@dataclass
class DualityCell:
    q: int
    degree: int
    lhs: int
    rhs: int

    @property
    def matched(self) -> bool:
        return self.lhs == self.rhs


@dataclass
class DualityReport:
    module: str
    d: int
    cells: list[DualityCell] = dataclass_field(default_factory=list)
    isos: dict[int, IsoVerdict] = dataclass_field(default_factory=dict)
    axiom_failures: list[str] = dataclass_field(default_factory=list)
    undetermined: list[int] = dataclass_field(default_factory=list)
    caveats: list[str] = dataclass_field(default_factory=list)

    @property
    def matched(self) -> bool:
        """Dimensions agree, ω passed its bimodule check and every q with
        nonzero cells got a successful module-level iso test."""
        if self.axiom_failures or self.undetermined:
            return False
        return all(c.matched for c in self.cells) and all(v.iso for v in self.isos.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "module": self.module,
            "d": self.d,
            "matched": self.matched,
            "cells": [[c.q, c.degree, c.lhs, c.rhs] for c in self.cells],
            "iso": {str(q): v.to_json() for q, v in sorted(self.isos.items())},
            "undetermined": self.undetermined,
            "axiomFailures": self.axiom_failures,
            "caveats": self.caveats,
        }


def verify_local_duality(a: ZAlgebra, m: GradedModule, report: RegularityReport) -> DualityReport:
    """Compare D R^qτ(M) with Ext^{d-q}(M, ω) degreewise and as left modules."""
    if not report.regular:
        raise RequiresRegularError(f"{a.name} is not regular ({report.verdict})")
    d = report.verdict.d
    omega = dualizing_bimodule(a, d)
    lcs = {g: local_cohomology_of_free_row(a, g, d) for g in a.window.degrees}
    lc_m = LocalCohomology(m, d)
    res = minimal_free_resolution(m, d + 1)
    out = DualityReport(m.label, d)
    for q in range(d + 1):
        p = d - q
        if not res.known(p + 1):
            out.caveats.append(f"q={q}: resolution of {m.label} window-limited")
            continue
        generator_degrees = set()
        for step in (p - 1, p, p + 1):
            if 0 <= step <= res.length:
                generator_degrees.update(res.generators(step))
        usable = []
        for i in lc_m.certified_degrees(q):
            if all(lcs[g].cells[(d, i)].certified for g in generator_degrees if (d, i) in lcs[g].cells):
                usable.append(i)
        rhs_module = ext_left_module(res, omega, p)
        lhs_module = dual_D(lc_m.as_module(q))
        nonzero = False
        for i in usable:
            lhs, rhs = lc_m.value(q, i) or 0, rhs_module.dim(i)
            if lhs or rhs:
                nonzero = True
                out.cells.append(DualityCell(q, i, lhs, rhs))
        skipped = sorted(set(a.window.degrees) - set(usable))
        if skipped:
            out.caveats.append(f"q={q}: degrees {skipped} not certified")
        if not nonzero:
            continue
        interval = longest_run(usable)
        if not any(lhs_module.dim(i) for i in interval):
            out.undetermined.append(q)
            out.caveats.append(f"q={q}: no certified interval carries D R^{q}τ({m.label})")
            continue
        try:
            failures = bimodule_axiom_failures(omega, interval, generator_degrees)
            if failures:
                out.axiom_failures.extend(failures)
                continue
            out.isos[q] = module_iso_test(lhs_module, rhs_module, interval)
        except ColimitNotStabilizedError as exc:
            out.undetermined.append(q)
            out.caveats.append(f"q={q}: {exc}")
    logger.info("%s: local duality %s", m.label, "matched" if out.matched else "MISMATCH")
    return out


def longest_run(degrees: Iterable[int]) -> list[int]:
    """Longest run of consecutive integers (the lowest one on ties)."""
    best: list[int] = []
    run: list[int] = []
    for k in sorted(set(degrees)):
        run = run + [k] if run and k == run[-1] + 1 else [k]
        if len(run) > len(best):
            best = run
    return best


# ── equivalence suite ────────────────────────────────────────────────────


@dataclass
class SuiteReport:
    algebra: str
    reports: dict[str, RegularityReport]
    generator_tables: dict[str, list[list[int]]] = dataclass_field(default_factory=dict)
    hypothesis_mismatches: list[list[int]] = dataclass_field(default_factory=list)

    @property
    def verdicts_agree(self) -> bool:
        verdicts = [r.verdict for r in self.reports.values()]
        if all(isinstance(v, Regular) for v in verdicts):
            return len(set(verdicts)) == 1
        return all(isinstance(v, Fails) for v in verdicts)

    @property
    def table_mismatches(self) -> list[list[int]]:
        """Generator-table rows [i, k, lhs, rhs] with lhs != rhs."""
        return [row for rows in self.generator_tables.values() for row in rows if row[2] != row[3]]

    @property
    def agree(self) -> bool:
        return self.verdicts_agree and not self.hypothesis_mismatches and not self.table_mismatches

    def to_json(self) -> dict[str, Any]:
        return {
            "algebra": self.algebra,
            "agree": self.agree,
            "verdictsAgree": self.verdicts_agree,
            "reports": {k: r.to_json() for k, r in sorted(self.reports.items())},
            "generatorTables": self.generator_tables,
            "hypothesisMismatches": self.hypothesis_mismatches,
        }


def _generator_table(a: ZAlgebra, verdict: Regular, indices: list[int]) -> list[list[int]]:
    """Rows [i, k, dim D R^dτ(e_iA)_k, dim (Ae_{i+l})_k] on certified degrees."""
    rows = []
    for i in indices:
        lc = local_cohomology_of_free_row(a, i, verdict.d)
        target = i + verdict.l
        if target not in a.window:
            continue
        for k in _contiguous_certified(lc, verdict.d):
            lhs, rhs = lc.value(verdict.d, k) or 0, a.dim(k, target)
            if lhs or rhs:
                rows.append([i, k, lhs, rhs])
    return rows


def verify_equivalence_suite(a: ZAlgebra, d_max: int | None = None) -> SuiteReport:
    opp = a.opposite
    reports = {
        "AS": check_as_regular(a, d_max),
        "ASF": check_asf_regular(a, d_max),
        "AS~": check_as_regular(opp, d_max),
        "ASF~": check_asf_regular(opp, d_max),
    }
    suite = SuiteReport(a.name, reports)
    if not suite.verdicts_agree:
        logger.warning("%s: regularity checks disagree: %s", a.name, {k: str(r.verdict) for k, r in reports.items()})
    verdict = reports["AS"].verdict
    if suite.verdicts_agree and isinstance(verdict, Regular):
        suite.generator_tables["A"] = _generator_table(a, verdict, reports["AS"].checked_range)
        suite.generator_tables["A~"] = _generator_table(opp, verdict, reports["AS~"].checked_range)
        suite.hypothesis_mismatches = _hypothesis_table(a, verdict.d, reports["AS"].checked_range)
        if suite.hypothesis_mismatches or suite.table_mismatches:
            logger.warning(
                "%s: mirror or generator tables disagree: %s %s",
                a.name,
                suite.hypothesis_mismatches[:5],
                suite.table_mismatches[:5],
            )
    return suite


def _hypothesis_table(a: ZAlgebra, d: int, indices: list[int]) -> list[list[int]]:
    """Cells where dim R^dτ(e_iA)_j differs from dim R^dτ(ẽ_{-j}Ã^op)_{-i}."""
    opp = a.opposite
    mismatches = []
    for i in indices:
        lc = local_cohomology_of_free_row(a, i, d)
        for j in lc.certified_degrees(d):
            if -j not in opp.window:
                continue
            mirror = local_cohomology_of_free_row(opp, -j, d)
            cell = mirror.cells.get((d, -i))
            if cell is None or not cell.certified:
                continue
            lhs, rhs = lc.value(d, j) or 0, cell.value or 0
            if lhs != rhs:
                mismatches.append([i, j, lhs, rhs])
    return mismatches


# ── corollaries ──────────────────────────────────────────────────────────


def check_truncation_ext_vanishing(
    a: ZAlgebra, verdict: Regular, indices: list[int], n_max: int = 3
) -> list[list[int]]:
    """[m, n, q, j, dim] cells where Ext^q(e_j(A/A_{>=n}), e_mA) != 0 with q != d."""
    failures = []
    for m in indices:
        target = free_row(a, m)
        for n in range(1, n_max + 1):
            for q in range(verdict.d + 2):
                if q == verdict.d:
                    continue
                for j, dim in ext_graded_quotient(a, n, target, q).items():
                    if dim:
                        failures.append([m, n, q, j, dim])
    return failures


def check_top_cohomology_shape(a: ZAlgebra, verdict: Regular, indices: list[int]) -> list[list[int]]:
    """[j, k, dim R^dτ(e_jA)_k, dim A_{k, j+l}] where the two differ."""
    failures = []
    for j in indices:
        lc = local_cohomology_of_free_row(a, j, verdict.d)
        top = j + verdict.l
        if top not in a.window:
            continue
        for k in _contiguous_certified(lc, verdict.d):
            lhs, rhs = lc.value(verdict.d, k) or 0, a.dim(k, top)
            if lhs != rhs:
                failures.append([j, k, lhs, rhs])
    return failures
