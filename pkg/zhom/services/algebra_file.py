"""Algebra definition files and module specs.

An algebra file is a JSON object::

    {
      "schemaVersion": 1,
      "name": "poly2",
      "field": "Q" | {"GFp": 7},
      "window": {"lo": 0, "hi": 8, "guard": 2},
      "mode": "structure_constants" | "adjacent_presentation" | "builtin",
      "payload": {...}
    }

Payloads:

* ``structure_constants``: ``{"dims": [[i, j, d], ...],
  "mult": [[i, j, k, s, t, u, c], ...]}`` (units included);
* ``adjacent_presentation``: ``{"generators": [[i, dim V_{i,i+1}], ...],
  "relations": [{"from": a, "to": b, "vectors": [[c, ...], ...]}, ...]}``;
* ``builtin``: ``{"name": "poly", "params": {"n": 2}}``.

Coefficients are ints or ``"p/q"`` strings.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from zhom.services.algebra import (
    BUILTINS,
    Window,
    ZAlgebra,
    algebra_to_payload,
    make_adjacent_presentation,
    make_builtin,
)
from zhom.services.conf import setting
from zhom.services.errors import InvalidFieldError, IoError, ParseError, ZhomError
from zhom.services.field import Field
from zhom.services.modules import (
    GradedModule,
    free_column,
    free_row,
    module_from_json,
    truncation_quotient_row,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STRUCTURE_CONSTANTS = "structure_constants"
ADJACENT_PRESENTATION = "adjacent_presentation"
BUILTIN = "builtin"
MODES = (STRUCTURE_CONSTANTS, ADJACENT_PRESENTATION, BUILTIN)


@dataclass(frozen=True)
class AlgebraFile:
    name: str
    field: Field
    window: Window
    mode: str
    payload: dict[str, Any]
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict[str, Any]:
        return {
            "schemaVersion": self.schema_version,
            "name": self.name,
            "field": self.field.to_json(),
            "window": self.window.to_json(),
            "mode": self.mode,
            "payload": self.payload,
        }

    @property
    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def build(self) -> ZAlgebra:
        try:
            if self.mode == STRUCTURE_CONSTANTS:
                return _from_structure_constants(self)
            if self.mode == ADJACENT_PRESENTATION:
                return _from_presentation(self)
            params = self.payload.get("params", {})
            a = make_builtin(self.payload["name"], params, self.window, self.field)
        except KeyError as exc:
            raise ParseError(str(exc).strip("'\""), path="$.payload") from exc
        return a


def _require(obj: Mapping[str, Any], key: str, kind: type | tuple[type, ...], path: str) -> Any:
    if key not in obj:
        raise ParseError(f"missing key {key!r}", path=path)
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ParseError(f"{key!r} has the wrong type", path=f"{path}.{key}")
    return value


def _parse_window(obj: Any) -> Window:
    if not isinstance(obj, dict):
        raise ParseError("window must be an object", path="$.window")
    lo = _require(obj, "lo", int, "$.window")
    hi = _require(obj, "hi", int, "$.window")
    guard = obj.get("guard", setting("ZHOM_GUARD"))
    if not isinstance(guard, int):
        raise ParseError("'guard' has the wrong type", path="$.window.guard")
    try:
        return Window(lo, hi, guard)
    except ZhomError as exc:
        raise ParseError(str(exc), path="$.window") from exc


def parse_algebra_file(obj: Any) -> AlgebraFile:
    """Validate the JSON shape; structural errors carry a JSON path."""
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", path="$")
    version = _require(obj, "schemaVersion", int, "$")
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schemaVersion {version}", path="$.schemaVersion")
    try:
        field = Field.from_json(obj.get("field", "Q"))
    except InvalidFieldError as exc:
        raise ParseError(str(exc), path="$.field") from exc
    window = _parse_window(obj.get("window"))
    mode = _require(obj, "mode", str, "$")
    if mode not in MODES:
        raise ParseError(f"unknown mode {mode!r}", path="$.mode")
    payload = _require(obj, "payload", dict, "$")
    if mode == STRUCTURE_CONSTANTS:
        _check_rows(payload, "dims", 3, "$.payload")
        _check_rows(payload, "mult", 7, "$.payload")
    elif mode == ADJACENT_PRESENTATION:
        _check_rows(payload, "generators", 2, "$.payload")
        for n, rel in enumerate(payload.get("relations", [])):
            where = f"$.payload.relations[{n}]"
            if not isinstance(rel, dict):
                raise ParseError("relation must be an object", path=where)
            _require(rel, "from", int, where)
            _require(rel, "to", int, where)
            _require(rel, "vectors", list, where)
    else:
        name = _require(payload, "name", str, "$.payload")
        if name not in BUILTINS:
            raise ParseError(f"unknown builtin {name!r}", path="$.payload.name")
    return AlgebraFile(str(obj.get("name", "") or mode), field, window, mode, payload, version)


def _check_rows(payload: Mapping[str, Any], key: str, width: int, path: str) -> None:
    rows = _require(payload, key, list, path)
    for n, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            raise ParseError(f"expected a list of {width} entries", path=f"{path}.{key}[{n}]")


def _from_structure_constants(spec: AlgebraFile) -> ZAlgebra:
    dims = {(int(i), int(j)): int(d) for i, j, d in spec.payload["dims"]}
    mult: dict[tuple[int, int, int], dict[tuple[int, int], dict[int, Any]]] = {}
    for n, (i, j, k, s, t, u, c) in enumerate(spec.payload["mult"]):
        try:
            value = spec.field.convert(c)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad coefficient {c!r}", path=f"$.payload.mult[{n}]") from exc
        mult.setdefault((i, j, k), {}).setdefault((s, t), {})[u] = value
    return ZAlgebra(spec.window, spec.field, dims, mult, name=spec.name)


def _from_presentation(spec: AlgebraFile) -> ZAlgebra:
    gens = {int(i): int(d) for i, d in spec.payload["generators"]}
    rels: dict[tuple[int, int], list[Sequence[Any]]] = {}
    for rel in spec.payload.get("relations", []):
        rels.setdefault((rel["from"], rel["to"]), []).extend(rel["vectors"])
    return make_adjacent_presentation(gens, rels, spec.window, spec.field, name=spec.name)


# ── files ────────────────────────────────────────────────────────────────


def read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"could not read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc


def load_algebra_file(path: Path | str) -> AlgebraFile:
    spec = parse_algebra_file(read_json(Path(path)))
    logger.info("loaded %s (%s) from %s", spec.name, spec.mode, path)
    return spec


def load_algebra(path: Path | str) -> ZAlgebra:
    return load_algebra_file(path).build()


def dump_algebra(a: ZAlgebra) -> AlgebraFile:
    """Structure-constant file for any algebra."""
    return AlgebraFile(a.name, a.field, a.window, STRUCTURE_CONSTANTS, algebra_to_payload(a))


def write_algebra(a: ZAlgebra, path: Path | str) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(dump_algebra(a).to_json(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"could not write {path}: {exc.strerror or exc}") from exc
    return path


def parse_params(items: Sequence[str] | None) -> dict[str, Any]:
    """``["n=2", "q=1/2"]`` -> ``{"n": 2, "q": "1/2"}``."""
    params: dict[str, Any] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"parameter {item!r} is not key=value")
        value = value.strip()
        params[key.strip()] = int(value) if re.fullmatch(r"-?\d+", value) else value
    return params


def builtin_file(
    name: str,
    params: Mapping[str, Any] | None = None,
    *,
    field: Field | None = None,
    window: tuple[int, int] | None = None,
    guard: int | None = None,
) -> AlgebraFile:
    if name not in BUILTINS:
        raise ParseError(f"unknown builtin {name!r} (choose from {', '.join(BUILTINS)})")
    lo, hi = window or setting("ZHOM_DEFAULT_WINDOW")
    try:
        w = Window(int(lo), int(hi), int(setting("ZHOM_GUARD") if guard is None else guard))
        field = field or Field.parse(setting("ZHOM_DEFAULT_FIELD"))
    except ZhomError as exc:
        raise ParseError(str(exc)) from exc
    label = name + "".join(f"({v})" for _, v in sorted((params or {}).items()))
    payload = {"name": name, "params": dict(params or {})}
    return AlgebraFile(label, field, w, BUILTIN, payload)


# ── module specs ─────────────────────────────────────────────────────────

_FREE_ROW = re.compile(r"^e_?(-?\d+)A$")
_SIMPLE_ROW = re.compile(r"^e_?(-?\d+)A_?0$")
_FREE_COLUMN = re.compile(r"^Ae_?(-?\d+)$")
_QUOTIENT_ROW = re.compile(r"^A/A(?:>=|≥)(\d+)@(-?\d+)$")


def parse_module_spec(a: ZAlgebra, spec: str) -> GradedModule:
    """``e_0A``, ``e_0A0``, ``Ae_3`` (left), ``A/A>=2@0`` (row 0 of A/A_{>=2})
    or a path to a module JSON fixture."""
    text = spec.strip().replace(" ", "")
    if match := _FREE_ROW.match(text):
        return free_row(a, _in_window(a, int(match.group(1))))
    if match := _SIMPLE_ROW.match(text):
        return truncation_quotient_row(a, _in_window(a, int(match.group(1))), 1)
    if match := _FREE_COLUMN.match(text):
        return free_column(a, _in_window(a, int(match.group(1))))
    if match := _QUOTIENT_ROW.match(text):
        n, i = int(match.group(1)), int(match.group(2))
        if n < 1:
            raise ParseError(f"truncation A/A>={n} needs n >= 1")
        return truncation_quotient_row(a, _in_window(a, i), n)
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        obj = read_json(path)
        if not isinstance(obj, dict):
            raise ParseError("module fixture must be an object", path="$")
        return module_from_json(a, obj)
    raise ParseError(f"unrecognized module spec {spec!r}")


def _in_window(a: ZAlgebra, i: int) -> int:
    if i not in a.window:
        raise ParseError(f"index {i} outside window {a.window}")
    return i
