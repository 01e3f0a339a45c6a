"""Arguments and error translation shared by the zhom_* commands."""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

from django.core.management.base import CommandError

from zhom.services.algebra import BUILTINS, ZAlgebra
from zhom.services.algebra_file import AlgebraFile, builtin_file, load_algebra_file, parse_params
from zhom.services.errors import (
    IoError,
    ParseError,
    RequiresRegularError,
    ZhomError,
)
from zhom.services.field import Field

EXIT_FAILURE = 1
EXIT_VIOLATIONS = 2
EXIT_PARSE = 3
EXIT_IO = 4


def add_algebra_arguments(parser) -> None:
    parser.add_argument(
        "path",
        nargs="?",
        help="Algebra definition file (JSON). Omit when using --builtin.",
    )
    parser.add_argument(
        "--builtin",
        choices=BUILTINS,
        help="Use a built-in algebra instead of a file.",
    )
    parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Builtin parameter, e.g. n=2 (poly), q=1/2 (skew), g=2 (free). Repeatable.",
    )
    parser.add_argument(
        "--field",
        help='Base field for builtins: "Q" or "GF7" (default ZHOM_DEFAULT_FIELD).',
    )
    parser.add_argument(
        "--window",
        nargs=2,
        type=int,
        metavar=("LO", "HI"),
        help="Degree window for builtins (default ZHOM_DEFAULT_WINDOW).",
    )
    parser.add_argument(
        "--guard",
        type=int,
        help="Guard band below the window top (default ZHOM_GUARD).",
    )
    parser.add_argument(
        "--json",
        action="store_true",
        dest="json",
        help="Write deterministic JSON to stdout instead of a summary.",
    )


def algebra_file_from_options(options: dict[str, Any]) -> AlgebraFile:
    path, builtin = options.get("path"), options.get("builtin")
    if bool(path) == bool(builtin):
        raise CommandError("Give exactly one of PATH or --builtin.", returncode=EXIT_FAILURE)
    with library_errors():
        if path:
            return load_algebra_file(path)
        field = Field.parse(options["field"]) if options.get("field") else None
        return builtin_file(
            builtin,
            parse_params(options.get("param")),
            field=field,
            window=tuple(options["window"]) if options.get("window") else None,
            guard=options.get("guard"),
        )


def load_from_options(options: dict[str, Any]) -> tuple[AlgebraFile, ZAlgebra]:
    spec = algebra_file_from_options(options)
    with library_errors():
        return spec, spec.build()


@contextmanager
def library_errors() -> Iterator[None]:
    """Map engine errors onto exit codes."""
    try:
        yield
    except ParseError as exc:
        raise CommandError(f"Parse error: {exc}", returncode=EXIT_PARSE) from exc
    except IoError as exc:
        raise CommandError(str(exc), returncode=EXIT_IO) from exc
    except RequiresRegularError as exc:
        raise CommandError(f"Requires a regular algebra: {exc}", returncode=EXIT_FAILURE) from exc
    except ZhomError as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_FAILURE) from exc
