from __future__ import annotations


class ZhomError(RuntimeError):
    """Base class for failures raised by the homological engine."""


class DivisionByZeroError(ZhomError, ZeroDivisionError):
    pass


class MixedFieldsError(ZhomError):
    pass


class InvalidFieldError(ZhomError, ValueError):
    pass


class IndexOutsideWindowError(ZhomError, IndexError):
    pass


class AlgebraMismatchError(ZhomError):
    pass


class InvalidRelationDegreeError(ZhomError, ValueError):
    pass


class RelationOutsideTensorSpaceError(ZhomError, ValueError):
    pass


class NotLeftBoundedError(ZhomError):
    pass


class ResolutionTruncatedError(ZhomError):
    pass


class WindowTooSmallError(ZhomError):
    pass


class RequiresRegularError(ZhomError):
    pass


class ParseError(ZhomError):
    """Malformed algebra/module file.

    ``line``/``column`` are set for JSON syntax errors, ``path`` (a JSON
    pointer such as ``$.window.lo``) for schema errors.
    """

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        path: str | None = None,
    ) -> None:
        self.line = line
        self.column = column
        self.path = path
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if path:
            where.append(path)
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)


class IoError(ZhomError, OSError):
    pass


class ColimitNotStabilizedError(ZhomError):
    pass
