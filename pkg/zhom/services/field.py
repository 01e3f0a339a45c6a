from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import sympy
from sympy import isprime
from sympy.polys.domains import GF, QQ

from zhom.services.errors import DivisionByZeroError, InvalidFieldError, MixedFieldsError

logger = logging.getLogger(__name__)

_GF_LABEL = re.compile(r"^GF\(?(\d+)\)?$", re.IGNORECASE)


@dataclass(frozen=True)
class Field:
    """The base field: the rationals (``characteristic == 0``) or GF(p).

    Elements are plain sympy domain elements (``QQ`` or ``GF(p)``); every
    matrix in the engine carries its ``Field`` so mixing is caught early.
    """

    characteristic: int = 0

    def __post_init__(self) -> None:
        p = self.characteristic
        if p == 0:
            return
        if p <= 2 or not isprime(p):
            raise InvalidFieldError(f"GF(p) needs an odd prime p, got {p}")

    @classmethod
    def rational(cls) -> Field:
        return cls(0)

    @classmethod
    def gf(cls, p: int) -> Field:
        return cls(int(p))

    @classmethod
    def parse(cls, text: str) -> Field:
        """Parse ``"Q"``, ``"GF7"`` or ``"GF(7)"``."""
        text = (text or "").strip()
        if text.upper() in {"Q", "QQ"}:
            return cls.rational()
        match = _GF_LABEL.match(text)
        if not match:
            raise InvalidFieldError(f"Unknown field: {text!r}")
        return cls.gf(int(match.group(1)))

    @classmethod
    def from_json(cls, obj: Any) -> Field:
        if obj == "Q":
            return cls.rational()
        if isinstance(obj, dict) and set(obj) == {"GFp"}:
            return cls.gf(int(obj["GFp"]))
        raise InvalidFieldError(f'field must be "Q" or {{"GFp": p}}, got {obj!r}')

    def to_json(self) -> Any:
        return "Q" if self.characteristic == 0 else {"GFp": self.characteristic}

    @property
    def label(self) -> str:
        return "Q" if self.characteristic == 0 else f"GF({self.characteristic})"

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @cached_property
    def domain(self):
        return QQ if self.characteristic == 0 else GF(self.characteristic)

    @property
    def zero(self):
        return self.domain.zero

    @property
    def one(self):
        return self.domain.one

    # ── element helpers ───────────────────────────────────────────────────

    def convert(self, value: Any):
        """Turn an int, a ``"p/q"`` string, a sympy number or a domain element
        into an element of this field."""
        K = self.domain
        if isinstance(value, Scalar):
            if value.field != self:
                raise MixedFieldsError(f"{value.field.label} scalar used in {self.label}")
            return value.value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return K.convert(value)
        try:
            if K.of_type(value):
                return value
        except TypeError:
            pass
        rational = sympy.Rational(str(value).strip()) if isinstance(value, str) else value
        rational = sympy.Rational(rational)
        if self.characteristic == 0:
            return QQ.from_sympy(rational)
        numerator = K.convert(int(rational.p))
        denominator = K.convert(int(rational.q))
        if not denominator:
            raise DivisionByZeroError(f"denominator {rational.q} vanishes in {self.label}")
        return numerator / denominator

    def inv(self, value):
        if not value:
            raise DivisionByZeroError("inverse of zero")
        return self.one / value

    def residue(self, value) -> int:
        """Canonical representative in [0, p) of a GF(p) element."""
        return int(self.domain.to_int(value)) % self.characteristic

    def to_json_value(self, value) -> int | str:
        """Exact, deterministic JSON form: ints stay ints, rationals are "a/b"."""
        if self.characteristic:
            return self.residue(value)
        numerator, denominator = int(value.numerator), int(value.denominator)
        if denominator == 1:
            return numerator
        return f"{numerator}/{denominator}"

    def format(self, value) -> str:
        return str(self.to_json_value(value))

    def random_element(self, rng: random.Random, bound: int = 5):
        """Small random element; nonzero draws are as likely as for a uniform
        integer in [-bound, bound]."""
        return self.convert(rng.randint(-bound, bound))

    def scalar(self, value: Any) -> Scalar:
        return Scalar(self, self.convert(value))


@dataclass(frozen=True, eq=False)
class Scalar:
    """A field element tagged with its field.

    The engine itself works with bare domain elements; ``Scalar`` is the
    user-facing value (CLI parsing, tests, reports). Comparing scalars of
    different fields raises MixedFieldsError like the arithmetic does.
    """

    field: Field
    value: Any

    def _other(self, other: Any):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise MixedFieldsError(f"{self.field.label} and {other.field.label} operands")
            return other.value
        return self.field.convert(other)

    def __add__(self, other: Any) -> Scalar:
        return Scalar(self.field, self.value + self._other(other))

    __radd__ = __add__

    def __sub__(self, other: Any) -> Scalar:
        return Scalar(self.field, self.value - self._other(other))

    def __rsub__(self, other: Any) -> Scalar:
        return Scalar(self.field, self._other(other) - self.value)

    def __mul__(self, other: Any) -> Scalar:
        return Scalar(self.field, self.value * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> Scalar:
        divisor = self._other(other)
        if not divisor:
            raise DivisionByZeroError("division by zero")
        return Scalar(self.field, self.value / divisor)

    def __rtruediv__(self, other: Any) -> Scalar:
        return Scalar(self.field, self._other(other)).__truediv__(self)

    def __neg__(self) -> Scalar:
        return Scalar(self.field, -self.value)

    def inv(self) -> Scalar:
        return Scalar(self.field, self.field.inv(self.value))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (Scalar, int)):
            return NotImplemented
        return self.value == self._other(other)

    def __hash__(self) -> int:
        return hash((self.field, self.value))

    def __bool__(self) -> bool:
        return bool(self.value)

    def __str__(self) -> str:
        return self.field.format(self.value)
