"""Extended real numbers with a tagged infinity.

Potentials such as ``t**(-s/2)`` take the value ``+inf`` at ``t = 0``, and sums
over a configuration may legitimately contain that term. Floats would carry
it as ``math.inf`` and silently turn ``inf - inf`` into NaN; here the infinity
is an explicit tag and mixing opposite infinities raises instead.
"""

from __future__ import annotations

import functools
import math
from numbers import Real


@functools.total_ordering
class ExtendedReal:
    """A value in ``[-inf, +inf]`` with infinities stored as a sign tag.

    ``ExtendedReal(2.5)`` is finite, ``ExtendedReal.inf()`` is ``+inf``.
    Arithmetic with plain numbers is supported; addition saturates.
    """

    __slots__ = ("_value", "_inf")

    def __init__(self, value: float = 0.0, inf: int = 0):
        if inf not in (-1, 0, 1):
            raise ValueError("inf tag must be -1, 0 or 1")
        if inf == 0:
            value = float(value)
            if math.isnan(value):
                raise ArithmeticError("NaN is not an extended real")
            if math.isinf(value):
                inf = 1 if value > 0 else -1
                value = 0.0
        else:
            value = 0.0
        self._value = value
        self._inf = inf

    @classmethod
    def inf(cls, sign: int = 1) -> "ExtendedReal":
        return cls(0.0, 1 if sign > 0 else -1)

    @classmethod
    def coerce(cls, x) -> "ExtendedReal":
        if isinstance(x, ExtendedReal):
            return x
        return cls(float(x))

    @property
    def is_finite(self) -> bool:
        return self._inf == 0

    @property
    def is_posinf(self) -> bool:
        return self._inf == 1

    @property
    def is_neginf(self) -> bool:
        return self._inf == -1

    @property
    def sign_of_infinity(self) -> int:
        return self._inf

    @property
    def value(self) -> float:
        """The finite value; raises for infinities."""
        if self._inf:
            raise ArithmeticError("infinite extended real has no finite value")
        return self._value

    def __float__(self) -> float:
        return self._inf * math.inf if self._inf else self._value

    def __add__(self, other):
        if not isinstance(other, (ExtendedReal, Real)):
            return NotImplemented
        other = ExtendedReal.coerce(other)
        if self._inf and other._inf and self._inf != other._inf:
            raise ArithmeticError("inf - inf is undefined")
        if self._inf or other._inf:
            return ExtendedReal.inf(self._inf or other._inf)
        return ExtendedReal(self._value + other._value)

    __radd__ = __add__

    def __neg__(self):
        if self._inf:
            return ExtendedReal.inf(-self._inf)
        return ExtendedReal(-self._value)

    def __sub__(self, other):
        if not isinstance(other, (ExtendedReal, Real)):
            return NotImplemented
        return self + (-ExtendedReal.coerce(other))

    def __rsub__(self, other):
        return ExtendedReal.coerce(other) + (-self)

    def __mul__(self, other):
        # scalar multiples only; the potential never multiplies two extended values
        if not isinstance(other, Real) or isinstance(other, ExtendedReal):
            return NotImplemented
        c = float(other)
        if self._inf:
            if c == 0:
                raise ArithmeticError("0 * inf is undefined")
            return ExtendedReal.inf(self._inf * (1 if c > 0 else -1))
        return ExtendedReal(self._value * c)

    __rmul__ = __mul__

    def _key(self):
        return (self._inf, self._value)

    def __eq__(self, other):
        if isinstance(other, (ExtendedReal, Real)):
            try:
                other = ExtendedReal.coerce(other)
            except ArithmeticError:
                return False
            return self._key() == other._key()
        return NotImplemented

    def __lt__(self, other):
        if not isinstance(other, (ExtendedReal, Real)):
            return NotImplemented
        return self._key() < ExtendedReal.coerce(other)._key()

    def __hash__(self):
        return hash(float(self))

    def __repr__(self):
        if self._inf:
            return f"ExtendedReal({'+' if self._inf > 0 else '-'}inf)"
        return f"ExtendedReal({self._value!r})"

    def __str__(self):
        if self._inf:
            return "+inf" if self._inf > 0 else "-inf"
        return repr(self._value)

    def to_json(self):
        """JSON-safe form: a float, or the strings ``"+inf"``/``"-inf"``."""
        if self._inf:
            return str(self)
        return self._value

    @classmethod
    def from_json(cls, obj) -> "ExtendedReal":
        if isinstance(obj, str):
            s = obj.strip().lower()
            if s in ("+inf", "inf", "infinity"):
                return cls.inf(1)
            if s in ("-inf", "-infinity"):
                return cls.inf(-1)
            raise ValueError(f"not an extended real: {obj!r}")
        return cls(float(obj))


def esum(values) -> ExtendedReal:
    """Saturating sum of an iterable of numbers / extended reals."""
    total = ExtendedReal(0.0)
    for v in values:
        total = total + v
    return total
