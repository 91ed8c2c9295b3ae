"""Forward-mode dual numbers with one derivative slot per chart coordinate.

Components of the derivative vector may themselves be Dual, so nesting the
evaluation gives exact second derivatives from the same arithmetic.
"""

from __future__ import annotations

import math

from .errors import DomainError


def real_part(x):
    """Innermost float of a possibly nested dual number."""
    while isinstance(x, Dual):
        x = x.val
    return x


class Dual:
    """Value plus a tuple of partial derivatives."""

    __slots__ = ("val", "d")

    def __init__(self, val, d):
        self.val = val
        self.d = tuple(d)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.d!r})"

    def __neg__(self):
        return Dual(-self.val, tuple(-a for a in self.d))

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val,
                        tuple(a + b for a, b in zip(self.d, other.d)))
        return Dual(self.val + other, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val,
                        tuple(a - b for a, b in zip(self.d, other.d)))
        return Dual(self.val - other, self.d)

    def __rsub__(self, other):
        return Dual(other - self.val, tuple(-a for a in self.d))

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        tuple(a * other.val + self.val * b
                              for a, b in zip(self.d, other.d)))
        return Dual(self.val * other, tuple(a * other for a in self.d))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, tuple((a - q * b) / other.val
                                 for a, b in zip(self.d, other.d)))
        return Dual(self.val / other, tuple(a / other for a in self.d))

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, tuple((-q * b) / self.val for b in self.d))


def sin(x):
    if isinstance(x, Dual):
        c = cos(x.val)
        return Dual(sin(x.val), tuple(c * a for a in x.d))
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        s = sin(x.val)
        return Dual(cos(x.val), tuple(-(s * a) for a in x.d))
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        t = tan(x.val)
        sec2 = 1.0 + t * t
        return Dual(t, tuple(sec2 * a for a in x.d))
    return math.tan(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.val)
        return Dual(e, tuple(e * a for a in x.d))
    return math.exp(x)


def log(x):
    if real_part(x) <= 0.0:
        raise DomainError("log of non-positive value")
    if isinstance(x, Dual):
        return Dual(log(x.val), tuple(a / x.val for a in x.d))
    return math.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        if real_part(x) <= 0.0:
            raise DomainError("sqrt derivative at non-positive value")
        s = sqrt(x.val)
        return Dual(s, tuple(a / (2.0 * s) for a in x.d))
    if x < 0.0:
        raise DomainError("sqrt of negative value")
    return math.sqrt(x)


def ipow(x, n: int):
    """Integer power by repeated squaring; valid for any base."""
    if n == 0:
        return 1.0
    if n < 0:
        if real_part(x) == 0.0:
            raise DomainError("zero raised to a negative power")
        return 1.0 / ipow(x, -n)
    result = None
    base = x
    while True:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if not n:
            return result
        base = base * base


def rpow(x, y):
    """General power for positive base, via exp(y * log(x))."""
    if real_part(x) <= 0.0:
        raise DomainError("power of non-positive base with non-integer exponent")
    return exp(y * log(x))
