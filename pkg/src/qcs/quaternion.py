"""Quaternion scalar arithmetic.

A quaternion q = a + b*i + c*j + d*k is stored as four double-precision
reals. Multiplication follows i^2 = j^2 = k^2 = ijk = -1, which gives
ij = k, jk = i, ki = j and the anti-commuted counterparts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import ZeroDivisor

# Below this norm a quaternion is treated as a zero divisor for inversion.
INVERSION_THRESHOLD = 1e-300


@dataclass(frozen=True)
class Quaternion:
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __add__(self, other: Quaternion | float) -> Quaternion:
        other = _coerce(other)
        return Quaternion(self.a + other.a, self.b + other.b,
                          self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __sub__(self, other: Quaternion | float) -> Quaternion:
        other = _coerce(other)
        return Quaternion(self.a - other.a, self.b - other.b,
                          self.c - other.c, self.d - other.d)

    def __rsub__(self, other: float) -> Quaternion:
        return _coerce(other) - self

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other: Quaternion | float) -> Quaternion:
        return mul(self, _coerce(other))

    def __rmul__(self, other: float) -> Quaternion:
        # Reals commute with everything, so scalar*q == q*scalar.
        return mul(_coerce(other), self)

    def __truediv__(self, other: float) -> Quaternion:
        s = float(other)
        return Quaternion(self.a / s, self.b / s, self.c / s, self.d / s)

    def __abs__(self) -> float:
        return norm(self)

    def __str__(self) -> str:
        return format_quaternion(self)

    def is_real(self, tol: float = 0.0) -> bool:
        return abs(self.b) <= tol and abs(self.c) <= tol and abs(self.d) <= tol


ZERO = Quaternion()
ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def _coerce(value) -> Quaternion:
    if isinstance(value, Quaternion):
        return value
    return Quaternion(float(value))


def mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product p*q (order matters)."""
    return Quaternion(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )


def conj(q: Quaternion) -> Quaternion:
    """Conjugate a - b*i - c*j - d*k."""
    return Quaternion(q.a, -q.b, -q.c, -q.d)


def norm(q: Quaternion) -> float:
    """Euclidean norm sqrt(a^2 + b^2 + c^2 + d^2)."""
    return math.hypot(q.a, q.b, q.c, q.d)


def inv(q: Quaternion) -> Quaternion:
    """Multiplicative inverse conj(q)/|q|^2.

    Raises ZeroDivisor when |q| is below the machine threshold.
    """
    n = norm(q)
    if n < INVERSION_THRESHOLD:
        raise ZeroDivisor(f"cannot invert quaternion with norm {n!r}")
    n2 = n * n
    return Quaternion(q.a / n2, -q.b / n2, -q.c / n2, -q.d / n2)


def isclose(p: Quaternion, q: Quaternion, tol: float = 1e-12) -> bool:
    """Componentwise comparison with absolute tolerance (test convention)."""
    return (abs(p.a - q.a) <= tol and abs(p.b - q.b) <= tol
            and abs(p.c - q.c) <= tol and abs(p.d - q.d) <= tol)


def format_quaternion(q: Quaternion) -> str:
    """Render as "a+bi+cj+dk" with explicit signs, e.g. "1-2i+0j+3.5k"."""
    return f"{q.a:g}{q.b:+g}i{q.c:+g}j{q.d:+g}k"


_QUAT_RE = re.compile(
    r"^\s*([+-]?[^ij+-]+(?:[eE][+-]?\d+)?)"
    r"([+-][^ij+-]+(?:[eE][+-]?\d+)?)i"
    r"([+-][^jk+-]+(?:[eE][+-]?\d+)?)j"
    r"([+-][^k+-]+(?:[eE][+-]?\d+)?)k\s*$"
)


def parse_quaternion(text: str) -> Quaternion:
    """Parse the explicit-sign "a+bi+cj+dk" text form."""
    m = _QUAT_RE.match(text)
    if not m:
        raise ValueError(f"not a quaternion literal: {text!r}")
    return Quaternion(*(float(g) for g in m.groups()))
