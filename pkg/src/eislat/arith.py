"""Exact arithmetic in the Eisenstein integers O = Z[w] and the field K = Q(w).

Elements are stored in the basis (1, w) with w = (1 + sqrt(-3))/2, so that
w**2 = w - 1 and conj(w) = 1 - w.  ``THETA = 2w - 1`` is sqrt(-3).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

__all__ = [
    "EisInt",
    "KScalar",
    "HermitianMatrix",
    "OMEGA",
    "THETA",
    "eis_norm",
    "eis_divmod",
    "herm_det",
    "units",
]

_Num = Union[int, Fraction]


@dataclass(frozen=True, slots=True)
class EisInt:
    """The Eisenstein integer a + b*w."""

    a: int
    b: int

    def __post_init__(self):
        if not (isinstance(self.a, int) and isinstance(self.b, int)):
            raise TypeError("EisInt coordinates must be integers")

    def __add__(self, other):
        other = _coerce(other)
        if isinstance(other, EisInt):
            return EisInt(self.a + other.a, self.b + other.b)
        return KScalar(self.a, self.b) + other

    __radd__ = __add__

    def __neg__(self):
        return EisInt(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if isinstance(other, EisInt):
            a, b, c, d = self.a, self.b, other.a, other.b
            return EisInt(a * c - b * d, a * d + b * c + b * d)
        return KScalar(self.a, self.b) * other

    __rmul__ = __mul__

    def conj(self) -> "EisInt":
        return EisInt(self.a + self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a + self.a * self.b + self.b * self.b

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def to_k(self) -> "KScalar":
        return KScalar(self.a, self.b)

    def __bool__(self):
        return not self.is_zero()

    def __str__(self):
        return str(self.to_k())


class KScalar:
    """Element a + b*w of K = Q(w) with rational coordinates."""

    __slots__ = ("a", "b")

    def __init__(self, a: _Num = 0, b: _Num = 0):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))

    def __setattr__(self, name, value):
        raise AttributeError("KScalar is immutable")

    def __eq__(self, other):
        try:
            other = _as_k(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __repr__(self):
        return f"KScalar({self.a!s}, {self.b!s})"

    def __str__(self):
        return f"{self.a} + {self.b}*w"

    def __add__(self, other):
        other = _as_k(other)
        return KScalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return KScalar(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-_as_k(other))

    def __rsub__(self, other):
        return _as_k(other) + (-self)

    def __mul__(self, other):
        other = _as_k(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        return KScalar(a * c - b * d, a * d + b * c + b * d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * _as_k(other).inverse()

    def __rtruediv__(self, other):
        return _as_k(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = KScalar(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def conj(self) -> "KScalar":
        return KScalar(self.a + self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a + self.a * self.b + self.b * self.b

    def inverse(self) -> "KScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in K")
        c = self.conj()
        return KScalar(c.a / n, c.b / n)

    @property
    def real(self) -> Fraction:
        return self.a + self.b / 2

    def is_rational(self) -> bool:
        return self.b == 0

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def to_eis(self) -> EisInt:
        if not self.is_integral():
            raise ValueError(f"{self} is not an Eisenstein integer")
        return EisInt(int(self.a), int(self.b))

    @classmethod
    def parse(cls, text: str) -> "KScalar":
        m = _KSCALAR_RE.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"cannot parse K-scalar {text!r}")
        return cls(Fraction(m.group(1)), Fraction(m.group(2)))


_KSCALAR_RE = re.compile(r"(-?\d+(?:/\d+)?)\s*\+\s*(-?\d+(?:/\d+)?)\*w")

OMEGA = EisInt(0, 1)
THETA = EisInt(-1, 2)


def units() -> list[EisInt]:
    """The six units of O as the powers w**0, ..., w**5 (w is a primitive 6th root of unity)."""
    out, u = [], EisInt(1, 0)
    for _ in range(6):
        out.append(u)
        u = u * OMEGA
    return out


def _coerce(x):
    if isinstance(x, (EisInt, KScalar)):
        return x
    if isinstance(x, int):
        return EisInt(x, 0)
    if isinstance(x, Rational):
        return KScalar(x, 0)
    raise TypeError(f"cannot use {type(x).__name__} as an element of K")


def _as_k(x) -> KScalar:
    x = _coerce(x)
    return x if isinstance(x, KScalar) else KScalar(x.a, x.b)


def eis_norm(x: EisInt) -> int:
    return x.norm()


def eis_divmod(x: EisInt, y: EisInt) -> tuple[EisInt, EisInt]:
    """Euclidean division in O: x = q*y + r with norm(r) < norm(y)."""
    n = y.norm()
    if n == 0:
        raise ZeroDivisionError("Eisenstein division by zero")
    p = x * y.conj()
    qa, qb = _round_div(p.a, n), _round_div(p.b, n)
    best = None
    for da in (0, 1, -1):
        for db in (0, 1, -1):
            q = EisInt(qa + da, qb + db)
            r = x - q * y
            if best is None or r.norm() < best[1].norm():
                best = (q, r)
            if r.norm() < n and da == db == 0:
                return q, r
    if best[1].norm() >= n:
        raise ArithmeticError("Euclidean division failed")  # pragma: no cover
    return best


def _round_div(p: int, n: int) -> int:
    return (2 * p + n) // (2 * n)


class HermitianMatrix:
    """Square matrix over K with entry(j, k) == conj(entry(k, j))."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence], check: bool = True):
        rows = tuple(tuple(_as_k(v) for v in row) for row in rows)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("Hermitian matrix must be square")
        object.__setattr__(self, "rows", rows)
        if check and not self.is_hermitian():
            raise ValueError("matrix is not Hermitian")

    def __setattr__(self, name, value):
        raise AttributeError("HermitianMatrix is immutable")

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, jk):
        j, k = jk
        return self.rows[j][k]

    def __eq__(self, other):
        return isinstance(other, HermitianMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"HermitianMatrix({self.to_strings()})"

    def is_hermitian(self) -> bool:
        n = self.n
        return all(self.rows[j][k] == self.rows[k][j].conj()
                   for j in range(n) for k in range(j, n))

    def conj(self) -> "HermitianMatrix":
        return HermitianMatrix([[v.conj() for v in row] for row in self.rows])

    def det(self) -> Fraction:
        return herm_det(self)

    def congruent(self, u: Sequence[Sequence]) -> "HermitianMatrix":
        """Return conj(U)^T H U."""
        n = self.n
        u = [[_as_k(v) for v in row] for row in u]
        m = len(u[0])
        hu = [[sum((self.rows[i][l] * u[l][k] for l in range(n)), KScalar())
               for k in range(m)] for i in range(n)]
        return HermitianMatrix([[sum((u[l][j].conj() * hu[l][k] for l in range(n)), KScalar())
                                 for k in range(m)] for j in range(m)])

    def to_strings(self) -> list[list[str]]:
        return [[str(v) for v in row] for row in self.rows]

    def to_json(self) -> str:
        return json.dumps(self.to_strings())

    @classmethod
    def from_strings(cls, rows: Iterable[Iterable[str]]) -> "HermitianMatrix":
        return cls([[KScalar.parse(s) for s in row] for row in rows])

    @classmethod
    def from_json(cls, text: str) -> "HermitianMatrix":
        return cls.from_strings(json.loads(text))

    @classmethod
    def block_diag(cls, *mats: "HermitianMatrix") -> "HermitianMatrix":
        n = sum(m.n for m in mats)
        rows = [[KScalar()] * n for _ in range(n)]
        off = 0
        for m in mats:
            for j in range(m.n):
                for k in range(m.n):
                    rows[off + j][off + k] = m.rows[j][k]
            off += m.n
        return cls(rows, check=False)


def _exact_quotient(x: EisInt, y: EisInt) -> EisInt:
    n = y.norm()
    p = x * y.conj()
    if p.a % n or p.b % n:
        raise ArithmeticError("inexact division in Bareiss elimination")
    return EisInt(p.a // n, p.b // n)


def herm_det(h: HermitianMatrix) -> Fraction:
    """Exact determinant of a Hermitian matrix, by fraction-free elimination over O."""
    if not isinstance(h, HermitianMatrix):
        h = HermitianMatrix(h)
    n = h.n
    if n == 0:
        return Fraction(1)
    den = 1
    for row in h.rows:
        for v in row:
            den = _lcm(den, _lcm(v.a.denominator, v.b.denominator))
    m = [[EisInt(int(v.a * den), int(v.b * den)) for v in row] for row in h.rows]
    sign, prev = 1, EisInt(1, 0)
    for k in range(n - 1):
        if m[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if piv is None:
                return Fraction(0)
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = _exact_quotient(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev)
        prev = m[k][k]
    d = m[n - 1][n - 1]
    if d.b != 0:
        raise ArithmeticError("determinant of a Hermitian matrix has an w-component")
    return Fraction(sign * d.a, den ** n)


def _lcm(a: int, b: int) -> int:
    from math import gcd
    return a * b // gcd(a, b)
