"""Masses of the genus of even unimodular O-lattices and their ingredients."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod

import sympy

__all__ = [
    "MassValue",
    "bernoulli",
    "bernoulli_poly",
    "bernoulli_chi3",
    "chi3",
    "mass_even",
    "mass_odd",
    "isotropic_count",
    "brute_force_isotropic",
    "factor_fraction",
]


@dataclass(frozen=True)
class MassValue:
    value: Fraction
    r: int

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("a mass is positive")

    @property
    def numerator_factors(self) -> dict[int, int]:
        return dict(sympy.factorint(self.value.numerator))

    @property
    def denominator_factors(self) -> dict[int, int]:
        return dict(sympy.factorint(self.value.denominator))

    def factored(self) -> str:
        return factor_fraction(self.value)

    def __str__(self):
        return str(self.value)


def _factor_str(n: int) -> str:
    if n == 1:
        return "1"
    parts = [f"{p}^{e}" if e > 1 else str(p) for p, e in sorted(sympy.factorint(n).items())]
    return "*".join(parts)


def factor_fraction(x: Fraction) -> str:
    """Render a positive rational as 'p1^e1*... / q1^f1*...'."""
    sign = "-" if x < 0 else ""
    x = abs(x)
    num = _factor_str(x.numerator)
    if x.denominator == 1:
        return sign + num
    return f"{sign}{num} / {_factor_str(x.denominator)}"


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2, from sum_{k<=n} C(n+1, k) B_k = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    s = sum((comb(n + 1, k) * bernoulli(k) for k in range(n)), Fraction(0))
    return -s / (n + 1)


def bernoulli_poly(n: int, x: Fraction) -> Fraction:
    """The Bernoulli polynomial B_n(x) = sum_k C(n, k) B_k x^(n-k)."""
    x = Fraction(x)
    return sum((comb(n, k) * bernoulli(k) * x ** (n - k) for k in range(n + 1)), Fraction(0))


def chi3(n: int) -> int:
    """The quadratic character (n/3) attached to Q(sqrt(-3))."""
    return (0, 1, -1)[n % 3]


@lru_cache(maxsize=None)
def bernoulli_chi3(n: int) -> Fraction:
    """Generalized Bernoulli number B_{n,chi} for chi = (./3), via f^(n-1) sum chi(a) B_n(a/f)."""
    if n < 1:
        raise ValueError("n must be positive")
    f = 3
    return f ** (n - 1) * sum((chi3(a) * bernoulli_poly(n, Fraction(a, f)) for a in range(1, f + 1)),
                              Fraction(0))


def _check_rank(r: int) -> None:
    if r <= 0 or r % 4:
        raise ValueError(f"rank {r} is not a positive multiple of 4; "
                         "Eisenstein lattices exist only in ranks divisible by 4")


def _bernoulli_product(r: int) -> Fraction:
    return prod((abs(bernoulli(2 * j) * bernoulli_chi3(2 * j - 1)) for j in range(1, r // 2 + 1)),
                start=Fraction(1))


def mass_even(r: int) -> MassValue:
    """Mass of the genus of even unimodular O-lattices of O-rank r."""
    _check_rank(r)
    return MassValue(_bernoulli_product(r) / (2 ** (r - 1) * factorial(r)), r)


def mass_odd(r: int) -> MassValue:
    """Mass of the genus of odd unimodular O-lattices of O-rank r."""
    _check_rank(r)
    return MassValue(Fraction(3 ** (r // 2) + 1, 2 ** r * factorial(r)) * _bernoulli_product(r), r)


def isotropic_count(r: int, geometry: str) -> int:
    """Number of maximal totally isotropic subspaces of F_3^r (hyperbolic or symplectic)."""
    if r <= 0 or r % 2:
        raise ValueError("r must be a positive even integer")
    h = r // 2
    if geometry == "orthogonal":
        return prod(3 ** (j - 1) + 1 for j in range(1, h + 1))
    if geometry == "symplectic":
        return prod(3 ** j + 1 for j in range(1, h + 1))
    raise ValueError(f"unknown geometry {geometry!r}")


def _bilinear(r: int, geometry: str):
    h = r // 2
    if geometry == "orthogonal":
        # polar form of the hyperbolic form Q(x) = sum x_i * x_{h+i}
        return lambda x, y: sum(x[i] * y[h + i] + x[h + i] * y[i] for i in range(h)) % 3
    if geometry == "symplectic":
        return lambda x, y: sum(x[i] * y[h + i] - x[h + i] * y[i] for i in range(h)) % 3
    raise ValueError(f"unknown geometry {geometry!r}")


def _rref_subspaces(r: int, k: int):
    """Yield a basis of every k-dimensional subspace of F_3^r, once, in reduced echelon form."""
    for pivots in itertools.combinations(range(r), k):
        free = [(i, c) for i in range(k) for c in range(pivots[i] + 1, r) if c not in pivots]
        for values in itertools.product(range(3), repeat=len(free)):
            rows = [[0] * r for _ in range(k)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, c), v in zip(free, values):
                rows[i][c] = v
            yield rows


def brute_force_isotropic(r: int, geometry: str) -> int:
    """Count maximal totally isotropic subspaces of F_3^r by exhaustive subspace enumeration (r <= 6)."""
    if r <= 0 or r % 2:
        raise ValueError("r must be a positive even integer")
    if r > 6:
        raise ValueError("brute force is limited to r <= 6")
    form = _bilinear(r, geometry)
    # char 3 is odd, so a subspace is totally singular iff the polar form vanishes on a basis
    return sum(
        all(form(u, v) == 0 for i, u in enumerate(rows) for v in rows[i:])
        for rows in _rref_subspaces(r, r // 2)
    )
