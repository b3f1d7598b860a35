"""Exact integer and rational matrix routines on plain lists of Python ints / Fractions."""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

Matrix = list[list[int]]


def as_int_matrix(m) -> Matrix:
    return [[int(v) for v in row] for row in np.asarray(m, dtype=object).tolist()] if len(m) else []


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*a)]


def det_int(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][k]), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def det_rational(m: Sequence[Sequence]) -> Fraction:
    den = 1
    for row in m:
        for v in row:
            den = den * Fraction(v).denominator // gcd(den, Fraction(v).denominator)
    return Fraction(det_int([[int(Fraction(v) * den) for v in row] for row in m]), den ** len(m))


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def hnf(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row Hermite normal form; returns the nonzero rows (a basis of the row lattice)."""
    a = [list(map(int, r)) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    p = 0
    for c in range(ncols):
        if p == len(a):
            break
        for i in range(p + 1, len(a)):
            if a[i][c] == 0:
                continue
            g, x, y = xgcd(a[p][c], a[i][c])
            u, v = a[p][c] // g, a[i][c] // g
            rp, ri = a[p], a[i]
            a[p] = [x * s + y * t for s, t in zip(rp, ri)]
            a[i] = [-v * s + u * t for s, t in zip(rp, ri)]
        if a[p][c] == 0:
            continue
        if a[p][c] < 0:
            a[p] = [-s for s in a[p]]
        piv = a[p][c]
        for i in range(p):
            q = a[i][c] // piv
            if q:
                a[i] = [s - q * t for s, t in zip(a[i], a[p])]
        p += 1
    return [r for r in a[:p]]


def rational_hnf(rows: Sequence[Sequence]) -> tuple[Matrix, int]:
    """HNF of a lattice spanned by rational rows; returns (integer HNF, common denominator)."""
    den = 1
    for r in rows:
        for v in r:
            d = Fraction(v).denominator
            den = den * d // gcd(den, d)
    ints = [[int(Fraction(v) * den) for v in r] for r in rows]
    return hnf(ints), den


def inverse_rational(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [v - f * w for v, w in zip(a[i], a[c])]
    return [row[n:] for row in a]


def solve_rows(basis: Sequence[Sequence], vecs: Sequence[Sequence]) -> list[list[Fraction]]:
    """Coordinates X with X @ basis == vecs for a square invertible basis."""
    return matmul(vecs, inverse_rational(basis))


def smith_form(m: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Return (U, D, V) with U @ m @ V == D diagonal, U and V unimodular, d_i | d_{i+1}."""
    a = [list(map(int, r)) for r in m]
    rows, cols = len(a), len(a[0]) if a else 0
    u, v = identity(rows), identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for r in a:
            r[dst] -= q * r[src]
        for r in v:
            r[dst] -= q * r[src]

    for t in range(min(rows, cols)):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, a[i][t] // p)
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, a[t][j] // p)
            if any(a[i][t] for i in range(t + 1, rows)) or any(a[t][j] for j in range(t + 1, cols)):
                continue  # a smaller remainder appeared; it becomes the next pivot
            bad = next((i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return u, a, v


def lll_gram(gram: Sequence[Sequence[int]], delta: float = 0.99) -> tuple[Matrix, Matrix]:
    """LLL-reduce a positive definite Gram matrix.

    Returns (T, G') with T unimodular and G' = T G T^T computed exactly; the Gram-Schmidt
    data is floating point and only steers the reduction.
    """
    g = [list(map(int, r)) for r in gram]
    n = len(g)
    t = identity(n)

    def gso():
        mu = np.zeros((n, n))
        bstar = np.zeros(n)
        gf = np.array(g, dtype=float)
        for i in range(n):
            for j in range(i):
                mu[i, j] = (gf[i, j] - np.dot(mu[j, :j] * mu[i, :j], bstar[:j])) / bstar[j]
            bstar[i] = gf[i, i] - np.dot(mu[i, :i] ** 2, bstar[:i])
        return mu, bstar

    k = 1
    mu, bstar = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = int(round(mu[k, j]))
            if q:
                gkk_old = g[k][k]
                gkj = g[k][j]
                gjj = g[j][j]
                t[k] = [a - q * b for a, b in zip(t[k], t[j])]
                new_row = [g[k][i] - q * g[j][i] for i in range(n)]
                new_row[k] = gkk_old - 2 * q * gkj + q * q * gjj
                for i in range(n):
                    g[k][i] = new_row[i]
                    g[i][k] = new_row[i]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            t[k], t[k - 1] = t[k - 1], t[k]
            g[k], g[k - 1] = g[k - 1], g[k]
            for r in g:
                r[k], r[k - 1] = r[k - 1], r[k]
            mu, bstar = gso()
            k = max(k - 1, 1)
    return t, g
