"""Fincke-Pohst enumeration of lattice vectors (and coset vectors) below a norm bound.

The search tree is pruned with a floating-point LDL^T decomposition of the Gram matrix;
every reported vector carries its norm computed exactly in integer arithmetic, and only
the exact norm decides membership.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd, isqrt, sqrt
from typing import Sequence

import numba
import numpy as np

__all__ = ["enumerate_vectors", "coset_norm_counts", "EnumerationResult", "ResourceGuardError"]


class ResourceGuardError(RuntimeError):
    """Raised when an enumeration would exceed its configured budget."""


@numba.njit(cache=True, nogil=True)
def _ldl(g):
    n = g.shape[0]
    a = g.astype(np.float64).copy()
    q = np.zeros((n, n))
    for i in range(n):
        q[i, i] = a[i, i]
        for j in range(i + 1, n):
            q[i, j] = a[i, j] / a[i, i]
        for k in range(i + 1, n):
            for l in range(k, n):
                a[k, l] -= a[i, k] * a[i, l] / a[i, i]
                a[l, k] = a[k, l]
    return q


@numba.njit(cache=True, nogil=True)
def _fp_kernel(q, g, cnum, den, bound_scaled, top_lo, top_hi, half, include_zero,
               store, out, hist):
    """Enumerate x in Z^n with (den*x + cnum)^T g (den*x + cnum) <= bound_scaled.

    Returns the number of vectors found; stores at most out.shape[0] of them.
    hist[k] counts vectors of exact scaled norm k.
    """
    n = g.shape[0]
    cap = out.shape[0]
    c = cnum.astype(np.float64) / den
    bound_f = bound_scaled / (den * den)
    slack = 1e-7 * (1.0 + bound_f)
    x = np.zeros(n, np.int64)
    upper = np.zeros(n, np.int64)
    rem = np.zeros(n + 1)
    nex = np.zeros(n + 1, np.int64)
    tex = np.zeros(n, np.int64)
    ctr = np.zeros(n)
    zero_above = np.zeros(n + 1, np.bool_)
    zero_above[n] = True
    count = 0

    i = n - 1
    # level setup
    ctr[i] = 0.0
    tex[i] = 0
    r = sqrt(max(0.0, (bound_f + slack - rem[i + 1]) / q[i, i]))
    lo = np.int64(np.ceil(ctr[i] - c[i] - r))
    hi = np.int64(np.floor(ctr[i] - c[i] + r))
    if half and lo < 0:
        lo = 0
    if lo < top_lo:
        lo = top_lo
    if hi > top_hi:
        hi = top_hi
    x[i] = lo
    upper[i] = hi
    while True:
        if x[i] > upper[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        yi = x[i] + c[i]
        d = yi - ctr[i]
        val = rem[i + 1] + q[i, i] * d * d
        zi = den * x[i] + cnum[i]
        ni = nex[i + 1] + g[i, i] * zi * zi + 2 * zi * tex[i]
        if val > bound_f + slack:
            x[i] += 1
            continue
        if i == 0:
            isz = zero_above[1] and x[0] == 0
            if ni <= bound_scaled and (include_zero or not isz):
                if ni >= 0:
                    hist[ni] += 1
                if store and count < cap:
                    for k in range(n):
                        out[count, k] = x[k]
                count += 1
            x[0] += 1
            continue
        rem[i] = val
        nex[i] = ni
        zero_above[i] = zero_above[i + 1] and x[i] == 0
        i -= 1
        s = 0.0
        t = 0
        for j in range(i + 1, n):
            s -= q[i, j] * (x[j] + c[j])
            t += g[i, j] * (den * x[j] + cnum[j])
        ctr[i] = s
        tex[i] = t
        r = sqrt(max(0.0, (bound_f + slack - rem[i + 1]) / q[i, i]))
        lo = np.int64(np.ceil(ctr[i] - c[i] - r))
        hi = np.int64(np.floor(ctr[i] - c[i] + r))
        if half and zero_above[i + 1] and lo < 0:
            lo = 0
        x[i] = lo
        upper[i] = hi
    return count


@dataclass
class EnumerationResult:
    """Vectors (rows, lattice coordinates) and exact counts by norm.

    ``counts[k]`` is the number of vectors of norm ``k / scale``.  With ``half=True`` only one
    vector of each +-pair is listed and counted.
    """

    vectors: np.ndarray | None
    counts: np.ndarray
    scale: int
    total: int


def _top_range(q, bound_f):
    n = q.shape[0]
    r = sqrt(max(0.0, bound_f * (1 + 1e-7) + 1e-7) / q[n - 1, n - 1])
    return int(np.ceil(-r)), int(np.floor(r))


def enumerate_vectors(gram, bound, *, center: Sequence | None = None, half: bool = False,
                      include_zero: bool = False, store: bool = True, threads: int = 1,
                      max_vectors: int = 50_000_000) -> EnumerationResult:
    """Enumerate all x + center (x integral) with norm <= bound under ``gram``.

    ``center`` is an optional rational shift (lattice coordinates).  Work is split over the
    outermost coordinate into ``threads`` contiguous chunks; the merged result is independent
    of the split.
    """
    g = np.array(gram, dtype=np.int64)
    n = g.shape[0]
    if center is None:
        den, cnum = 1, np.zeros(n, np.int64)
    else:
        fr = [Fraction(v) for v in center]
        den = 1
        for v in fr:
            den = den * v.denominator // gcd(den, v.denominator)
        cnum = np.array([int(v * den) for v in fr], dtype=np.int64)
        if half and any(cnum):
            raise ValueError("half enumeration needs an unshifted lattice")
    bound = Fraction(bound)
    bound_scaled = floor(bound * den * den)
    q = _ldl(g)
    lo, hi = _top_range(q, float(bound))
    lo -= abs(int(np.ceil(cnum[-1] / den))) + 1
    hi += abs(int(np.ceil(cnum[-1] / den))) + 1
    if half:
        lo = max(lo, 0)
    edges = np.linspace(lo, hi + 1, max(1, threads) + 1).astype(np.int64)
    chunks = [(int(edges[k]), int(edges[k + 1]) - 1) for k in range(len(edges) - 1)
              if edges[k + 1] > edges[k]]

    def run(chunk, cap):
        out = np.zeros((cap, n), np.int32)
        hist = np.zeros(bound_scaled + 1, np.int64)
        cnt = _fp_kernel(q, g, cnum, den, bound_scaled, chunk[0], chunk[1], half, include_zero,
                         store, out, hist)
        return cnt, out, hist

    def run_chunk(chunk):
        cap = 1024 if store else 0
        cnt, out, hist = run(chunk, cap)
        if store and cnt > cap:
            if cnt > max_vectors:
                raise ResourceGuardError(f"{cnt} vectors exceed the budget of {max_vectors}")
            cnt, out, hist = run(chunk, cnt)
        return cnt, out[:cnt] if store else None, hist

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run_chunk, chunks))
    else:
        parts = [run_chunk(ch) for ch in chunks]
    total = sum(p[0] for p in parts)
    if total > max_vectors:
        raise ResourceGuardError(f"{total} vectors exceed the budget of {max_vectors}")
    counts = np.sum([p[2] for p in parts], axis=0)
    vectors = np.concatenate([p[1] for p in parts]) if store else None
    return EnumerationResult(vectors, counts, den * den, int(total))


def coset_norm_counts(gram, center, bound) -> dict[Fraction, int]:
    """Exact norm distribution {norm: count} of the coset center + Z^n up to ``bound``."""
    res = enumerate_vectors(gram, bound, center=center, include_zero=True, store=False)
    return {Fraction(k, res.scale): int(c) for k, c in enumerate(res.counts) if c}
