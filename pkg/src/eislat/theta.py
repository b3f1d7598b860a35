"""Hermitian theta series of Eisenstein lattices in degrees 1-3 and the cusp-form checks.

The coefficient of an index T (a Hermitian n x n matrix) counts the G in O^{r x n} with
conj(G)^T H G = T.  Degree 1 reduces to counting trace-lattice vectors by norm; higher degrees
enumerate columns from lists of vectors of a given norm and filter them by exact Hermitian
inner products, computed from b(x, y) and b(x, w y).
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

from .arith import EisInt, HermitianMatrix, KScalar, OMEGA, units
from .hermitian import RANK12_LABELS, OLattice, hermitian_from_real, trace_lattice
from .zlattice.enumerate import ResourceGuardError, coset_norm_counts, enumerate_vectors
from .zlattice.intmat import inverse_rational, lll_gram, matmul, rational_hnf, smith_form, transpose
from .zlattice.lattice import Frame, VerificationError

__all__ = [
    "ThetaIndex",
    "ThetaTable",
    "ThetaCombo",
    "COMBOS",
    "STATED_G3_INDEX",
    "theta_deg1",
    "theta_coeff",
    "theta_deg2_table",
    "siegel_phi",
    "combo_coeffs",
    "delta_qexp",
    "cusp_check",
    "reduce_index2",
    "LatticeVectors",
]


# --- indices and tables --------------------------------------------------------------------

def _k(x) -> KScalar:
    if isinstance(x, KScalar):
        return x
    if isinstance(x, EisInt):
        return x.to_k()
    if isinstance(x, str):
        return KScalar.parse(x)
    return KScalar(Fraction(x))


@dataclass(frozen=True)
class ThetaIndex:
    """A Hermitian index T of a degree-n theta series."""

    T: HermitianMatrix

    def __post_init__(self):
        if not isinstance(self.T, HermitianMatrix):
            object.__setattr__(self, "T", HermitianMatrix([[_k(x) for x in r] for r in self.T]))

    @property
    def n(self) -> int:
        return self.T.n

    @classmethod
    def diag(cls, *d) -> "ThetaIndex":
        n = len(d)
        return cls(HermitianMatrix([[_k(d[i]) if i == j else KScalar() for j in range(n)]
                                    for i in range(n)]))

    @classmethod
    def deg2(cls, a, t, c) -> "ThetaIndex":
        t = _k(t)
        return cls(HermitianMatrix([[_k(a), t], [t.conj(), _k(c)]]))

    def is_admissible(self) -> bool:
        """Even integral diagonal and off-diagonal entries in theta^-1 O."""
        th = _k(OMEGA.to_k() * 2 - 1)
        for i in range(self.n):
            d = self.T[i, i].real
            if self.T[i, i].b != 0 or d.denominator != 1 or d % 2 or d < 0:
                return False
            for j in range(i + 1, self.n):
                x = self.T[i, j] * th
                if x.a.denominator != 1 or x.b.denominator != 1:
                    return False
        return True

    def is_psd(self) -> bool:
        # principal minors of a Hermitian matrix
        from itertools import combinations
        for k in range(1, self.n + 1):
            for idx in combinations(range(self.n), k):
                sub = HermitianMatrix([[self.T[i, j] for j in idx] for i in idx])
                if sub.det() < 0:
                    return False
        return True

    def key(self) -> str:
        return json.dumps(self.T.to_strings())

    def __str__(self):
        return self.key()


@dataclass
class ThetaTable:
    """Coefficients of one theta series; ``coeffs`` maps index keys to counts."""

    source: str
    degree: int
    coeffs: dict = field(default_factory=dict)
    bound: int = 0
    complete: bool = True

    def __getitem__(self, index) -> int:
        return self.coeffs[_key(index, self.degree)]

    def get(self, index, default=None):
        return self.coeffs.get(_key(index, self.degree), default)

    def to_json(self) -> str:
        return json.dumps({"source": self.source, "degree": self.degree, "bound": self.bound,
                           "complete": self.complete,
                           "coefficients": [[k, int(v)] for k, v in self.coeffs.items()]},
                          indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ThetaTable":
        d = json.loads(text)
        return cls(d["source"], d["degree"], {k: int(v) for k, v in d["coefficients"]},
                   d["bound"], d["complete"])

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "coefficient"])
        for k, v in self.coeffs.items():
            w.writerow([k, int(v)])
        return out.getvalue()

    def deg1_list(self) -> list[int]:
        """Degree-1 coefficients at 0, 2, 4, ... up to the bound."""
        return [self.coeffs.get(_key(ThetaIndex.diag(2 * m), 1), 0)
                for m in range(self.bound // 2 + 1)]


def _key(index, degree: int) -> str:
    if isinstance(index, str):
        return index
    if isinstance(index, ThetaIndex):
        idx = index
    elif isinstance(index, (int, Fraction)):
        idx = ThetaIndex.diag(index)
    else:
        idx = ThetaIndex(index)
    if idx.n == 2:
        idx = reduce_index2(idx)
    return idx.key()


# --- degree 1 ------------------------------------------------------------------------------

@dataclass
class _BlockData:
    gram: list                 # integral Gram of M_j (scaled by ``scale``)
    scale: int
    mbasis: list               # rows of M_j in block coordinates
    dbasis: list               # rows of D_j in block coordinates
    invariants: list           # nontrivial invariant factors of A_j = D_j / M_j
    v: list                    # Smith transform: D-coordinates x -> (x v) mod invariants
    comp: list                 # positions of the nontrivial factors in x v


def _lcm_den(rows) -> int:
    den = 1
    for r in rows:
        for x in r:
            d = Fraction(x).denominator
            den = den * d // gcd(den, d)
    return den


def _block_data(P, Pinv, c0: int, c1: int, gblock) -> tuple[_BlockData, list]:
    proj = [r[c0:c1] for r in P]
    dh, dden = rational_hnf(proj)
    dbasis = [[Fraction(x, dden) for x in r] for r in dh]
    cols = transpose([row for row in Pinv[c0:c1]])
    ch, cden = rational_hnf(cols)
    cbasis = [[Fraction(x, cden) for x in r] for r in ch]
    mbasis = transpose(inverse_rational(cbasis))
    f = matmul(mbasis, inverse_rational(dbasis))
    if any(x.denominator != 1 for r in f for x in r):
        raise VerificationError("frame block: M is not contained in D")
    u, s, v = smith_form([[int(x) for x in r] for r in f])
    k = len(s)
    comp = [i for i in range(k) if abs(s[i][i]) != 1]
    inv = [abs(s[i][i]) for i in comp]
    g = matmul(matmul(mbasis, [[Fraction(x) for x in r] for r in gblock]), transpose(mbasis))
    scale = _lcm_den(g)
    gint = [[int(x * scale) for x in r] for r in g]
    data = _BlockData(gint, scale, mbasis, dbasis, inv, v, comp)
    dinv = inverse_rational(dbasis)
    images = []
    for r in proj:
        x = matmul([r], dinv)[0]
        if any(c.denominator != 1 for c in x):
            raise VerificationError("frame block: projection outside D")
        y = matmul([[int(c) for c in x]], v)[0]
        images.append([y[i] % e for i, e in zip(comp, inv)])
    return data, images


def _elements(inv: Sequence[int]):
    import itertools
    return list(itertools.product(*[range(e) for e in inv]))


def _coset_series(bd: _BlockData, a, bound: int, unit: int | None = None) -> dict:
    """Norm distribution {Fraction: count} of the coset of M_j labelled by a in A_j."""
    k = len(bd.mbasis)
    y = [0] * k
    for pos, val in zip(bd.comp, a):
        y[pos] = val
    vinv = inverse_rational(bd.v)
    x = matmul([y], vinv)[0]
    amb = matmul([x], bd.dbasis)[0]
    center = matmul([amb], inverse_rational(bd.mbasis))[0]
    center = [c - (c.numerator // c.denominator) for c in center]
    res = coset_norm_counts(bd.gram, center, bound * bd.scale)
    return {Fraction(n) / bd.scale: c for n, c in res.items()}


def _quotient_map(gens: Sequence[tuple], mods: tuple):
    """Map x -> class of x modulo the subgroup spanned by ``gens`` in the sum of Z/mods."""
    k = len(mods)
    if k == 0:
        return np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64)
    rows = [[m if i == j else 0 for j in range(k)] for i, m in enumerate(mods)]
    rows += [list(g) for g in gens]
    _, s, v = smith_form(rows)
    keep = [i for i in range(k) if abs(s[i][i]) != 1]
    vm = np.array([[v[r][c] for c in keep] for r in range(k)], dtype=np.int64).reshape(k, len(keep))
    return vm, np.array([abs(s[i][i]) for i in keep], dtype=np.int64)


def _theta_frame(frame: Frame, bound: int, max_states: int = 2_000_000) -> list[int]:
    """Counts of lattice vectors of norm 0..bound through the frame's coset decomposition.

    L sits between M = sum of the M_j = L meet V_j and the sum of the projections D_j.  Summing
    products of coset theta series over L/M is a walk through the blocks whose state is the
    partial sum in (sum A_j) / (L/M); states that can no longer return to 0 are dropped.
    """
    P = [[Fraction(x) for x in r] for r in frame.basis]
    Pinv = inverse_rational(P)
    blocks, images, off = [], [], 0
    for g in frame.block_grams:
        bd, im = _block_data(P, Pinv, off, off + len(g), g)
        blocks.append(bd)
        images.append(im)
        off += len(g)
    # A = sum of the A_j as Z^K modulo the invariant factors; Q = L/M is spanned by the images
    slots, K = [], 0
    for bd in blocks:
        slots.append(K)
        K += len(bd.invariants)
    rel = []
    for j, bd in enumerate(blocks):
        for i, e in enumerate(bd.invariants):
            row = [0] * K
            row[slots[j] + i] = e
            rel.append(row)
    for b in range(len(P)):
        row = []
        for j in range(len(blocks)):
            row += images[j][b]
        rel.append(row)
    if K:
        _, s, v = smith_form(rel)
        keep = [i for i in range(K) if abs(s[i][i]) != 1]
        mods = tuple(abs(s[i][i]) for i in keep)
    else:
        v, keep, mods = [], [], ()

    def psi(j, a):
        y = [0] * K
        for i, val in enumerate(a):
            y[slots[j] + i] = val
        z = [sum(y[r] * v[r][c] for r in range(K)) for c in keep]
        return tuple(x % m for x, m in zip(z, mods))

    # coset series, indexed by norm * unit
    series, unit = [], 1
    for bd in blocks:
        row = {}
        for a in _elements(bd.invariants):
            row[a] = _coset_series(bd, a, bound)
            for nrm in row[a]:
                unit = unit * nrm.denominator // gcd(unit, nrm.denominator)
        series.append(row)
    length = bound * unit + 1
    arrays = []
    for j, row in enumerate(series):
        by_psi: dict[tuple, np.ndarray] = {}
        for a, dist in row.items():
            arr = np.zeros(length, dtype=object)
            arr[:] = 0
            for nrm, c in dist.items():
                arr[int(nrm * unit)] += c
            key = psi(j, a)
            if key in by_psi:
                by_psi[key] = by_psi[key] + arr
            else:
                by_psi[key] = arr
        arrays.append(by_psi)
    # a state reached after block j must be cancelled by the later blocks, so it lies in the
    # subgroup they span; test membership through the quotient by that subgroup
    m = len(blocks)
    unit_gens = []
    for j, bd in enumerate(blocks):
        unit_gens.append([psi(j, tuple(int(i == c) for c in range(len(bd.invariants))))
                          for i in range(len(bd.invariants))])
    quotients = []
    for j in range(m):
        later = [g for i in range(j + 1, m) for g in unit_gens[i]]
        quotients.append(_quotient_map(later, mods))
    md = np.array(mods, dtype=np.int64)
    zero = tuple(0 for _ in mods)
    states = {zero: np.array([1] + [0] * (length - 1), dtype=object)}
    for j in range(m):
        vm, qm = quotients[j]
        keys = list(states)
        parts = list(arrays[j].items())
        if not mods:
            pairs = [(s, p, s) for s in keys for p, _ in parts]
        else:
            sk = np.array(keys, dtype=np.int64).reshape(len(keys), len(mods))
            pk = np.array([p for p, _ in parts], dtype=np.int64).reshape(len(parts), len(mods))
            tk = (sk[:, None, :] + pk[None, :, :]) % md
            ok = np.all((tk @ vm) % qm == 0, axis=2) if len(qm) else np.ones(tk.shape[:2], bool)
            pairs = [(keys[a], parts[b][0], tuple(int(x) for x in tk[a, b]))
                     for a, b in zip(*np.nonzero(ok))]
        if len(pairs) > max_states:
            raise ResourceGuardError(f"frame walk needs {len(pairs)} products at block {j}")
        new: dict[tuple, np.ndarray] = {}
        for s, p, t in pairs:
            conv = np.convolve(states[s], arrays[j][p])[:length]
            new[t] = new[t] + conv if t in new else conv
        states = new
    total = states.get(zero)
    if total is None:
        raise VerificationError("frame walk lost the trivial class")
    out = [0] * (bound + 1)
    for i, c in enumerate(total):
        if c == 0:
            continue
        if i % unit:
            raise VerificationError("frame walk produced a non-integral norm")
        out[i // unit] += int(c)
    return out


def theta_deg1(lat: OLattice, bound: int, *, method: str = "auto") -> ThetaTable:
    """Degree-1 coefficients (vector counts by norm) for norms 0, 2, ..., bound.

    ``method`` is "frame" (coset walk through the lattice's block frame), "enumerate"
    (Fincke-Pohst counting on the trace lattice) or "auto".
    """
    bound = int(bound)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    zl, _ = trace_lattice(lat)
    use_frame = method == "frame" or (method == "auto" and zl.frame is not None)
    if use_frame:
        if zl.frame is None:
            raise ValueError(f"{lat.label} carries no frame")
        counts = _theta_frame(zl.frame, bound)
    elif method in ("enumerate", "auto"):
        red, _ = zl.lll()
        res = enumerate_vectors(red.gram, bound, include_zero=True, store=False)
        counts = [int(res.counts[k]) if k < len(res.counts) else 0 for k in range(bound + 1)]
    else:
        raise ValueError(f"unknown method {method!r}")
    if any(counts[k] for k in range(1, bound + 1, 2)):
        raise VerificationError("odd norm found in an even lattice")
    table = ThetaTable(lat.label, 1, bound=bound)
    for m in range(0, bound + 1, 2):
        table.coeffs[ThetaIndex.diag(m).key()] = counts[m]
    return table


# --- index reduction for degree 2 ----------------------------------------------------------

def _nearest_o(z: KScalar) -> KScalar:
    """An element of O closest to z."""
    qa, qb = round(z.a), round(z.b)
    best = None
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            q = KScalar(qa + da, qb + db)
            d = (z - q).norm()
            if best is None or d < best[0]:
                best = (d, q)
    return best[1]


def _order_key(x: KScalar) -> tuple:
    return (x.a, x.b)


def reduce_index2(index) -> ThetaIndex:
    """A reduced representative of a 2x2 index under T -> conj(U)^T T U, U in GL(2, O).

    The diagonal is sorted, the off-diagonal entry t is reduced modulo aO to minimal norm, and
    among the remaining choices (boundary translates, unit twists and, when both diagonal entries
    agree, the swap t -> conj(t)) the entry with the smallest coordinates is taken.
    """
    idx = index if isinstance(index, ThetaIndex) else ThetaIndex(index)
    if idx.n != 2:
        raise ValueError("reduce_index2 expects a 2x2 index")
    a, c, t = idx.T[0, 0].real, idx.T[1, 1].real, idx.T[0, 1]
    while True:
        if c < a:
            a, c, t = c, a, t.conj()
        if a == 0:
            break
        lam = _nearest_o(-t / a)
        t2 = t + lam * a
        c2 = c + (t2.norm() - t.norm()) / a
        t, c = t2, c2
        if c >= a:
            break
    if a == 0:
        if t != 0:
            raise ValueError("index is not positive semidefinite")
        return ThetaIndex.deg2(0, KScalar(), c)
    base = [t] + [t + u.to_k() * a for u in units() if (t + u.to_k() * a).norm() == t.norm()]
    cands = []
    for s in base:
        for u in units():
            cands.append(u.to_k() * s)
            if a == c:
                cands.append(u.to_k() * s.conj())
    best = min(cands, key=_order_key)
    return ThetaIndex.deg2(a, best, c)


# --- vectors by norm and orbits ------------------------------------------------------------

@numba.njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@numba.njit(cache=True)
def _union_perm(parent, perm):
    for i in range(perm.shape[0]):
        a = _find(parent, i)
        b = _find(parent, perm[i])
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b


@numba.njit(cache=True)
def _row_hash(row, w):
    h = np.int64(0)
    for j in range(row.shape[0]):
        h += np.int64(row[j]) * w[j]
    return h


@numba.njit(cache=True)
def _build_table(vecs, w, mask):
    # slot k holds (hash, index) at positions 2k, 2k + 1; index -1 marks an empty slot
    table = np.full(2 * (mask + 1), -1, dtype=np.int64)
    for i in range(vecs.shape[0]):
        h = _row_hash(vecs[i], w)
        slot = h & mask
        while table[2 * slot + 1] >= 0:
            slot = (slot + 1) & mask
        table[2 * slot] = h
        table[2 * slot + 1] = i
    return table


@numba.njit(cache=True)
def _lookup_row(table, vecs, mask, row, h):
    slot = h & mask
    while table[2 * slot + 1] >= 0:
        if table[2 * slot] == h:
            i = table[2 * slot + 1]
            same = True
            for j in range(row.shape[0]):
                if vecs[i, j] != row[j]:
                    same = False
                    break
            if same:
                return i
        slot = (slot + 1) & mask
    return -1


@numba.njit(cache=True)
def _probe(table, vecs, w, mask, rows):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for r in range(rows.shape[0]):
        out[r] = _lookup_row(table, vecs, mask, rows[r], _row_hash(rows[r], w))
    return out


@numba.njit(cache=True)
def _perm_sparse(vecs, ptr, idx, val, table, w, mask, signed):
    """Index of x @ h for every row x, with h given by its nonzero entries column by column.

    With ``signed`` the rows are representatives of +-pairs (first nonzero entry positive) and
    images are normalized the same way.
    """
    n, d = vecs.shape
    out = np.empty(n, dtype=np.int64)
    img = np.empty(d, dtype=np.int64)
    for r in range(n):
        sign = 0
        for j in range(d):
            s = np.int64(0)
            for p in range(ptr[j], ptr[j + 1]):
                s += np.int64(vecs[r, idx[p]]) * val[p]
            img[j] = s
            if sign == 0 and s != 0:
                sign = 1 if s > 0 else -1
        if signed and sign < 0:
            for j in range(d):
                img[j] = -img[j]
        h = np.int64(0)
        for j in range(d):
            h += img[j] * w[j]
        out[r] = _lookup_row(table, vecs, mask, img, h)
    return out


class _Lookup:
    """Open-addressing hash index of int8 row vectors; every hit is verified coordinatewise."""

    def __init__(self, vecs: np.ndarray, seed: int = 2024):
        rng = np.random.default_rng(seed)
        self.vecs = np.ascontiguousarray(vecs)
        self.w = rng.integers(-(1 << 62), 1 << 62, size=vecs.shape[1], dtype=np.int64)
        size = 1 << max(4, int(2 * len(vecs)).bit_length())
        self.mask = size - 1
        self.table = _build_table(self.vecs, self.w, self.mask)

    def find(self, rows: np.ndarray) -> np.ndarray:
        """Indices of ``rows`` in the indexed array, -1 where absent."""
        return _probe(self.table, self.vecs, self.w, self.mask,
                      np.ascontiguousarray(rows, dtype=np.int8))

    def permutation(self, h: np.ndarray, signed: bool = False) -> np.ndarray:
        """The permutation x -> x @ h of the indexed rows (-1 where the image is absent)."""
        h = np.asarray(h, dtype=np.int64)
        ptr, idx, val = [0], [], []
        for j in range(h.shape[1]):
            nz = np.flatnonzero(h[:, j])
            idx.extend(nz.tolist())
            val.extend(h[nz, j].tolist())
            ptr.append(len(idx))
        return _perm_sparse(self.vecs, np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64),
                            np.array(val, dtype=np.int64), self.table, self.w, self.mask, signed)


class LatticeVectors:
    """Trace-lattice vectors of an O-lattice grouped by norm, for column enumeration.

    Vectors are stored as int8 rows in an LLL-reduced basis.  ``gram`` gives b(x, y) and ``form``
    gives b(x, w y) in that basis; ``gens`` are unitary automorphisms acting on rows.
    """

    CHUNK = 1 << 19

    def __init__(self, lat: OLattice, max_norm: int, *, group=None, max_vectors: int = 40_000_000):
        zl, B = trace_lattice(lat)
        t, _ = lll_gram(zl.gram)
        T = np.array(t, dtype=np.int64)
        G = zl.array()
        self.label = lat.label
        self.T = T
        self.gram = T @ G @ T.T
        self.form = T @ (G @ B.array()) @ T.T
        self.max_norm = int(max_norm)
        est = enumerate_vectors(self.gram, self.max_norm, half=True, store=False,
                                max_vectors=10 ** 12)
        if est.total > max_vectors:
            raise ResourceGuardError(
                f"{2 * est.total} vectors of norm <= {max_norm} exceed the budget of {max_vectors}")
        res = enumerate_vectors(self.gram, self.max_norm, half=True, max_vectors=max_vectors)
        v = res.vectors
        if len(v) and np.abs(v).max() > 127:
            raise ResourceGuardError("coordinates too large for compact storage")  # pragma: no cover
        v8 = v.astype(np.int8)
        del v
        norms = self._norms(v8)
        self.by_norm: dict[int, np.ndarray] = {0: np.zeros((1, len(G)), dtype=np.int8)}
        for m in range(2, self.max_norm + 1, 2):
            half = v8[norms == m]
            # representatives of +-pairs with first nonzero coordinate positive
            first = half[np.arange(len(half)), np.argmax(half != 0, axis=1)]
            half = np.where((first < 0)[:, None], -half, half)
            self.by_norm[m] = np.concatenate([half, -half])
        self._gens = None
        if group is not None:
            self.set_group(group)
        self._orbits: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _norms(self, v8: np.ndarray) -> np.ndarray:
        out = np.empty(len(v8), dtype=np.int64)
        gf = self.gram.astype(np.float64)
        for s in range(0, len(v8), self.CHUNK):
            x = v8[s:s + self.CHUNK].astype(np.float64)
            out[s:s + self.CHUNK] = np.rint(np.einsum("ij,ij->i", x @ gf, x)).astype(np.int64)
        return out

    def set_group(self, gens) -> None:
        """Register automorphisms (column convention on the standard trace basis)."""
        Tinv = np.rint(np.linalg.inv(self.T.astype(np.float64))).astype(np.int64)
        if not np.array_equal(self.T @ Tinv, np.eye(len(self.T), dtype=np.int64)):
            raise VerificationError("basis change is not unimodular")  # pragma: no cover
        out = []
        for g in gens:
            h = self.T @ np.asarray(g, dtype=np.int64).T @ Tinv  # row action x -> x h
            if not (np.array_equal(h @ self.gram @ h.T, self.gram)
                    and np.array_equal(h @ self.form @ h.T, self.form)):
                raise VerificationError("generator does not preserve the Hermitian form")
            out.append(h)
        self._gens = out
        self._orbits = {}

    def vectors(self, norm: int) -> np.ndarray:
        if norm > self.max_norm:
            raise ResourceGuardError(f"norm {norm} is above the enumerated bound {self.max_norm}")
        return self.by_norm.get(norm, np.zeros((0, len(self.gram)), dtype=np.int8))

    def orbits(self, norm: int) -> tuple[np.ndarray, np.ndarray]:
        """Orbit representatives (indices into ``vectors(norm)``) and orbit sizes.

        Orbits are taken under the registered generators together with -1 (always a unitary
        automorphism); the walk runs on the first half of the list, one vector per +-pair.
        """
        if norm in self._orbits:
            return self._orbits[norm]
        vecs = self.vectors(norm)
        n = len(vecs)
        if self._gens is None or n <= 1:
            reps, sizes = np.arange(n), np.ones(n, dtype=np.int64)
        else:
            half = vecs[: n // 2]
            look = _Lookup(half)
            parent = np.arange(len(half), dtype=np.int64)
            for h in self._gens:
                perm = look.permutation(h, signed=True)
                if np.any(perm < 0):
                    raise VerificationError("automorphism does not permute the vectors")
                _union_perm(parent, perm)
                del perm
            reps, sizes = np.unique(_all_roots(parent), return_counts=True)
            sizes = 2 * sizes
        self._orbits[norm] = (reps, sizes.astype(np.int64))
        return self._orbits[norm]

    def products(self, rows: np.ndarray) -> np.ndarray:
        """Columns [G x, F^T x] for each row x, so that y @ result gives (b(x, y), b(x, w y))."""
        x = np.atleast_2d(rows).astype(np.float64)
        return np.concatenate([(x @ self.gram.T).T, (x @ self.form).T], axis=0)


@numba.njit(cache=True)
def _all_roots(parent):
    out = np.empty(parent.shape[0], dtype=np.int64)
    for i in range(parent.shape[0]):
        out[i] = _find(parent, i)
    return out


def _target(t: KScalar) -> tuple[int, int] | None:
    """(b, b(., w .)) values realizing the Hermitian entry t, or None if t is no Gram value."""
    b = t.real
    bb = (OMEGA.to_k() * t).real
    if b.denominator != 1 or bb.denominator != 1:
        return None
    return int(b), int(bb)


def _pair_counts(vecs: LatticeVectors, a: int, c: int, threads: int = 1) -> dict:
    """{(b, bb): count} over pairs (x, y) with norms (a, c) and b(x,y)=b, b(x,wy)=bb."""
    reps, sizes = vecs.orbits(a)
    xs = vecs.vectors(a)[reps]
    ys = vecs.vectors(c)
    if len(xs) == 0 or len(ys) == 0:
        return {}
    lim = int(np.ceil(np.sqrt(a * c))) + 1
    width = 2 * lim + 1
    total = np.zeros((len(xs), width * width), dtype=np.int64)
    batch = 64

    def work(s0):
        out = np.zeros((len(xs), width * width), dtype=np.int64)
        y = ys[s0:s0 + LatticeVectors.CHUNK].astype(np.float32)
        for r0 in range(0, len(xs), batch):
            pr = vecs.products(xs[r0:r0 + batch])
            p_b = np.rint(y @ pr[: len(vecs.gram)].astype(np.float32)).astype(np.int64)
            p_w = np.rint(y @ pr[len(vecs.gram):].astype(np.float32)).astype(np.int64)
            codes_ = (p_b + lim) * width + (p_w + lim)
            for i in range(codes_.shape[1]):
                out[r0 + i] += np.bincount(codes_[:, i], minlength=width * width)
        return out

    starts = list(range(0, len(ys), LatticeVectors.CHUNK))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for part in ex.map(work, starts):
                total += part
    else:
        for s0 in starts:
            total += work(s0)
    weighted = sizes @ total
    out = {}
    for code in np.nonzero(weighted)[0]:
        out[(int(code // width) - lim, int(code % width) - lim)] = int(weighted[code])
    return out


# --- coefficients in degrees 2 and 3 -------------------------------------------------------

def _group_gens(lat: OLattice, group):
    if group is None:
        return None
    if isinstance(group, str):
        if group != "auto":
            raise ValueError(f"unknown group option {group!r}")
        from .hermitian import unitary_aut
        return unitary_aut(lat).zgroup.generators
    return list(group)


def _diag_of(T: ThetaIndex) -> list[int] | None:
    out = []
    for i in range(T.n):
        d = T.T[i, i]
        if d.b != 0 or d.a.denominator != 1 or d.a < 0 or d.a % 2:
            return None
        out.append(int(d.a))
    return out


def theta_coeff(lat: OLattice, index, *, vectors: LatticeVectors | None = None,
                group="auto", max_vectors: int = 40_000_000) -> int:
    """The number of G in O^{r x n} with conj(G)^T H G = T, for n <= 3.

    Columns are drawn from the lists of trace-lattice vectors of norm T_jj; for the first column
    only orbit representatives under the unitary group are used, weighted by orbit length.
    """
    T = index if isinstance(index, ThetaIndex) else ThetaIndex(index)
    if T.n == 0:
        return 1
    if T.n > 3:
        raise ValueError("theta_coeff supports degree <= 3")
    d = _diag_of(T)
    if d is None or not T.is_psd():
        return 0
    targets = {}
    for i in range(T.n):
        for j in range(i + 1, T.n):
            tg = _target(T.T[i, j])
            if tg is None:
                return 0
            targets[i, j] = tg
    if vectors is None or vectors.max_norm < max(d):
        vectors = LatticeVectors(lat, max(d), group=_group_gens(lat, group),
                                 max_vectors=max_vectors)
    if T.n == 1:
        return len(vectors.vectors(d[0]))
    reps, sizes = vectors.orbits(d[0])
    xs = vectors.vectors(d[0])[reps]
    n_amb = len(vectors.gram)
    ys = [vectors.vectors(d[k]).astype(np.float64) for k in range(1, T.n)]
    total = 0
    for x, size in zip(xs, sizes):
        pr = vectors.products(x[None, :])
        masks = []
        for k, y in enumerate(ys, start=1):
            tb, tw = targets[0, k]
            vb = np.rint(y @ pr[:n_amb, 0])
            vw = np.rint(y @ pr[n_amb:, 0])
            masks.append((vb == tb) & (vw == tw))
        if T.n == 2:
            total += int(size) * int(masks[0].sum())
            continue
        c2 = ys[0][masks[0]]
        c3 = ys[1][masks[1]]
        if len(c2) == 0 or len(c3) == 0:
            continue
        p2 = vectors.products(c2)
        tb, tw = targets[1, 2]
        vb = np.rint(c3 @ p2[:n_amb])
        vw = np.rint(c3 @ p2[n_amb:])
        total += int(size) * int(np.count_nonzero((vb == tb) & (vw == tw)))
    return total


def theta_deg2_table(lat: OLattice, max_diag: int, *, vectors: LatticeVectors | None = None,
                     group="auto", threads: int = 1,
                     max_vectors: int = 40_000_000) -> ThetaTable:
    """All degree-2 coefficients with both diagonal entries <= max_diag, keyed by reduced index.

    Every pair of norms a <= c is counted by the inner-product histogram of orbit
    representatives of norm a against all vectors of norm c.  Entries that reduce to the same
    index must agree; this is checked.
    """
    max_diag = int(max_diag)
    complete = True
    if vectors is None or vectors.max_norm < max_diag:
        gens = _group_gens(lat, group)
        while True:
            try:
                vectors = LatticeVectors(lat, max_diag, group=gens, max_vectors=max_vectors)
                break
            except ResourceGuardError:
                # shrink the diagonal budget; the table is then flagged incomplete
                if max_diag <= 0:
                    raise
                max_diag -= 2
                complete = False
    table = ThetaTable(lat.label, 2, bound=max_diag, complete=complete)
    for a in range(0, max_diag + 1, 2):
        for c in range(a, max_diag + 1, 2):
            for (b, bb), cnt in _pair_counts(vectors, a, c, threads).items():
                t = hermitian_from_real(b, bb)
                key = reduce_index2(ThetaIndex.deg2(a, t, c)).key()
                old = table.coeffs.get(key)
                if old is not None and old != cnt:
                    raise VerificationError(f"equivalent indices with different counts at {key}")
                table.coeffs[key] = cnt
    table.coeffs = dict(sorted(table.coeffs.items(), key=lambda kv: _index_sort_key(kv[0])))
    return table


def _index_sort_key(key: str):
    rows = json.loads(key)
    T = [[KScalar.parse(x) for x in r] for r in rows]
    tr = sum((T[i][i].real for i in range(len(T))), Fraction(0))
    return (tr, [[(x.a, x.b) for x in r] for r in T])


def siegel_phi(table: ThetaTable) -> ThetaTable:
    """Coefficient-level Siegel phi: the degree n-1 table T' -> a(diag(T', 0))."""
    if table.degree < 1:
        raise ValueError("phi needs degree >= 1")
    out = ThetaTable(table.source, table.degree - 1, bound=table.bound, complete=table.complete)
    if table.degree == 1:
        out.coeffs[ThetaIndex(HermitianMatrix([])).key()] = table.get(ThetaIndex.diag(0), 0)
        return out
    if table.degree == 2:
        for m in range(0, table.bound + 1, 2):
            v = table.get(ThetaIndex.diag(m, 0))
            if v is not None:
                out.coeffs[ThetaIndex.diag(m).key()] = v
        return out
    raise ValueError("phi is implemented for tables of degree <= 2")


# --- combinations and cusp checks ----------------------------------------------------------

@dataclass(frozen=True)
class ThetaCombo:
    """An integer combination of theta series of the five rank-12 lattices."""

    name: str
    terms: tuple  # (coefficient, lattice label) pairs
    degree: int

    @property
    def labels(self) -> list[str]:
        return [lab for c, lab in self.terms if c]

    def coefficient_sum(self) -> int:
        return sum(c for c, _ in self.terms)


def _combo(name: str, coeffs: Sequence[int], degree: int) -> ThetaCombo:
    return ThetaCombo(name, tuple(zip(coeffs, RANK12_LABELS)), degree)


COMBOS = {
    "F": _combo("F", (1, -30, 135, -160, 54), 2),
    "G": _combo("G", (0, 1, -6, 8, -3), 3),
    "H": _combo("H", (0, 0, 1, -2, 1), 2),
    "J": _combo("J", (0, 0, 0, 1, -1), 1),
}

# The 3x3 index of the degree-3 G check, in the reading where the printed w stands for
# theta = 2w - 1 (the printed entries are not values of any Eisenstein Gram matrix).
_TH = KScalar(-1, 2)
STATED_G3_INDEX = ThetaIndex(HermitianMatrix([
    [KScalar(4), _TH * Fraction(4, 3), 1 + _TH / 3],
    [(_TH * Fraction(4, 3)).conj(), KScalar(4), _TH * Fraction(-2, 3)],
    [(1 + _TH / 3).conj(), (_TH * Fraction(-2, 3)).conj(), KScalar(4)],
]))
_W = OMEGA.to_k()
STATED_G3_AS_PRINTED = ThetaIndex(HermitianMatrix([
    [KScalar(4), _W * Fraction(4, 3), 1 + _W / 3],
    [(_W * Fraction(4, 3)).conj(), KScalar(4), _W * Fraction(-2, 3)],
    [(1 + _W / 3).conj(), (_W * Fraction(-2, 3)).conj(), KScalar(4)],
]))


def combo_coeffs(combo: ThetaCombo, indices: Sequence, *, tables: Mapping[str, ThetaTable] | None = None,
                 lattices: Mapping[str, OLattice] | None = None) -> list[int]:
    """Values of the combination at the given indices.

    With ``tables`` the per-lattice coefficients are looked up (absent admissible indices count
    as 0); otherwise they are computed with theta_coeff.
    """
    out = []
    for index in indices:
        total = 0
        for c, lab in combo.terms:
            if not c:
                continue
            if tables is not None:
                deg = tables[lab].degree
                total += c * tables[lab].get(_key(index, deg), 0)
            else:
                from .hermitian import build_rank12
                lat = (lattices or {}).get(lab) or build_rank12(lab)
                total += c * theta_coeff(lat, index)
        out.append(total)
    return out


def delta_qexp(N: int) -> list[int]:
    """Coefficients tau(0..N) of q * prod (1 - q^n)^24."""
    p = [1] + [0] * N
    for n in range(1, N + 1):
        for _ in range(24):
            for i in range(N, n - 1, -1):
                p[i] -= p[i - n]
    return [0] + p[:N]


STATED_J_CONSTANT = 720


def _tables(combo: ThetaCombo, degree: int, bound: int, threads: int, lattices) -> dict:
    from .hermitian import build_rank12
    out = {}
    for lab in combo.labels:
        lat = (lattices or {}).get(lab) or build_rank12(lab)
        if degree == 1:
            out[lab] = theta_deg1(lat, bound)
        elif degree == 2:
            out[lab] = theta_deg2_table(lat, bound, threads=threads)
        else:
            raise ValueError("tables are built for degree 1 and 2")
    return out


def cusp_check(combo: ThetaCombo, bound: int, *, degree: int | None = None,
               indices: Sequence | None = None, tables: Mapping[str, ThetaTable] | None = None,
               threads: int = 1, lattices: Mapping[str, OLattice] | None = None) -> dict:
    """Check that phi of the combination vanishes up to ``bound`` and look for a nonzero value.

    For degree <= 2 the candidate indices are all computed ones; for degree 3 the witness search
    runs over ``indices`` and the phi image is the degree-2 combination.
    """
    degree = combo.degree if degree is None else degree
    report = {"form": combo.name, "degree": degree, "bound": bound,
              "coefficients": [[c, lab] for c, lab in combo.terms]}
    if degree == 1:
        tabs = tables or _tables(combo, 1, bound, threads, lattices)
        idx = [ThetaIndex.diag(m) for m in range(0, bound + 1, 2)]
        vals = combo_coeffs(combo, idx, tables=tabs)
        phi_vals = [combo.coefficient_sum()]
        report["values"] = {str(m): v for m, v in zip(range(0, bound + 1, 2), vals)}
        report["raw_counts"] = {lab: tabs[lab].deg1_list() for lab in combo.labels}
        report["phi_image_zero"] = all(v == 0 for v in phi_vals)
        wit = next(((i, v) for i, v in zip(idx, vals) if v), None)
        if vals[0] == 0 and wit is not None:
            tau = delta_qexp(bound // 2)
            first = next(m for m in range(1, len(tau)) if vals[m])
            c = Fraction(vals[first], tau[first])
            report["delta_constant"] = int(c) if c.denominator == 1 else str(c)
            report["proportional_to_delta"] = all(vals[m] == c * tau[m] for m in range(len(tau)))
            if combo.name == "J":
                report["stated_constant"] = STATED_J_CONSTANT
                report["stated_constant_matches"] = c == STATED_J_CONSTANT
    else:
        if degree == 2:
            tabs = tables or _tables(combo, 2, bound, threads, lattices)
            keys = sorted(set().union(*(t.coeffs for t in tabs.values())), key=_index_sort_key)
            vals = combo_coeffs(combo, keys, tables=tabs)
            phi_tabs = {lab: siegel_phi(t) for lab, t in tabs.items()}
            phi_idx = [ThetaIndex.diag(m) for m in range(0, bound + 1, 2)]
            phi_vals = combo_coeffs(combo, phi_idx, tables=phi_tabs)
            report["values"] = dict(zip(keys, vals))
            report["raw_counts"] = {lab: {k: tabs[lab].coeffs.get(k, 0) for k in keys}
                                    for lab in combo.labels}
            wit = next(((k, v) for k, v in zip(keys, vals) if v), None)
        elif degree == 3:
            tabs = tables or _tables(combo, 2, bound, threads, lattices)
            phi_idx = sorted(set().union(*(t.coeffs for t in tabs.values())), key=_index_sort_key)
            phi_vals = combo_coeffs(combo, phi_idx, tables=tabs)
            idx = list(indices or [STATED_G3_INDEX])
            raw = {}
            from .hermitian import build_rank12
            for lab in combo.labels:
                lat = (lattices or {}).get(lab) or build_rank12(lab)
                raw[lab] = [theta_coeff(lat, i) for i in idx]
            vals = [sum(c * raw[lab][k] for c, lab in combo.terms if c) for k in range(len(idx))]
            report["values"] = {ThetaIndex(i).key() if not isinstance(i, ThetaIndex) else i.key(): v
                                for i, v in zip(idx, vals)}
            report["raw_counts"] = raw
            wit = next(((i, v) for i, v in zip(idx, vals) if v), None)
        else:
            raise ValueError("degree must be 1, 2 or 3")
        report["phi_image_zero"] = all(v == 0 for v in phi_vals)
        report["phi_nonzero"] = [[str(i), v] for i, v in zip(phi_idx, phi_vals) if v]
    if wit is None:
        report["nonzero_witness"] = None
        report["status"] = "inconclusive"
    else:
        i, v = wit
        report["nonzero_witness"] = {"index": i if isinstance(i, str) else i.key(), "value": v}
        report["status"] = "ok"
    return report
