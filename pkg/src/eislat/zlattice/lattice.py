"""Integral Z-lattices given by Gram matrices, root lattices, glue and short vectors."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import codes
from .enumerate import enumerate_vectors
from .intmat import det_int, det_rational, identity, inverse_rational, lll_gram, matmul, \
    rational_hnf, transpose

__all__ = [
    "ZLattice",
    "Frame",
    "GlueCode",
    "ShortVectors",
    "root_lattice",
    "short_vectors",
    "glue",
    "glue_code_from_words",
    "niemeier",
    "orthogonal_sum",
    "VerificationError",
    "e8_from_d8",
    "verify_niemeier",
    "NIEMEIER_ROOTS",
]


class VerificationError(RuntimeError):
    """A constructed object failed one of its mechanical checks."""


@dataclass(frozen=True)
class Frame:
    """Embedding of a lattice into an orthogonal sum of blocks.

    ``basis`` holds the lattice basis as rows in ambient coordinates; the ambient space is the
    orthogonal sum of spaces with Gram matrices ``block_grams`` (rational entries allowed).
    """

    basis: tuple
    block_grams: tuple

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.block_grams]

    def ambient_gram(self) -> list[list[Fraction]]:
        n = sum(self.sizes)
        out = [[Fraction(0)] * n for _ in range(n)]
        off = 0
        for g in self.block_grams:
            for i, row in enumerate(g):
                for j, v in enumerate(row):
                    out[off + i][off + j] = Fraction(v)
            off += len(g)
        return out

    def transformed(self, u: Sequence[Sequence[int]]) -> "Frame":
        return Frame(_frozen(matmul(u, self.basis)), self.block_grams)


def _frozen(m) -> tuple:
    return tuple(tuple(row) for row in m)


@dataclass(frozen=True, eq=False)
class ZLattice:
    """An integral positive definite lattice, stored through its Gram matrix."""

    gram: tuple
    label: str = ""
    provenance: str = ""
    frame: Frame | None = field(default=None, repr=False)

    def __post_init__(self):
        g = tuple(tuple(int(v) for v in row) for row in self.gram)
        n = len(g)
        if any(len(r) != n for r in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        for k in range(1, n + 1):
            if det_int([r[:k] for r in g[:k]]) <= 0:
                raise ValueError("Gram matrix is not positive definite")
        object.__setattr__(self, "gram", g)

    @property
    def n(self) -> int:
        return len(self.gram)

    def __eq__(self, other):
        return isinstance(other, ZLattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def array(self) -> np.ndarray:
        return np.array(self.gram, dtype=np.int64).reshape(self.n, self.n)

    def det(self) -> int:
        return det_int(self.gram)

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.n))

    def is_unimodular(self) -> bool:
        return self.det() == 1

    def transformed(self, u: Sequence[Sequence[int]], label: str | None = None) -> "ZLattice":
        """The same lattice in the basis given by the rows of the unimodular matrix u."""
        if abs(det_int(u)) != 1:
            raise ValueError("basis change must be unimodular")
        g = matmul(matmul(u, self.gram), transpose(u))
        frame = self.frame.transformed(u) if self.frame is not None else None
        return ZLattice(_frozen(g), self.label if label is None else label, self.provenance, frame)

    def lll(self) -> tuple["ZLattice", list[list[int]]]:
        t, _ = lll_gram(self.gram)
        return self.transformed(t), t

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.gram).encode()).hexdigest()

    def to_json(self) -> str:
        return json.dumps({"label": self.label, "gram": [list(r) for r in self.gram],
                           "provenance": self.provenance, "hash": self.content_hash()})

    @classmethod
    def from_json(cls, text: str) -> "ZLattice":
        d = json.loads(text)
        lat = cls(_frozen(d["gram"]), d.get("label", ""), d.get("provenance", ""))
        if "hash" in d and d["hash"] != lat.content_hash():
            raise VerificationError("lattice cache entry does not match its content hash")
        return lat


def orthogonal_sum(*lats: ZLattice, label: str = "") -> ZLattice:
    n = sum(l.n for l in lats)
    g = [[0] * n for _ in range(n)]
    off = 0
    for l in lats:
        for i in range(l.n):
            for j in range(l.n):
                g[off + i][off + j] = l.gram[i][j]
        off += l.n
    frame = Frame(_frozen(identity(n)), tuple(l.gram for l in lats))
    return ZLattice(_frozen(g), label or "+".join(l.label for l in lats), "orthogonal sum", frame)


# --- root lattices ---------------------------------------------------------------------------

def _cartan(n: int, edges) -> list[list[int]]:
    g = [[2 * int(i == j) for j in range(n)] for i in range(n)]
    for i, j in edges:
        g[i][j] = g[j][i] = -1
    return g


def root_lattice(kind: str) -> ZLattice:
    """Root lattice A_n (n >= 1), D_n (n >= 3), E6, E7 or E8 with its Cartan matrix as Gram."""
    kind = kind.strip().upper().replace("_", "")
    if len(kind) < 2 or kind[0] not in "ADE" or not kind[1:].isdigit():
        raise ValueError(f"unknown root lattice {kind!r}")
    t, n = kind[0], int(kind[1:])
    if t == "A":
        if n < 1:
            raise ValueError("A_n needs n >= 1")
        edges = [(i, i + 1) for i in range(n - 1)]
    elif t == "D":
        if n < 3:
            raise ValueError("D_n needs n >= 3")
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    else:
        if n not in (6, 7, 8):
            raise ValueError("E_n needs n in {6, 7, 8}")
        # chain 0-2-3-4-5(-6-7) with node 1 attached to node 3
        edges = [(0, 2), (1, 3)] + [(i, i + 1) for i in range(2, n - 1)]
    return ZLattice(_frozen(_cartan(n, edges)), f"{t}{n}", "Cartan matrix")


# --- short vectors ---------------------------------------------------------------------------

@dataclass
class ShortVectors:
    """Nonzero lattice vectors of norm <= bound in canonical order.

    Vectors are sorted by norm, then lexicographically by the representative of each
    +-pair whose first nonzero coordinate is positive; each such representative is followed
    by its negative.  ``counts`` maps norm -> number of vectors (both signs).
    """

    bound: int
    vectors: np.ndarray | None
    norms: np.ndarray | None
    counts: dict[int, int]

    def of_norm(self, m: int) -> np.ndarray:
        return self.vectors[self.norms == m]


def _canonical_pairs(vecs: np.ndarray, norms: np.ndarray):
    if len(vecs) == 0:
        return vecs, norms
    nz = vecs != 0
    first = np.argmax(nz, axis=1)
    sign = np.sign(vecs[np.arange(len(vecs)), first])
    reps = vecs * sign[:, None]
    keys = [reps[:, k] for k in range(reps.shape[1] - 1, -1, -1)] + [norms]
    order = np.lexsort(keys)
    reps, norms = reps[order], norms[order]
    out = np.empty((2 * len(reps), reps.shape[1]), dtype=reps.dtype)
    out[0::2] = reps
    out[1::2] = -reps
    return out, np.repeat(norms, 2)


def short_vectors(lat: ZLattice, bound: int, *, store: bool = True, threads: int = 1,
                  max_vectors: int = 50_000_000) -> ShortVectors:
    """All nonzero v with v G v^T <= bound (coordinates in the lattice basis)."""
    red, t = lat.lll()
    res = enumerate_vectors(red.gram, bound, half=True, store=store, threads=threads,
                            max_vectors=max_vectors)
    counts = {k: 2 * int(c) for k, c in enumerate(res.counts) if c and k > 0}
    if not store:
        return ShortVectors(bound, None, None, counts)
    x = res.vectors.astype(np.int64)
    v = x @ np.array(t, dtype=np.int64)
    g = lat.array()
    norms = np.einsum("ij,jk,ik->i", v, g, v)
    vecs, norms = _canonical_pairs(v, norms)
    small = np.int8 if np.abs(vecs).max(initial=0) < 127 else np.int32
    return ShortVectors(bound, vecs.astype(small), norms, counts)


# --- glue ------------------------------------------------------------------------------------

def discriminant_invariants(lat: ZLattice) -> tuple[int, ...]:
    from .intmat import smith_form
    _, d, _ = smith_form(lat.gram)
    return tuple(d[i][i] for i in range(lat.n) if d[i][i] != 1)


@dataclass(frozen=True)
class GlueCode:
    """Glue vectors for an orthogonal sum of lattices.

    ``vectors[k][i]`` is the dual-lattice representative (coordinates in the basis of
    component i) carried by the k-th glue vector; ``discriminants[i]`` records the invariant
    factors of component i's discriminant group.
    """

    discriminants: tuple
    vectors: tuple

    @property
    def size(self) -> int:
        return len(self.vectors)


def glue_code_from_words(components: Sequence[ZLattice], words,
                         symbols: Sequence[Mapping[int, Sequence]]) -> GlueCode:
    """Glue code whose k-th vector puts ``symbols[i][words[k][i]]`` on component i."""
    vecs = []
    for w in words:
        vecs.append(tuple(tuple(Fraction(x) for x in symbols[i][s]) for i, s in enumerate(w)))
    return GlueCode(tuple(discriminant_invariants(c) for c in components), tuple(vecs))


def glue(components: Sequence[ZLattice], code: GlueCode, label: str = "",
         provenance: str = "glue") -> ZLattice:
    """The overlattice of the orthogonal sum spanned by the components and the glue vectors."""
    base = orthogonal_sum(*components)
    n = base.n
    rows = [list(map(Fraction, r)) for r in identity(n)]
    for vec in code.vectors:
        rows.append([x for part in vec for x in part])
    h, den = rational_hnf(rows)
    if len(h) != n:
        raise VerificationError("glue generators do not span a full-rank lattice")
    basis = [[Fraction(v, den) for v in r] for r in h]
    gram = matmul(matmul(basis, base.gram), transpose(basis))
    if any(v.denominator != 1 for r in gram for v in r):
        raise VerificationError("glue is not integral")
    if any(gram[i][i] % 2 for i in range(n)) and all(c.is_even() for c in components):
        raise VerificationError("glue is odd")
    lat = ZLattice(_frozen([[int(v) for v in r] for r in gram]), label, provenance,
                   Frame(_frozen(basis), tuple(c.gram for c in components)))
    red, _ = lat.lll()
    return red


def dual_classes(lat: ZLattice) -> list[list[Fraction]]:
    """Rows of the inverse Gram: the dual basis in lattice coordinates."""
    return inverse_rational(lat.gram)


def _class_of_norm(lat: ZLattice, norm: Fraction) -> list[Fraction]:
    inv = dual_classes(lat)
    for i in range(lat.n):
        if inv[i][i] == norm:
            return inv[i]
    raise VerificationError(f"no dual basis vector of norm {norm} in {lat.label}")


def _d4_f4_symbols(d4: ZLattice) -> dict[int, list[Fraction]]:
    inv = dual_classes(d4)
    ends = [inv[i] for i in range(4) if inv[i][i] == 1]
    d1, d2 = ends[0], ends[1]
    zero = [Fraction(0)] * 4
    return {0: zero, 1: d1, 2: d2, 3: [a + b for a, b in zip(d1, d2)]}


def _f3_symbols(d: Sequence[Fraction]) -> dict[int, list[Fraction]]:
    return {c: [c * x for x in d] for c in range(3)}


NIEMEIER_ROOTS = {"3E8": 720, "4E6": 288, "6D4": 144, "12A2": 72, "Leech": 0}


def niemeier(label: str) -> ZLattice:
    """One of the five Niemeier lattices 3E8, 4E6, 6D4, 12A2, Leech, verified on return."""
    if label == "3E8":
        e8 = root_lattice("E8")
        lat = orthogonal_sum(e8, e8, e8, label="3E8")
    elif label == "4E6":
        e6 = root_lattice("E6")
        sym = _f3_symbols(_class_of_norm(e6, Fraction(4, 3)))
        code = glue_code_from_words([e6] * 4, codes.tetracode(), [sym] * 4)
        lat = glue([e6] * 4, code, "4E6", "E6^4 glued by the tetracode")
    elif label == "6D4":
        d4 = root_lattice("D4")
        sym = _d4_f4_symbols(d4)
        code = glue_code_from_words([d4] * 6, codes.hexacode(), [sym] * 6)
        lat = glue([d4] * 6, code, "6D4", "D4^6 glued by the hexacode")
    elif label == "12A2":
        a2 = root_lattice("A2")
        sym = _f3_symbols(_class_of_norm(a2, Fraction(2, 3)))
        code = glue_code_from_words([a2] * 12, codes.ternary_golay(), [sym] * 12)
        lat = glue([a2] * 12, code, "12A2", "A2^12 glued by the ternary Golay code")
    elif label == "Leech":
        from ..hermitian import build_rank12, trace_lattice
        lat, _ = trace_lattice(build_rank12("Leech"))
    else:
        raise ValueError(f"unknown Niemeier label {label!r}")
    verify_niemeier(lat, NIEMEIER_ROOTS[label])
    return lat


def verify_niemeier(lat: ZLattice, roots: int) -> None:
    if lat.n != 24 or not lat.is_even() or lat.det() != 1:
        raise VerificationError(f"{lat.label}: not an even unimodular lattice of rank 24")
    got = short_vectors(lat, 2, store=False).counts.get(2, 0)
    if got != roots:
        raise VerificationError(f"{lat.label}: {got} roots, expected {roots}")


def e8_from_d8() -> ZLattice:
    """E8 as D8 glued by a spinor class (a second, independent model of E8)."""
    d8 = root_lattice("D8")
    inv = dual_classes(d8)
    spinor = next(inv[i] for i in range(8)
                  if inv[i][i] == 2 and any(x.denominator > 1 for x in inv[i]))
    code = GlueCode((discriminant_invariants(d8),), ((tuple(spinor),),))
    return glue([d8], code, "E8 (D8+)", "D8 glued by a spinor class")


def rational_det(lat_basis, gram) -> Fraction:
    return det_rational(matmul(matmul(lat_basis, gram), transpose(lat_basis)))
