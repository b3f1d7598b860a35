"""Eisenstein lattices: Hermitian O-lattices whose trace lattices are even unimodular.

An O-lattice is stored through the Hermitian Gram matrix H of an O-basis b_1..b_r, with the
form conjugate-linear in the first argument: <x, y> = conj(x)^T H y.  Its trace lattice is
Re<x, y> on the Z-basis (b_1, w b_1, ..., b_r, w b_r), on which multiplication by w acts by the
block-diagonal matrix diag(A, ..., A) with A = [[0, -1], [1, 1]] (column convention).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .arith import EisInt, HermitianMatrix, KScalar, OMEGA, THETA, eis_divmod, units
from .mass import mass_even
from .zlattice import codes
from .zlattice.autgroup import AutGroup, automorphism_group, is_isometric, \
    minpoly_element_search
from .zlattice.intmat import det_int, identity, inverse_rational, matmul, transpose
from .zlattice.lattice import Frame, GlueCode, VerificationError, ZLattice, dual_classes, \
    glue, glue_code_from_words, root_lattice, short_vectors

__all__ = [
    "OLattice",
    "ComplexStructure",
    "UnitaryAutGroup",
    "lambda4",
    "trace_lattice",
    "o_basis_from_endo",
    "build_rank12",
    "unitary_aut",
    "aut_z",
    "orthogonal_index",
    "direct_sum",
    "rank16_mass_ratio",
    "unitary_isometric",
    "RANK12_LABELS",
    "RANK12_ROOTS",
]

RANK12_LABELS = ("3E8", "4E6", "6D4", "12A2", "Leech")
RANK12_ROOTS = {"3E8": 720, "4E6": 288, "6D4": 144, "12A2": 72, "Leech": 0}

A_BLOCK = ((0, -1), (1, 1))
THETA_OVER_3 = KScalar(Fraction(-1, 3), Fraction(2, 3))


@dataclass(frozen=True)
class ComplexStructure:
    """Integral matrix B (column convention) with B^2 - B + 1 = 0."""

    B: tuple

    def __post_init__(self):
        b = np.array(self.B, dtype=np.int64)
        object.__setattr__(self, "B", tuple(tuple(int(v) for v in r) for r in b.tolist()))
        n = len(b)
        if not np.array_equal(b @ b - b + np.eye(n, dtype=np.int64), np.zeros((n, n), np.int64)):
            raise ValueError("B does not satisfy B^2 - B + 1 = 0")

    def array(self) -> np.ndarray:
        return np.array(self.B, dtype=np.int64)

    def is_isometry_of(self, lat: ZLattice) -> bool:
        b, g = self.array(), lat.array()
        return bool(np.array_equal(b.T @ g @ b, g))

    @classmethod
    def standard(cls, r: int) -> "ComplexStructure":
        m = np.zeros((2 * r, 2 * r), dtype=np.int64)
        for j in range(r):
            m[2 * j:2 * j + 2, 2 * j:2 * j + 2] = A_BLOCK
        return cls(tuple(map(tuple, m.tolist())))


@dataclass(frozen=True, eq=False)
class OLattice:
    """An O-lattice of rank r with Hermitian Gram matrix ``hgram``.

    ``zframe`` optionally embeds the trace lattice (in its standard basis) into an orthogonal
    sum of small blocks; it only speeds up theta series computations.
    """

    r: int
    hgram: HermitianMatrix
    provenance: str = ""
    label: str = ""
    zframe: Frame | None = field(default=None, repr=False)

    def __post_init__(self):
        if not isinstance(self.hgram, HermitianMatrix):
            object.__setattr__(self, "hgram", HermitianMatrix(self.hgram))
        if self.hgram.n != self.r:
            raise ValueError("rank does not match the Gram matrix")

    def __eq__(self, other):
        return isinstance(other, OLattice) and self.hgram == other.hgram

    def __hash__(self):
        return hash(self.hgram)

    def det(self) -> Fraction:
        return self.hgram.det()

    def validation(self) -> dict[str, bool]:
        """Checks of the defining conditions; all True for an Eisenstein lattice."""
        out = {
            "rank_divisible_by_4": self.r % 4 == 0,
            "det": self.r % 2 == 0 and self.det() == Fraction(4, 3) ** (self.r // 2),
        }
        try:
            zl, _ = trace_lattice(self)
        except VerificationError:
            return {**out, "integral": False, "even": False, "unimodular": False}
        return {**out, "integral": True, "even": zl.is_even(), "unimodular": zl.det() == 1}

    def is_eisenstein(self) -> bool:
        return all(self.validation().values())

    def conj(self) -> "OLattice":
        return OLattice(self.r, self.hgram.conj(), f"conjugate of {self.label}",
                        f"conj({self.label})")

    def content_hash(self) -> str:
        return hashlib.sha256(self.hgram.to_json().encode()).hexdigest()

    def to_json(self) -> str:
        d = {"label": self.label, "rank": self.r, "hgram": self.hgram.to_strings(),
             "provenance": self.provenance, "hash": self.content_hash()}
        if self.zframe is not None:
            d["frame"] = {"basis": [[str(x) for x in r] for r in self.zframe.basis],
                          "blocks": [[[str(x) for x in r] for r in g]
                                     for g in self.zframe.block_grams]}
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "OLattice":
        d = json.loads(text)
        frame = None
        if "frame" in d:
            fr = d["frame"]
            frame = Frame(tuple(tuple(Fraction(x) for x in r) for r in fr["basis"]),
                          tuple(tuple(tuple(Fraction(x) for x in r) for r in g)
                                for g in fr["blocks"]))
        lat = cls(d["rank"], HermitianMatrix.from_strings(d["hgram"]), d.get("provenance", ""),
                  d.get("label", ""), frame)
        if "hash" in d and d["hash"] != lat.content_hash():
            raise VerificationError("O-lattice cache entry does not match its content hash")
        return lat


@dataclass
class UnitaryAutGroup:
    """Unitary automorphisms: generators over O (acting on O-coordinate columns) and order."""

    generators: list
    order: int
    zgroup: AutGroup | None = field(default=None, repr=False)


# --- trace lattice and back ----------------------------------------------------------------

def _re(x: KScalar) -> Fraction:
    return x.real


def trace_lattice(lat: OLattice) -> tuple[ZLattice, ComplexStructure]:
    """Z-Gram of Re<x, y> on (b_1, w b_1, ..., b_r, w b_r) and the matrix of w."""
    r = lat.r
    w = OMEGA.to_k()
    wb = w.conj()
    g = [[Fraction(0)] * (2 * r) for _ in range(2 * r)]
    for j in range(r):
        for k in range(r):
            h = lat.hgram[j, k]
            g[2 * j][2 * k] = _re(h)
            g[2 * j + 1][2 * k] = _re(wb * h)
            g[2 * j][2 * k + 1] = _re(w * h)
            g[2 * j + 1][2 * k + 1] = _re(h)
    if any(v.denominator != 1 for row in g for v in row):
        raise VerificationError("trace form is not integral")
    zl = ZLattice(tuple(tuple(int(v) for v in row) for row in g), lat.label,
                  f"trace lattice of {lat.label}", lat.zframe)
    return zl, ComplexStructure.standard(r)


def hermitian_from_real(b: Fraction, bb: Fraction) -> KScalar:
    """h(x, y) from b = Re h(x, y) and bb = Re h(x, w y)."""
    b, bb = Fraction(b), Fraction(bb)
    return KScalar(b) + THETA_OVER_3 * (b - 2 * bb)


def _rank_q(cols: list[list[int]]) -> int:
    m = [[Fraction(v) for v in c] for c in cols]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def o_hermite(rows: Sequence[Sequence[EisInt]]) -> list[list[EisInt]]:
    """Row echelon form over the Euclidean ring O; returns the nonzero rows (an O-basis)."""
    a = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    if not a:
        return []
    ncols = len(a[0])
    p = 0
    for c in range(ncols):
        if p == len(a):
            break
        while True:
            live = [i for i in range(p, len(a)) if not a[i][c].is_zero()]
            if not live:
                break
            piv = min(live, key=lambda i: a[i][c].norm())
            a[p], a[piv] = a[piv], a[p]
            done = True
            for i in range(p + 1, len(a)):
                if a[i][c].is_zero():
                    continue
                q, _ = eis_divmod(a[i][c], a[p][c])
                a[i] = [x - q * y for x, y in zip(a[i], a[p])]
                if not a[i][c].is_zero():
                    done = False
            if done:
                break
        if p < len(a) and not a[p][c].is_zero():
            # reduce the rows above the pivot
            for i in range(p):
                if not a[i][c].is_zero():
                    q, _ = eis_divmod(a[i][c], a[p][c])
                    a[i] = [x - q * y for x, y in zip(a[i], a[p])]
            p += 1
    return [r for r in a[:p]]


def o_basis_from_endo(lat: ZLattice, B: ComplexStructure | Sequence, *,
                      return_basis: bool = False, label: str = ""):
    """An O-basis c_1..c_r of lat for the O-structure given by B.

    (c_1, Bc_1, ..., c_r, Bc_r) is a Z-basis of lat; the Hermitian Gram is rebuilt from
    b(x, y) and b(x, By).  With ``return_basis`` the integer matrix with columns
    c_1, Bc_1, ... is returned as well.
    """
    if not isinstance(B, ComplexStructure):
        B = ComplexStructure(tuple(map(tuple, np.asarray(B).tolist())))
    if not B.is_isometry_of(lat):
        raise ValueError("B is not an isometry of the lattice")
    n = lat.n
    if n % 2:
        raise ValueError("a lattice with a complex structure has even rank")
    r = n // 2
    b = B.array().tolist()
    # K-independent vectors v_j, so that (v_j, B v_j) is a Q-basis
    vs: list[list[int]] = []
    cols: list[list[int]] = []
    for i in range(n):
        e = [int(i == j) for j in range(n)]
        be = [row[i] for row in b]
        if _rank_q(cols + [e, be]) == len(cols) + 2:
            vs.append(e)
            cols += [e, be]
        if len(vs) == r:
            break
    m = transpose(cols)  # columns v_1, Bv_1, ...
    minv = inverse_rational(m)
    gens = []
    for i in range(n):
        c = [minv[k][i] for k in range(n)]
        gens.append([KScalar(c[2 * j], c[2 * j + 1]) for j in range(r)])
    den = 1
    for g in gens:
        for x in g:
            for q in (x.a, x.b):
                den = den * q.denominator // _gcd(den, q.denominator)
    rows = [[EisInt(int(x.a * den), int(x.b * den)) for x in g] for g in gens]
    hb = o_hermite(rows)
    if len(hb) != r:
        raise VerificationError("O-module is not of full rank")
    bcols = []
    for row in hb:
        c = [Fraction(0)] * n
        for j, x in enumerate(row):
            for k in range(n):
                c[k] += Fraction(x.a, den) * cols[2 * j][k] + Fraction(x.b, den) * cols[2 * j + 1][k]
        if any(v.denominator != 1 for v in c):
            raise VerificationError("O-basis vector is not integral")
        ci = [int(v) for v in c]
        bcols += [ci, [sum(b[k][l] * ci[l] for l in range(n)) for k in range(n)]]
    t = transpose(bcols)
    if abs(det_int(t)) != 1:
        raise VerificationError("O-basis does not give a Z-basis")
    g = lat.array()
    tt = np.array(t, dtype=np.int64)
    zg = tt.T @ g @ tt
    H = [[hermitian_from_real(Fraction(int(zg[2 * j, 2 * k])), Fraction(int(zg[2 * j, 2 * k + 1])))
          for k in range(r)] for j in range(r)]
    frame = lat.frame.transformed(transpose(t)) if lat.frame is not None else None
    out = OLattice(r, HermitianMatrix(H), f"O-basis from a complex structure on {lat.label}",
                   label or lat.label, frame)
    return (out, tt) if return_basis else out


def _gcd(a: int, b: int) -> int:
    from math import gcd
    return gcd(a, b)


# --- constructions -------------------------------------------------------------------------

@lru_cache(maxsize=None)
def lambda4() -> OLattice:
    """The rank-4 Eisenstein lattice from the bundled Gram matrix."""
    data = json.loads(resources.files("eislat.data").joinpath("lambda4.json").read_text())
    lat = OLattice(4, HermitianMatrix.from_strings(data["hgram"]), data["description"], "Lambda4")
    if not lat.is_eisenstein():
        raise VerificationError("bundled Lambda4 Gram fails validation")
    return lat


def direct_sum(*lats: OLattice, label: str = "") -> OLattice:
    lats = [l for l in lats if l.r > 0]
    if not lats:
        return OLattice(0, HermitianMatrix([]), "zero module", label or "0")
    if len(lats) == 1:
        return lats[0]
    H = HermitianMatrix.block_diag(*(l.hgram for l in lats))
    # frame: concatenate block frames, or use whole trace lattices as blocks
    blocks, basis_parts = [], []
    for l in lats:
        if l.zframe is not None:
            blocks += list(l.zframe.block_grams)
            basis_parts.append([list(r) for r in l.zframe.basis])
        else:
            zl, _ = trace_lattice(l)
            blocks.append(zl.gram)
            basis_parts.append(identity(zl.n))
    total = sum(len(p[0]) for p in basis_parts)
    rows, off = [], 0
    for p in basis_parts:
        w = len(p[0])
        for r in p:
            rows.append(tuple([Fraction(0)] * off + [Fraction(x) for x in r]
                              + [Fraction(0)] * (total - off - w)))
        off += w
    frame = Frame(tuple(rows), tuple(blocks))
    name = label or " + ".join(l.label for l in lats)
    return OLattice(H.n, H, "orthogonal sum of " + ", ".join(l.label for l in lats), name, frame)


def _scaled_coordinate_lattice(basis: Sequence[Sequence[KScalar]], scale: Fraction,
                               label: str, provenance: str) -> OLattice:
    """O-lattice with basis rows in K^m and form scale * sum conj(x_i) y_i."""
    r = len(basis)
    m = len(basis[0])
    H = [[sum((basis[j][i].conj() * basis[k][i] for i in range(m)), KScalar()) * scale
          for k in range(r)] for j in range(r)]
    # frame: coordinate i of K^m is the block (1, w) with Gram Re(scale * conj(x) y)
    s = Fraction(scale)
    block = ((s, s / 2), (s / 2, s))
    rows = []
    w = OMEGA.to_k()
    for j in range(r):
        for mult in (KScalar(1), w):
            row = []
            for i in range(m):
                x = mult * basis[j][i]
                row += [x.a, x.b]
            rows.append(tuple(row))
    frame = Frame(tuple(rows), tuple([block] * m))
    return OLattice(r, HermitianMatrix(H), provenance, label, frame)


def _golay_generators_signed(signs: Sequence[int]) -> list[list[int]]:
    gens = codes.ternary_golay_generators()
    return [[(g[i] * signs[i]) % 3 for i in range(12)] for g in gens]


def construction_a_12(signs: Sequence[int] = (1,) * 12) -> list[list[KScalar]]:
    """O-basis (rows in O^12) of {x : x mod theta in the ternary Golay code (coordinates
    multiplied by ``signs``)}."""
    gens = _golay_generators_signed(signs)
    basis = []
    for k in range(6):
        basis.append([KScalar(_sym(v)) for v in gens[k]])
    for j in range(6, 12):
        basis.append([THETA.to_k() if i == j else KScalar() for i in range(12)])
    return basis


def _sym(v: int) -> int:
    return v - 3 if v == 2 else v


def _verify(lat: OLattice, roots: int) -> OLattice:
    checks = lat.validation()
    if not all(checks.values()):
        raise VerificationError(f"{lat.label}: failed {[k for k, v in checks.items() if not v]}")
    zl, _ = trace_lattice(lat)
    got = short_vectors(zl, 2, store=False).counts.get(2, 0)
    if got != roots:
        raise VerificationError(f"{lat.label}: {got} roots, expected {roots}")
    return lat


def _glued_with_structure(comp: ZLattice, Bc: np.ndarray, k: int, words, symbols, label: str):
    """Glue k copies of comp and carry the block-diagonal complex structure along."""
    code = glue_code_from_words([comp] * k, words, [symbols] * k)
    lat = glue([comp] * k, code, label, f"{comp.label}^{k} glued")
    # ambient B (column convention on ambient coordinates); basis rows P in ambient coords
    nb = comp.n
    amb = np.zeros((nb * k, nb * k), dtype=np.int64)
    for i in range(k):
        amb[i * nb:(i + 1) * nb, i * nb:(i + 1) * nb] = Bc
    P = [[Fraction(x) for x in row] for row in lat.frame.basis]
    # lattice vector with coordinates c (row) is c @ P in ambient row coordinates;
    # omega maps ambient row vector a to (amb @ a^T)^T = a @ amb^T
    img = matmul(P, transpose(amb.tolist()))
    coords = matmul(img, inverse_rational(P))  # rows: coordinates of omega * basis_i
    if any(v.denominator != 1 for r in coords for v in r):
        raise VerificationError(f"{label}: glue code is not stable under the complex structure")
    B = np.array([[int(v) for v in r] for r in coords], dtype=np.int64).T
    return lat, B


def _component_structure(name: str) -> tuple[ZLattice, np.ndarray]:
    comp = root_lattice(name)
    g = minpoly_element_search(automorphism_group(comp))
    if g is None:
        raise VerificationError(f"no complex structure on {name}")
    return comp, np.asarray(g, dtype=np.int64)


def _build_4e6() -> OLattice:
    e6, B = _component_structure("E6")
    d = next(r for i, r in enumerate(dual_classes(e6)) if r[i] == Fraction(4, 3))
    # B acts as -1 on the discriminant group, so every ternary glue code is B-stable
    symbols = {c: [c * x for x in d] for c in range(3)}
    zl, Bz = _glued_with_structure(e6, B, 4, codes.tetracode_generators(), symbols, "4E6")
    return o_basis_from_endo(zl, Bz, label="4E6")


def _build_6d4() -> OLattice:
    d4, B = _component_structure("D4")
    inv = dual_classes(d4)
    d1 = next(inv[i] for i in range(4) if inv[i][i] == 1)
    bd1 = [sum(B[k][l] * d1[l] for l in range(4)) for k in range(4)]  # w * d1
    s3 = [a + c for a, c in zip(d1, bd1)]
    # identify the discriminant group with F_4 through the action of B: w * d := B d
    symbols = {0: [Fraction(0)] * 4, 1: d1, 2: bd1, 3: s3}
    gens = []
    for g in codes.hexacode_generators():
        gens.append(g)
        gens.append([codes.F4_MUL[2][x] for x in g])  # w * g, so the Z-span is the F_4-span
    zl, Bz = _glued_with_structure(d4, B, 6, gens, symbols, "6D4")
    return o_basis_from_endo(zl, Bz, label="6D4")


def _build_12a2() -> OLattice:
    return _scaled_coordinate_lattice(construction_a_12(), Fraction(2, 3), "12A2",
                                      "construction A over O/theta from the ternary Golay code")


def _all_ones_signs() -> list[int]:
    """Signs making the all-ones word part of the sign-twisted Golay code."""
    word = next(w for w in codes.ternary_golay() if all(w))
    return [1 if x == 1 else -1 for x in word]


def _build_leech() -> OLattice:
    signs = _all_ones_signs()
    base = construction_a_12(signs)
    # index-3 O-sublattice {x : sum x_i = 0 mod 3}; sum x_i already lies in theta*O
    th = THETA.to_k()
    t = [(sum(row, KScalar()) / th).to_eis() for row in base]
    k0 = next(k for k in range(12) if _mod_theta(t[k]) != 0)
    inv0 = 1 if _mod_theta(t[k0]) == 1 else 2
    sub = [[th * x for x in base[k0]]]
    for k in range(12):
        if k == k0:
            continue
        c = (_mod_theta(t[k]) * inv0) % 3
        sub.append([x - c * y for x, y in zip(base[k], base[k0])])
    l0 = _o_span(sub, "L0")
    # the discriminant group of L0 has order 9; exactly the right class of order 3 glues
    # L0 up to an even unimodular lattice without roots
    for g in _discriminant_vectors(l0):
        try:
            lat = _o_span(l0.basis + [g], "Leech")
        except VerificationError:
            continue
        if lat.olat.is_eisenstein():
            zl, _ = trace_lattice(lat.olat)
            if short_vectors(zl, 2, store=False).counts.get(2, 0) == 0:
                return lat.olat
    raise VerificationError("no glue class of L0 yields the Leech lattice")


@dataclass
class _CoordLattice:
    basis: list
    olat: OLattice


def _o_span(rows: list[list[KScalar]], label: str) -> _CoordLattice:
    """O-span of rows in K^12 with the form (2/3) sum conj(x_i) y_i."""
    den = 1
    for r in rows:
        for x in r:
            for q in (x.a, x.b):
                den = den * q.denominator // _gcd(den, q.denominator)
    hb = o_hermite([[(x * den).to_eis() for x in r] for r in rows])
    basis = [[x.to_k() / den for x in r] for r in hb]
    lat = _scaled_coordinate_lattice(
        basis, Fraction(2, 3), label,
        "complex Leech lattice: index-3 sublattice of construction A from the ternary Golay "
        "code, glued by a class of order 3" if label == "Leech" else "sublattice of construction A")
    return _CoordLattice(basis, lat)


def _discriminant_vectors(cl: _CoordLattice) -> list[list[KScalar]]:
    """Representatives in K^12 of the nonzero classes of the discriminant group."""
    zl, _ = trace_lattice(cl.olat)
    inv = inverse_rational(zl.gram)
    classes = {tuple([Fraction(0)] * zl.n)}
    frontier = list(classes)
    while frontier:
        new = []
        for c in frontier:
            for gen in inv:
                v = tuple((x + y) % 1 for x, y in zip(c, gen))
                if v not in classes:
                    classes.add(v)
                    new.append(v)
        frontier = new
    out = []
    w = OMEGA.to_k()
    for c in sorted(classes):
        if not any(c):
            continue
        vec = [KScalar() for _ in range(12)]
        for k, row in enumerate(cl.basis):
            coef = KScalar(c[2 * k]) + KScalar(c[2 * k + 1]) * w
            vec = [a + coef * b for a, b in zip(vec, row)]
        out.append(vec)
    return out


def _mod_theta(x: EisInt) -> int:
    # O/theta = F_3 with w = -1
    return (x.a - x.b) % 3


def build_rank12(label: str) -> OLattice:
    """One of the five Eisenstein lattices of rank 12, validated on return."""
    return _build_rank12_cached(label)


@lru_cache(maxsize=None)
def _build_rank12_cached(label: str) -> OLattice:
    if label == "3E8":
        l4 = lambda4()
        lat = direct_sum(l4, l4, l4, label="3E8")
    elif label == "4E6":
        lat = _build_4e6()
    elif label == "6D4":
        lat = _build_6d4()
    elif label == "12A2":
        lat = _build_12a2()
    elif label == "Leech":
        lat = _build_leech()
    else:
        raise ValueError(f"unknown rank-12 label {label!r}; expected one of {RANK12_LABELS}")
    return _verify(lat, RANK12_ROOTS[label])


# --- automorphisms -------------------------------------------------------------------------

def unitary_aut(lat: OLattice, *, threads: int = 1, max_nodes: int = 50_000_000) -> UnitaryAutGroup:
    """Unitary automorphism group, as the centralizer of w in the orthogonal group."""
    zl, B = trace_lattice(lat)
    b = B.array()
    g = zl.array()
    grp = automorphism_group(zl, [g @ b], complex_structure=b, threads=threads,
                             max_nodes=max_nodes)
    gens = [_z_to_o(m, lat.r) for m in grp.generators]
    return UnitaryAutGroup(gens, grp.order, grp)


def _z_to_o(m: np.ndarray, r: int) -> list[list[EisInt]]:
    """An O-linear Z-matrix (commuting with diag(A, ...)) as an r x r matrix over O."""
    out = [[EisInt(0, 0)] * r for _ in range(r)]
    for j in range(r):
        for k in range(r):
            # image of b_k has coordinates (m[2j, 2k], m[2j+1, 2k]) on (b_j, w b_j)
            out[j][k] = EisInt(int(m[2 * j, 2 * k]), int(m[2 * j + 1, 2 * k]))
    return out


def aut_z(lat: OLattice, *, threads: int = 1, max_nodes: int = 50_000_000) -> AutGroup:
    zl, _ = trace_lattice(lat)
    return automorphism_group(zl, threads=threads, max_nodes=max_nodes)


def orthogonal_index(lat: OLattice, *, threads: int = 1, unitary_order: int | None = None,
                     max_nodes: int = 50_000_000) -> int:
    """[Aut_Z : Aut] for the trace lattice."""
    zo = aut_z(lat, threads=threads, max_nodes=max_nodes).order
    uo = unitary_order if unitary_order is not None else unitary_aut(lat, threads=threads).order
    if zo % uo:
        raise VerificationError("unitary group order does not divide the orthogonal order")
    return zo // uo


def unitary_isometric(l1: OLattice, l2: OLattice, **kw):
    """Unitary isometry test via the trace lattices with the form b(x, w y)."""
    z1, b1 = trace_lattice(l1)
    z2, b2 = trace_lattice(l2)
    f1 = z1.array() @ b1.array()
    f2 = z2.array() @ b2.array()
    return is_isometric(z1, z2, forms1=[f1], forms2=[f2], pair=b1.array(), **kw)


def rank16_mass_ratio(orders: dict[str, int] | None = None) -> Fraction:
    """Mass share of the five rank-16 lattices Lambda4 + (rank-12 lattice).

    Lambda4 + 3E8 is Lambda4^4, whose automorphism group also permutes the four summands.
    """
    a4 = 155520 if orders is None else orders.get("Lambda4", 155520)
    if orders is None:
        orders = {k: unitary_aut(build_rank12(k)).order for k in RANK12_LABELS}
    total = Fraction(0)
    for k in RANK12_LABELS:
        o = orders[k] * a4
        if k == "3E8":
            o *= 4  # Aut(L^4) = Aut(L)^4 . S_4 versus Aut(L^3) . Aut(L) = Aut(L)^4 . S_3
        total += Fraction(1, o)
    return total / mass_even(16).value
