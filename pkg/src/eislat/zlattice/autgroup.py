"""Automorphism groups and isometries of definite lattices by a Plesken-Souvignier backtrack.

Matrices act on column coordinate vectors: an automorphism g satisfies g^T G g = G and
g^T F g = F for every registered extra form F.  Internally the search works with row vectors
in a basis of short vectors (the "base"), where an element is the matrix whose rows are the
images of the base vectors.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import gcd, prod
from typing import Sequence

import numpy as np

from .enumerate import ResourceGuardError, enumerate_vectors
from .intmat import det_int, identity, inverse_rational, lll_gram, matmul, transpose
from .lattice import ZLattice

__all__ = ["AutGroup", "automorphism_group", "is_isometric", "minpoly_element_search",
           "VectorIndex"]


class VectorIndex:
    """Hash lookup of integer row vectors in a fixed array."""

    def __init__(self, vecs: np.ndarray, seed: int = 12345):
        self.vecs = np.ascontiguousarray(vecs, dtype=np.int64)
        rng = np.random.default_rng(seed)
        self.w = rng.integers(1, 1 << 20, size=self.vecs.shape[1], dtype=np.int64)
        keys = self.vecs @ self.w
        self.order = np.argsort(keys, kind="stable")
        self.keys = keys[self.order]
        if len(self.keys) > 1 and np.any(self.keys[1:] == self.keys[:-1]):
            self._dict = {v.tobytes(): i for i, v in enumerate(self.vecs)}
        else:
            self._dict = None

    def find(self, q: np.ndarray) -> np.ndarray:
        """Indices of the rows of q (-1 where absent)."""
        q = np.ascontiguousarray(np.atleast_2d(q), dtype=np.int64)
        if self._dict is not None:
            return np.array([self._dict.get(v.tobytes(), -1) for v in q], dtype=np.int64)
        k = q @ self.w
        pos = np.searchsorted(self.keys, k)
        pos = np.minimum(pos, len(self.keys) - 1)
        idx = self.order[pos]
        hit = (self.keys[pos] == k) & np.all(self.vecs[idx] == q, axis=1)
        return np.where(hit, idx, -1)


@dataclass
class _Space:
    """The search universe: vectors of the base norms with precomputed form products."""

    vecs: np.ndarray
    forms: list  # integer matrices in base coordinates (row convention)
    prods: list  # per form (V F, V F^T or None) as float64
    index: VectorIndex

    @classmethod
    def build(cls, vecs: np.ndarray, forms: Sequence[np.ndarray]) -> "_Space":
        vf = vecs.astype(np.float64)
        prods = []
        for f in forms:
            ff = f.astype(np.float64)
            sym = bool(np.array_equal(f, f.T))
            prods.append((vf @ ff, None if sym else vf @ ff.T))
        return cls(vecs, list(forms), prods, VectorIndex(vecs))

    def self_values(self, f: int) -> np.ndarray:
        return np.einsum("ij,ij->i", self.prods[f][0], self.vecs.astype(np.float64))

    def filter(self, idx: np.ndarray, y: np.ndarray, targets) -> np.ndarray:
        """Keep x in idx with x F y^T == c and y F x^T == c' for every form."""
        if len(idx) == 0:
            return idx
        yf = y.astype(np.float64)
        mask = None
        for (a, at), (c, ct) in zip(self.prods, targets):
            m = a[idx] @ yf == c
            if at is not None:
                m &= at[idx] @ yf == ct
            mask = m if mask is None else mask & m
        return idx[mask]


class _Budget:
    def __init__(self, max_nodes: int):
        self.max_nodes = max_nodes
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise ResourceGuardError(f"backtrack exceeded {self.max_nodes} nodes")


def _extend(space: _Space, src_forms, level: int, images: list, lists: dict,
            orbit_sizes: Sequence[int], budget: _Budget):
    """Complete a partial assignment of base images; returns the full index list or None."""
    n = src_forms[0].shape[0]
    if level == n:
        return list(images)
    cand = lists[level]
    need = orbit_sizes[level]
    if len(cand) < need:
        return None
    fails = 0
    for xi in cand:
        budget.tick()
        y = space.vecs[xi]
        new_lists = {}
        ok = True
        for k in range(level + 1, n):
            tg = [(int(f[k, level]), int(f[level, k])) for f in src_forms]
            nl = space.filter(lists[k], y, tg)
            if len(nl) < orbit_sizes[k]:
                ok = False
                break
            new_lists[k] = nl
        if ok:
            res = _extend(space, src_forms, level + 1, images + [int(xi)], new_lists,
                          orbit_sizes, budget)
            if res is not None:
                return res
        fails += 1
        if fails > len(cand) - need:
            return None
    return None


def _initial_lists(space: _Space, src_forms) -> list[np.ndarray]:
    n = src_forms[0].shape[0]
    selfs = [space.self_values(f) for f in range(len(src_forms))]
    out = []
    for k in range(n):
        m = np.ones(len(space.vecs), dtype=bool)
        for f, sv in zip(src_forms, selfs):
            m &= sv == f[k, k]
        out.append(np.flatnonzero(m))
    return out


# --- base selection ------------------------------------------------------------------------

def _complete_primitive(t: list[int]) -> list[list[int]]:
    """A unimodular matrix whose first row is the primitive integer vector t."""
    m = len(t)
    # column operations reducing t to e_0, recorded in cols (t @ cols == e_0)
    cols = identity(m)
    t = list(t)
    while sum(1 for v in t if v) > 1 or t[0] == 0:
        nz = [i for i in range(m) if t[i]]
        p = min(nz, key=lambda i: abs(t[i]))
        for j in nz:
            if j != p:
                q = t[j] // t[p]
                t[j] -= q * t[p]
                for r in cols:
                    r[j] -= q * r[p]
        if sum(1 for v in t if v) == 1 and t[0] == 0:
            p = next(i for i in range(m) if t[i])
            t[0], t[p] = t[p], t[0]
            for r in cols:
                r[0], r[p] = r[p], r[0]
    if t[0] == -1:
        for r in cols:
            r[0] = -r[0]
    inv = inverse_rational(cols)
    return [[int(v) for v in row] for row in inv]


def _choose_base(gram: np.ndarray, vecs: np.ndarray, norms: np.ndarray, pair: np.ndarray | None):
    """Greedy basis of short vectors; each prefix spans a saturated sublattice.

    With ``pair`` (row-convention matrix of a complex structure) the base is built from pairs
    (v, v*pair).  Returns the base as an integer matrix or None.
    """
    n = gram.shape[0]
    u = np.eye(n, dtype=np.int64)  # rows: basis of L extending the chosen prefix
    chosen: list[np.ndarray] = []
    g = gram.astype(np.int64)
    order = np.lexsort((np.arange(len(vecs)), norms))
    vecs, norms = vecs[order], norms[order]
    while len(chosen) < n:
        k = len(chosen)
        uinv = _unimodular_inverse(u)
        tails = (vecs @ uinv)[:, k:]
        prim = np.gcd.reduce(np.abs(tails), axis=1) == 1
        if chosen:
            ip = np.abs(vecs @ g @ np.array(chosen).T)
            score = (ip != 0).sum(axis=1)
        else:
            score = np.zeros(len(vecs), dtype=np.int64)
        ranked = np.lexsort((np.arange(len(vecs)), -score, norms))
        picked = False
        for i in ranked[prim[ranked]]:
            new = [vecs[i]] if pair is None else [vecs[i], vecs[i] @ pair]
            trial_u, ok = u, True
            for j, v in enumerate(new):
                kk = k + j
                c = v @ _unimodular_inverse(trial_u)
                tail = [int(x) for x in c[kk:]]
                if not any(tail) or gcd(*tail) != 1:
                    ok = False
                    break
                blk = np.eye(n, dtype=np.int64)
                blk[kk, :kk] = c[:kk]
                blk[kk:, kk:] = np.array(_complete_primitive(tail), dtype=np.int64)
                trial_u = blk @ trial_u
            if ok:
                u = trial_u
                chosen.extend(new)
                picked = True
                break
        if not picked:
            return None
    return np.array(chosen, dtype=np.int64)


def _base_and_universe(lat: ZLattice, pair: np.ndarray | None, max_universe: int):
    g = lat.array()
    t_lll, g_red = lll_gram(lat.gram)
    cap = max(g_red[i][i] for i in range(lat.n))
    bound = min(g_red[i][i] for i in range(lat.n))
    t_arr = np.array(t_lll, dtype=np.int64)
    while True:
        res = enumerate_vectors(g_red, bound, half=False, max_vectors=max_universe)
        vecs = res.vectors.astype(np.int64) @ t_arr
        norms = np.einsum("ij,jk,ik->i", vecs, g, vecs)
        base = _choose_base(g, vecs, norms, pair)
        if base is not None:
            used = sorted(set(int(x) for x in np.einsum("ij,jk,ik->i", base, g, base)))
            keep = np.isin(norms, used)
            return base, vecs[keep]
        if bound >= cap:
            base = t_arr
            used = sorted(set(g_red[i][i] for i in range(lat.n)))
            res = enumerate_vectors(g_red, max(used), half=False, max_vectors=max_universe)
            vecs = res.vectors.astype(np.int64) @ t_arr
            norms = np.einsum("ij,jk,ik->i", vecs, g, vecs)
            return base, vecs[np.isin(norms, used)]
        bound += 1


# --- automorphism group --------------------------------------------------------------------

@dataclass
class AutGroup:
    """Generators (column convention) and exact order of an automorphism group."""

    generators: list
    order: int
    gram: tuple
    forms: tuple = ()
    orbit_sizes: tuple = ()
    _base: np.ndarray | None = field(default=None, repr=False)
    _space: _Space | None = field(default=None, repr=False)
    _perms: list = field(default_factory=list, repr=False)

    def contains(self, g) -> bool:
        g = np.asarray(g, dtype=np.int64)
        G = np.array(self.gram, dtype=np.int64)
        if not np.array_equal(g.T @ G @ g, G):
            return False
        return all(np.array_equal(g.T @ np.asarray(f) @ g, np.asarray(f)) for f in self.forms)

    def elements(self, limit: int = 10 ** 7):
        """All elements as column-convention matrices (guarded by ``limit``)."""
        if self.order > limit:
            raise ResourceGuardError(f"group of order {self.order} exceeds enumeration limit")
        return [self._to_matrix(p) for p in self._element_perms()]

    def _element_perms(self) -> np.ndarray:
        m = len(self._space.vecs)
        ident = np.arange(m, dtype=np.int32)
        if not self._perms:
            return ident[None, :]
        gens = [p.astype(np.int32) for p in self._perms]
        base_idx = self._space.index.find(self._base_coords_identity())
        seen = {ident[base_idx].tobytes()}
        elems = [ident]
        frontier = [ident]
        while frontier:
            nxt = []
            for e in frontier:
                for p in gens:
                    c = p[e]  # apply e then p
                    key = c[base_idx].tobytes()
                    if key not in seen:
                        seen.add(key)
                        elems.append(c)
                        nxt.append(c)
            frontier = nxt
        if len(elems) != self.order:
            raise RuntimeError("group enumeration disagrees with the computed order")
        return np.array(elems)

    def _base_coords_identity(self) -> np.ndarray:
        return np.eye(len(self.gram), dtype=np.int64)

    def _perm_to_base_matrix(self, p: np.ndarray) -> np.ndarray:
        base_idx = self._space.index.find(self._base_coords_identity())
        return self._space.vecs[p[base_idx]]

    def _to_matrix(self, p: np.ndarray) -> np.ndarray:
        h = self._perm_to_base_matrix(p)
        return _from_base(h, self._base)


def _from_base(h: np.ndarray, base: np.ndarray) -> np.ndarray:
    """Convert a row-convention element in base coordinates to a column-convention matrix."""
    return (_unimodular_inverse(base) @ h @ base).T


def _unimodular_inverse(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    guess = np.rint(np.linalg.inv(m.astype(np.float64))).astype(np.int64)
    if np.array_equal(m @ guess, np.eye(len(m), dtype=np.int64)):
        return guess
    inv = inverse_rational(m.tolist())
    if any(v.denominator != 1 for row in inv for v in row):
        raise ValueError("matrix is not unimodular")
    return np.array([[int(v) for v in row] for row in inv], dtype=np.int64)


def _perm_of(space: _Space, h: np.ndarray) -> np.ndarray:
    img = space.index.find(space.vecs @ h)
    if np.any(img < 0):
        raise RuntimeError("element does not permute the search universe")
    return img


def _orbit(perms: list[np.ndarray], start: int, m: int) -> np.ndarray:
    mask = np.zeros(m, dtype=bool)
    mask[start] = True
    frontier = np.array([start])
    while len(frontier):
        new = []
        for p in perms:
            im = p[frontier]
            im = im[~mask[im]]
            if len(im):
                im = np.unique(im)
                mask[im] = True
                new.append(im)
        frontier = np.unique(np.concatenate(new)) if new else np.array([], dtype=np.int64)
    return mask


def _to_base_forms(base: np.ndarray, mats: Sequence[np.ndarray]) -> list[np.ndarray]:
    # column-convention form F becomes base F base^T on base row vectors
    return [base @ f @ base.T for f in mats]


def automorphism_group(lat: ZLattice, extra_forms: Sequence = (), *, threads: int = 1,
                       max_nodes: int = 50_000_000, max_universe: int = 5_000_000,
                       complex_structure=None) -> AutGroup:
    """Automorphisms of ``lat`` preserving the Gram matrix and every extra form.

    ``complex_structure`` (column-convention B) only steers the base choice towards pairs
    (v, Bv); preservation of B must be requested through an extra form such as G*B.
    """
    G = lat.array()
    forms = [G] + [np.array(f, dtype=np.int64) for f in extra_forms]
    pair = None if complex_structure is None else np.array(complex_structure, dtype=np.int64).T
    base, vecs = _base_and_universe(lat, pair, max_universe)
    binv = _unimodular_inverse(base)
    uvecs = vecs @ binv
    bforms = _to_base_forms(base, forms)
    space = _Space.build(uvecs, bforms)
    n = lat.n
    m = len(uvecs)
    budget = _Budget(max_nodes)
    e_idx = space.index.find(np.eye(n, dtype=np.int64))
    if np.any(e_idx < 0):
        raise RuntimeError("base vectors missing from the universe")

    # stab_lists[i][k]: candidates for level k given that levels < i are fixed pointwise
    lists = _initial_lists(space, bforms)
    stab_lists = [lists]
    for i in range(n - 1):
        prev = stab_lists[-1]
        y = uvecs[e_idx[i]]
        cur = list(prev)
        for k in range(i + 1, n):
            cur[k] = space.filter(prev[k], y, [(int(f[k, i]), int(f[i, k])) for f in bforms])
        stab_lists.append(cur)

    perms: list[np.ndarray] = []
    mats: list[np.ndarray] = []
    orbit_sizes = [1] * n
    for i in range(n - 1, -1, -1):
        cur = stab_lists[i]
        orbit = _orbit(perms, int(e_idx[i]), m)
        excluded = np.zeros(m, dtype=bool)
        cand = [int(x) for x in cur[i]]
        pos = 0

        def attempt(x):
            y = uvecs[x]
            new_lists = {}
            for k in range(i + 1, n):
                nl = space.filter(cur[k], y, [(int(f[k, i]), int(f[i, k])) for f in bforms])
                if len(nl) < orbit_sizes[k]:
                    return None
                new_lists[k] = nl
            return _extend(space, bforms, i + 1, [int(v) for v in e_idx[:i]] + [x], new_lists,
                           orbit_sizes, budget)

        while pos < len(cand):
            batch = []
            while pos < len(cand) and len(batch) < max(1, threads):
                x = cand[pos]
                pos += 1
                if not orbit[x] and not excluded[x]:
                    batch.append(x)
            if not batch:
                continue
            if threads > 1 and len(batch) > 1:
                with ThreadPoolExecutor(max_workers=threads) as ex:
                    results = list(ex.map(attempt, batch))
            else:
                results = [attempt(x) for x in batch]
            for x, res in zip(batch, results):
                if orbit[x] or excluded[x]:
                    continue
                if res is None:
                    excluded |= _orbit(perms, x, m)
                    continue
                h = uvecs[res]
                p = _perm_of(space, h)
                perms.append(p)
                mats.append(h)
                orbit = _orbit(perms, int(e_idx[i]), m)
                excluded &= ~orbit
                if excluded.any():
                    # exclusions stay valid only as unions of orbits of the larger group
                    excluded = _orbit_closure(perms, excluded, m)
        orbit_sizes[i] = int(orbit.sum())
    order = prod(orbit_sizes)
    gens = [_from_base(h, base) for h in mats]
    return AutGroup(gens, order, lat.gram, tuple(tuple(map(tuple, f.tolist())) for f in forms[1:]),
                    tuple(orbit_sizes), base, space, perms)


def _orbit_closure(perms, mask, m):
    out = mask.copy()
    frontier = np.flatnonzero(mask)
    while len(frontier):
        new = []
        for p in perms:
            im = p[frontier]
            im = im[~out[im]]
            if len(im):
                im = np.unique(im)
                out[im] = True
                new.append(im)
        frontier = np.unique(np.concatenate(new)) if new else np.array([], dtype=np.int64)
    return out


# --- isometry ------------------------------------------------------------------------------

def is_isometric(l1: ZLattice, l2: ZLattice, *, forms1: Sequence = (), forms2: Sequence = (),
                 pair=None, max_nodes: int = 50_000_000, max_universe: int = 5_000_000):
    """Decide whether l1 and l2 are isometric; returns (bool, U) with U^T G2 U == G1.

    With extra forms the isometry must also carry each form in ``forms1`` to the matching
    form in ``forms2`` (U^T F2 U == F1).  ``pair`` steers the base choice as in
    :func:`automorphism_group`.
    """
    if l1.n != l2.n or l1.det() != l2.det() or len(forms1) != len(forms2):
        return False, None
    pr = None if pair is None else np.array(pair, dtype=np.int64).T
    base, _ = _base_and_universe(l1, pr, max_universe)
    G1, G2 = l1.array(), l2.array()
    src = [base @ f @ base.T for f in [G1] + [np.array(f, dtype=np.int64) for f in forms1]]
    norms = sorted(set(int(src[0][i, i]) for i in range(l1.n)))
    # cheap invariant: numbers of vectors up to the largest base norm
    t2, g2red = lll_gram(l2.gram)
    _, g1red = lll_gram(l1.gram)
    c1 = enumerate_vectors(g1red, max(norms), half=True, store=False).counts
    c2 = enumerate_vectors(g2red, max(norms), half=True, store=False).counts
    if not np.array_equal(c1, c2):
        return False, None
    res = enumerate_vectors(g2red, max(norms), half=False, max_vectors=max_universe)
    vecs = res.vectors.astype(np.int64) @ np.array(t2, dtype=np.int64)
    vn = np.einsum("ij,jk,ik->i", vecs, G2, vecs)
    vecs = vecs[np.isin(vn, norms)]
    space = _Space.build(vecs, [G2] + [np.array(f, dtype=np.int64) for f in forms2])
    lists = _initial_lists(space, src)
    found = _extend(space, src, 0, [], {k: lists[k] for k in range(l1.n)}, [1] * l1.n,
                    _Budget(max_nodes))
    if found is None:
        return False, None
    img = vecs[found]
    u = (_unimodular_inverse(base) @ img).T  # columns: images of l1's basis in l2 coordinates
    if not np.array_equal(u.T @ G2 @ u, G1):
        raise RuntimeError("isometry witness failed verification")
    return True, u


# --- min-poly search -----------------------------------------------------------------------

def minpoly_element_search(group: AutGroup, limit: int = 10 ** 7, *, seed: int = 0,
                           tries: int = 0):
    """An element g of the group with g^2 - g + 1 = 0, or None if none exists.

    With |G| <= limit the whole group is enumerated and None is a certificate.  Larger groups
    are only sampled by random products (``tries`` samples); None is then inconclusive and a
    ResourceGuardError is raised instead.
    """
    n = len(group.gram)
    if group.order <= limit:
        elems = group._element_perms()
        base_idx = group._space.index.find(np.eye(n, dtype=np.int64))
        V = group._space.vecs
        e = V[base_idx]
        for p in elems:
            h = V[p[base_idx]]
            if np.array_equal(h @ h - h + e, np.zeros_like(h)):
                g = _from_base(h, group._base)
                return g
        return None
    rng = np.random.default_rng(seed)
    gens = group.generators
    if not gens:
        return None
    I = np.eye(n, dtype=np.int64)
    g = I.copy()
    for _ in range(tries):
        g = g @ gens[int(rng.integers(len(gens)))]
        if np.array_equal(g @ g - g + I, 0 * I):
            return g
    raise ResourceGuardError("randomized search inconclusive for a large group")
