import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eislat.zlattice.autgroup import automorphism_group, is_isometric, minpoly_element_search
from eislat.zlattice.enumerate import ResourceGuardError, enumerate_vectors
from eislat.zlattice.lattice import (GlueCode, VerificationError, ZLattice, e8_from_d8, glue,
                                     niemeier, orthogonal_sum, root_lattice, short_vectors)


@pytest.mark.parametrize("kind,det", [("A1", 2), ("A2", 3), ("A5", 6), ("D4", 4), ("D7", 4),
                                      ("E6", 3), ("E7", 2), ("E8", 1)])
def test_root_lattice_dets(kind, det):
    lat = root_lattice(kind)
    assert lat.det() == det
    assert lat.is_even()


def test_root_lattice_examples():
    assert root_lattice("A2").gram == ((2, -1), (-1, 2))
    for bad in ("A0", "D2", "E9", "F4", "X"):
        with pytest.raises(ValueError):
            root_lattice(bad)


@pytest.mark.parametrize("kind,roots", [("A2", 6), ("D4", 24), ("E6", 72), ("E7", 126), ("E8", 240)])
def test_root_counts(kind, roots):
    assert short_vectors(root_lattice(kind), 2).counts == {2: roots}


def test_e8_shells():
    sv = short_vectors(root_lattice("E8"), 6)
    assert sv.counts == {2: 240, 4: 2160, 6: 6720}


def test_short_vector_order_is_canonical():
    sv = short_vectors(root_lattice("D4"), 4)
    v = sv.vectors
    assert np.array_equal(v[1::2], -v[0::2])
    first = v[0::2][np.arange(len(v) // 2), np.argmax(v[0::2] != 0, axis=1)]
    assert (first > 0).all()
    assert list(sv.norms) == sorted(sv.norms)


def _random_gl(rng, n, steps=30):
    u = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        u[:, j] += int(rng.integers(-1, 2)) * u[:, i]
    if rng.integers(2):
        u[:, 0] *= -1
    return u


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["A2", "D4", "E6", "A4", "E8"]))
def test_short_vector_counts_basis_invariant(seed, kind):
    lat = root_lattice(kind)
    u = _random_gl(np.random.default_rng(seed), lat.n)
    lat2 = lat.transformed(u.T.tolist())
    assert short_vectors(lat2, 4, store=False).counts == short_vectors(lat, 4, store=False).counts


def test_short_vectors_thread_independent():
    lat = niemeier("12A2")
    a = short_vectors(lat, 4, threads=1)
    b = short_vectors(lat, 4, threads=3)
    assert a.counts == b.counts
    assert np.array_equal(a.vectors, b.vectors)


def test_enumeration_guard():
    with pytest.raises(ResourceGuardError):
        enumerate_vectors(root_lattice("E8").gram, 6, max_vectors=100)


def test_glue_examples():
    e8 = root_lattice("E8")
    three = glue([e8, e8, e8], GlueCode((), ()))
    assert three.det() == 1 and three.is_even()
    assert short_vectors(three, 2, store=False).counts[2] == 720


def test_glue_rejects_nonintegral():
    a2 = root_lattice("A2")
    from fractions import Fraction
    bad = GlueCode(((3,),), (((Fraction(1, 3), Fraction(0)),),))
    with pytest.raises(VerificationError):
        glue([a2], bad)


@pytest.mark.parametrize("label,roots", [("3E8", 720), ("4E6", 288), ("6D4", 144),
                                         ("12A2", 72), ("Leech", 0)])
def test_niemeier(label, roots):
    lat = niemeier(label)
    assert lat.n == 24 and lat.is_even() and lat.det() == 1
    counts = short_vectors(lat, 4, store=False).counts
    assert counts.get(2, 0) == roots
    # theta series of an even unimodular rank-24 lattice is E4^3 + c*Delta
    assert counts[4] == 196560 - 24 * roots


def test_niemeier_unknown():
    with pytest.raises(ValueError):
        niemeier("24A1")


@pytest.mark.parametrize("kind,order", [("A1", 2), ("A2", 12), ("A3", 48), ("A4", 240),
                                        ("D4", 1152), ("D5", 3840), ("E6", 103680),
                                        ("E7", 2903040), ("E8", 696729600)])
def test_automorphism_orders(kind, order):
    grp = automorphism_group(root_lattice(kind))
    assert grp.order == order
    for g in grp.generators:
        assert grp.contains(g)


def test_group_closure_sampled():
    grp = automorphism_group(root_lattice("E8"))
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = np.eye(8, dtype=np.int64)
        for _ in range(10):
            g = g @ grp.generators[int(rng.integers(len(grp.generators)))]
        assert grp.contains(g)


@pytest.mark.parametrize("kind,k", [("A2", 2), ("A2", 3), ("E8", 2)])
def test_orthogonal_sum_wreath_orders(kind, k):
    from math import factorial
    r = root_lattice(kind)
    single = automorphism_group(r).order
    assert automorphism_group(orthogonal_sum(*[r] * k)).order == single ** k * factorial(k)


def test_automorphism_extra_form():
    a2 = ZLattice(((2, 1), (1, 2)), "A2 hexagonal")
    rot = np.array([[0, -1], [1, 1]])
    g = a2.array()
    assert np.array_equal(rot.T @ g @ rot, g)
    grp = automorphism_group(a2, [g @ rot])
    # centralizer of the order-6 rotation in the dihedral group of order 12
    assert grp.order == 6


def test_automorphism_thread_independent():
    lat = root_lattice("E7")
    assert automorphism_group(lat, threads=1).order == automorphism_group(lat, threads=2).order


def test_isometry_examples():
    a2 = root_lattice("A2")
    perm = a2.transformed([[0, 1], [1, 0]])
    ok, u = is_isometric(a2, perm)
    assert ok and np.array_equal(u.T @ perm.array() @ u, a2.array())
    ok, _ = is_isometric(root_lattice("E8"), e8_from_d8())
    assert ok
    assert is_isometric(niemeier("3E8"), niemeier("Leech"))[0] is False
    assert is_isometric(root_lattice("A3"), root_lattice("E8"))[0] is False


@pytest.mark.parametrize("kind", ["A1", "A3", "A4", "D3", "D5"])
def test_minpoly_none(kind):
    assert minpoly_element_search(automorphism_group(root_lattice(kind))) is None


@pytest.mark.parametrize("kind", ["A2", "D4", "E6"])
def test_minpoly_found(kind):
    grp = automorphism_group(root_lattice(kind))
    g = minpoly_element_search(grp)
    n = grp.order and len(grp.gram)
    eye = np.eye(n, dtype=np.int64)
    assert g is not None and np.array_equal(g @ g - g + eye, 0 * eye)
    assert grp.contains(g)


def test_minpoly_large_group_guard():
    with pytest.raises(ResourceGuardError):
        minpoly_element_search(automorphism_group(root_lattice("E8")), limit=1000, tries=10)


def test_zlattice_json_roundtrip():
    lat = niemeier("6D4")
    back = ZLattice.from_json(lat.to_json())
    assert back.gram == lat.gram and back.content_hash() == lat.content_hash()
