from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eislat.arith import OMEGA, EisInt, HermitianMatrix, KScalar, herm_det
from eislat.hermitian import (RANK12_LABELS, RANK12_ROOTS, ComplexStructure, OLattice,
                              build_rank12, direct_sum, hermitian_from_real, lambda4,
                              o_basis_from_endo, rank16_mass_ratio, trace_lattice,
                              unitary_aut, unitary_isometric)
from eislat.mass import mass_even
from eislat.zlattice.autgroup import is_isometric
from eislat.zlattice.lattice import VerificationError, ZLattice, short_vectors

from conftest import TABLE_UNITARY_ORDERS, unitary_group, unitary_order


def test_lambda4_pipeline():
    l4 = lambda4()
    assert herm_det(l4.hgram) == Fraction(16, 9)
    assert l4.is_eisenstein()
    zl, B = trace_lattice(l4)
    assert zl.n == 8 and zl.is_even() and zl.det() == 1
    assert short_vectors(zl, 2, store=False).counts == {2: 240}
    b = B.array()
    assert B.is_isometry_of(zl)
    assert np.array_equal(b @ b - b + np.eye(8, dtype=np.int64), np.zeros((8, 8), np.int64))


def test_lambda4_unitary_order():
    grp = unitary_aut(lambda4())
    assert grp.order == 155520 == 1 / mass_even(4).value
    h = lambda4().hgram
    for u in grp.generators:
        assert h.congruent(u) == h


def test_rank8_order():
    l4 = lambda4()
    order = unitary_aut(direct_sum(l4, l4)).order
    assert order == 2 * 155520 ** 2
    assert Fraction(1, order) == mass_even(8).value


def test_direct_sum_edge_cases():
    l4 = lambda4()
    zero = direct_sum()
    assert zero.r == 0
    assert direct_sum(l4, zero) == l4
    s = direct_sum(l4, l4)
    assert s.r == 8 and s.is_eisenstein()


def test_rank1_trace_form_flags_invalid():
    lat = OLattice(1, HermitianMatrix([[2]]), "rank-1 test module", "A2")
    zl, B = trace_lattice(lat)
    assert zl.gram == ((2, 1), (1, 2))
    v = lat.validation()
    assert v["rank_divisible_by_4"] is False and not lat.is_eisenstein()


def test_nonintegral_trace_form():
    lat = OLattice(1, HermitianMatrix([[1]]), "odd", "odd")
    v = lat.validation()
    assert v["even"] is False


@settings(max_examples=100)
@given(st.integers(-30, 30), st.integers(-30, 30))
def test_hermitian_from_real_recovers_forms(b, bb):
    h = hermitian_from_real(b, bb)
    assert h.real == b
    assert (OMEGA * h).real == bb


def test_hermitian_reconstruction_sesquilinear():
    # h(x, w y) = w h(x, y) on Lambda4's trace lattice
    l4 = lambda4()
    zl, B = trace_lattice(l4)
    g, b = zl.array(), B.array()
    gb = g @ b
    for j in range(4):
        for k in range(4):
            h = hermitian_from_real(g[2 * j, 2 * k], gb[2 * j, 2 * k])
            assert h == l4.hgram[j, k]
            hw = hermitian_from_real(gb[2 * j, 2 * k], (g @ b @ b)[2 * j, 2 * k])
            assert hw == OMEGA * h


def test_o_basis_smallest_case():
    hexa = ZLattice(((2, 1), (1, 2)), "A2")
    lat = o_basis_from_endo(hexa, [[0, -1], [1, 1]])
    assert lat.r == 1
    assert lat.hgram[0, 0] == 2


def test_o_basis_rejects_bad_structure():
    hexa = ZLattice(((2, 1), (1, 2)), "A2")
    with pytest.raises(ValueError):
        o_basis_from_endo(hexa, [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        o_basis_from_endo(ZLattice(((2, 0), (0, 4)), "x"), [[0, -1], [1, 1]])


def test_o_basis_roundtrip_lambda4():
    l4 = lambda4()
    zl, B = trace_lattice(l4)
    back = o_basis_from_endo(zl, B)
    assert back.is_eisenstein()
    ok, _ = unitary_isometric(back, l4)
    assert ok


def _random_gl(rng, n, steps):
    u = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        u[:, j] += int(rng.integers(-1, 2)) * u[:, i]
    return u


def _inverse(u):
    inv = np.rint(np.linalg.inv(u)).astype(np.int64)
    assert np.array_equal(u @ inv, np.eye(len(u), dtype=np.int64))
    return inv


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([1, 2, 4]))
def test_conjugate_structure_recovers_standard_form(seed, r):
    rng = np.random.default_rng(seed)
    n = 2 * r
    u = _random_gl(rng, n, 4 * n)
    std = ComplexStructure.standard(r).array()
    b = u @ std @ _inverse(u)
    # b is an isometry of sum_k (b^k)^T b^k; build a definite b-invariant Gram
    gram = sum(np.linalg.matrix_power(b, k).T @ np.linalg.matrix_power(b, k) for k in range(6))
    lat = ZLattice(tuple(map(tuple, gram.tolist())), "test")
    _, t = o_basis_from_endo(lat, b, return_basis=True)
    assert abs(round(np.linalg.det(t))) == 1
    assert np.array_equal(_inverse(t) @ b @ t, std)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_conjugation_invariance_lambda4(seed):
    rng = np.random.default_rng(seed)
    zl, B = trace_lattice(lambda4())
    u = _random_gl(rng, 8, 24)
    ui = _inverse(u)
    # new coordinates x' = u^-1 x: Gram u^T G u and structure u^-1 B u
    zl2 = ZLattice(tuple(map(tuple, (u.T @ zl.array() @ u).tolist())), "conj")
    lat2 = o_basis_from_endo(zl2, ui @ B.array() @ u)
    assert lat2.is_eisenstein()
    assert unitary_isometric(lat2, lambda4())[0]


@pytest.mark.parametrize("label", RANK12_LABELS)
def test_rank12_constructions(label):
    lat = build_rank12(label)
    assert lat.r == 12 and lat.is_eisenstein()
    assert herm_det(lat.hgram) == Fraction(4, 3) ** 6
    zl, B = trace_lattice(lat)
    assert B.is_isometry_of(zl)
    assert short_vectors(zl, 2, store=False).counts.get(2, 0) == RANK12_ROOTS[label]


def test_rank12_pairwise_nonisometric():
    zls = [trace_lattice(build_rank12(l))[0] for l in RANK12_LABELS]
    for i in range(len(zls)):
        for j in range(i + 1, len(zls)):
            assert is_isometric(zls[i], zls[j])[0] is False


@pytest.mark.parametrize("label", RANK12_LABELS)
def test_rank12_unitary_orders(label):
    grp = unitary_group(label)
    assert grp.order == TABLE_UNITARY_ORDERS[label]
    h = build_rank12(label).hgram
    for u in grp.generators[:4]:
        assert h.congruent(u) == h


def test_rank12_mass_identity():
    total = sum(Fraction(1, unitary_order(l)) for l in RANK12_LABELS)
    assert total == mass_even(12).value


def test_rank16_ratio():
    orders = {l: unitary_order(l) for l in RANK12_LABELS}
    ratio = rank16_mass_ratio(orders)
    assert 0 < ratio < Fraction(5, 10 ** 14)
    mu16 = mass_even(16).value
    assert all(Fraction(1, orders[l] * 155520) < mu16 for l in RANK12_LABELS)


@pytest.mark.parametrize("label", ["Lambda4", "12A2", "6D4"])
def test_conjugate_lattice_isometric(label):
    lat = lambda4() if label == "Lambda4" else build_rank12(label)
    assert unitary_isometric(lat, lat.conj())[0]


def test_olattice_json_roundtrip(tmp_path):
    lat = build_rank12("6D4")
    back = OLattice.from_json(lat.to_json())
    assert back == lat and back.zframe == lat.zframe
    assert back.content_hash() == lat.content_hash()
    import json
    d = json.loads(lat.to_json())
    d["hgram"][0][0] = "4 + 0*w"
    with pytest.raises(VerificationError):
        OLattice.from_json(json.dumps(d))
