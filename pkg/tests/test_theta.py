from fractions import Fraction
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eislat.arith import EisInt, HermitianMatrix, KScalar, units
from eislat.hermitian import (RANK12_LABELS, RANK12_ROOTS, OLattice, build_rank12,
                              hermitian_from_real, lambda4, trace_lattice)
from eislat.theta import (COMBOS, STATED_G3_AS_PRINTED, STATED_G3_INDEX, LatticeVectors, ThetaIndex,
                          ThetaTable, combo_coeffs, cusp_check, delta_qexp, reduce_index2,
                          siegel_phi, theta_coeff, theta_deg1, theta_deg2_table)
from eislat.zlattice.enumerate import ResourceGuardError
from eislat.zlattice.lattice import short_vectors


def _sigma3(n):
    return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)


def niemeier_theta_oracle(roots, terms):
    """q-coefficients of E4^3 + (roots - 720) Delta."""
    e4 = [1] + [240 * _sigma3(n) for n in range(1, terms)]
    e4_2 = [sum(e4[i] * e4[n - i] for i in range(n + 1)) for n in range(terms)]
    e4_3 = [sum(e4_2[i] * e4[n - i] for i in range(n + 1)) for n in range(terms)]
    tau = delta_qexp(terms - 1)
    return [e4_3[n] + (roots - 720) * tau[n] for n in range(terms)]


@pytest.fixture(scope="module")
def l4_vectors():
    return LatticeVectors(lambda4(), 8, group=None)


@pytest.fixture(scope="module")
def l4_vectors_group():
    from eislat.hermitian import unitary_aut
    return LatticeVectors(lambda4(), 8, group=unitary_aut(lambda4()).zgroup.generators)


# --- indices -------------------------------------------------------------------------------

def test_index_admissibility():
    assert ThetaIndex.diag(2, 4).is_admissible()
    assert not ThetaIndex.diag(1).is_admissible()
    assert ThetaIndex.deg2(2, KScalar(Fraction(-1, 3), Fraction(2, 3)), 2).is_admissible()
    assert not ThetaIndex.deg2(2, KScalar(Fraction(1, 2)), 2).is_admissible()
    assert STATED_G3_INDEX.is_admissible() and STATED_G3_INDEX.is_psd()
    assert not STATED_G3_AS_PRINTED.is_admissible()
    assert not ThetaIndex.deg2(2, 3, 2).is_psd()


def test_delta_qexp():
    assert delta_qexp(6) == [0, 1, -24, 252, -1472, 4830, -6048]


# --- degree 1 ------------------------------------------------------------------------------

def test_theta_deg1_lambda4_is_e8():
    t = theta_deg1(lambda4(), 8)
    assert t.deg1_list() == [1, 240, 2160, 6720, 17520]
    assert t.deg1_list() == theta_deg1(lambda4(), 8, method="enumerate").deg1_list()


@pytest.mark.parametrize("label", RANK12_LABELS)
def test_theta_deg1_rank12(label):
    t = theta_deg1(build_rank12(label), 12)
    coeffs = t.deg1_list()
    assert coeffs[0] == 1
    assert coeffs[1] == RANK12_ROOTS[label]
    assert coeffs[2] == 196560 - 24 * coeffs[1]
    assert coeffs == niemeier_theta_oracle(RANK12_ROOTS[label], 7)


def test_theta_deg1_frame_matches_enumeration():
    lat = build_rank12("12A2")
    assert theta_deg1(lat, 6, method="frame").deg1_list() == \
        theta_deg1(lat, 6, method="enumerate").deg1_list() == [1, 72, 194832, 16791264]


def test_theta_deg1_leech_norm20():
    t = theta_deg1(build_rank12("Leech"), 20)
    assert t.deg1_list() == niemeier_theta_oracle(0, 11)
    assert t.deg1_list()[:3] == [1, 0, 196560]


# --- degree 2 and 3 ------------------------------------------------------------------------

def _root_pairs_oracle():
    """Ordered pairs of roots (x, y) of the trace lattice of Lambda4 with h(x, y) = 0."""
    zl, B = trace_lattice(lambda4())
    roots = short_vectors(zl, 2).vectors.astype(np.int64)
    g = zl.array()
    b = roots @ g @ roots.T
    bb = roots @ (g @ B.array()) @ roots.T
    return int(np.count_nonzero((b == 0) & (bb == 0)))


def test_lambda4_orthogonal_root_pairs(l4_vectors):
    expected = _root_pairs_oracle()
    assert expected == 240 * 72
    assert theta_coeff(lambda4(), ThetaIndex.diag(2, 2), vectors=l4_vectors) == expected
    assert theta_coeff(lambda4(), ThetaIndex.diag(2, 2)) == expected


def test_theta_coeff_trivial_cases(l4_vectors):
    assert theta_coeff(lambda4(), ThetaIndex.diag(0, 0)) == 1
    assert theta_coeff(lambda4(), ThetaIndex(HermitianMatrix([]))) == 1
    assert theta_coeff(lambda4(), ThetaIndex.diag(2), vectors=l4_vectors) == 240
    assert theta_coeff(lambda4(), ThetaIndex.diag(1, 2), vectors=l4_vectors) == 0
    assert theta_coeff(lambda4(), ThetaIndex.deg2(2, KScalar(Fraction(1, 2)), 2),
                       vectors=l4_vectors) == 0


def _random_gl2o(rng, steps=4, n=2):
    u = [[EisInt(int(i == j), 0) for j in range(n)] for i in range(n)]
    us = units()
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = EisInt(rng.randint(-1, 1), rng.randint(-1, 1))
        for row in u:
            row[j] = row[j] + c * row[i]
        k = rng.randrange(n)
        s = us[rng.randrange(6)]
        for row in u:
            row[k] = row[k] * s
    return u


def _all_deg2_indices(table):
    return [ThetaIndex(HermitianMatrix.from_strings(json.loads(k))) for k in table.coeffs]


@pytest.fixture(scope="module")
def l4_table(l4_vectors_group):
    return theta_deg2_table(lambda4(), 6, vectors=l4_vectors_group)


def test_deg2_table_group_vs_plain(l4_table, l4_vectors):
    plain = theta_deg2_table(lambda4(), 6, vectors=l4_vectors)
    assert plain.coeffs == l4_table.coeffs
    assert l4_table[ThetaIndex.diag(0, 0)] == 1
    assert l4_table[ThetaIndex.diag(2, 2)] == 17280


def test_deg2_table_threads(l4_vectors_group, l4_table):
    assert theta_deg2_table(lambda4(), 6, vectors=l4_vectors_group, threads=3).coeffs == l4_table.coeffs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_theta_coeff_unimodular_invariance(l4_table, l4_vectors_group, seed):
    rng = random.Random(seed)
    idx = rng.choice(_all_deg2_indices(l4_table))
    u = _random_gl2o(rng)
    t2 = ThetaIndex(idx.T.congruent(u))
    assert reduce_index2(t2) == reduce_index2(idx)
    d = [t2.T[0, 0].real, t2.T[1, 1].real]
    if max(d) <= 8:
        assert theta_coeff(lambda4(), t2, vectors=l4_vectors_group) == l4_table[idx]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_reduce_index2_idempotent(seed):
    rng = random.Random(seed)
    a = 2 * rng.randint(0, 5)
    c = 2 * rng.randint(0, 5)
    t = KScalar(Fraction(-1, 3), Fraction(2, 3)) * EisInt(rng.randint(-3, 3), rng.randint(-3, 3))
    idx = ThetaIndex.deg2(a, t, c)
    if not idx.is_psd():
        with pytest.raises(ValueError):
            reduce_index2(ThetaIndex.deg2(0, t, c)) if t != 0 else reduce_index2(ThetaIndex.deg2(0, 1, c))
        return
    r = reduce_index2(idx)
    assert reduce_index2(r) == r
    assert r.T[0, 0].real <= r.T[1, 1].real
    assert r.T.det() == idx.T.det()
    assert reduce_index2(ThetaIndex(idx.T.congruent(_random_gl2o(rng, steps=6)))) == r


def test_deg3_group_vs_plain(l4_vectors, l4_vectors_group):
    rng = random.Random(7)
    zl, B = trace_lattice(lambda4())
    roots = l4_vectors.vectors(2).astype(np.int64)
    done = 0
    while done < 6:
        # an index realized by three roots, plus a sign-flipped variant
        x = roots[rng.sample(range(len(roots)), 3)]
        g, f = l4_vectors.gram, l4_vectors.form
        H = [[hermitian_from_real(int(x[i] @ g @ x[j]), int(x[i] @ f @ x[j])) for j in range(3)]
             for i in range(3)]
        idx = ThetaIndex(HermitianMatrix(H))
        a = theta_coeff(lambda4(), idx, vectors=l4_vectors)
        b = theta_coeff(lambda4(), idx, vectors=l4_vectors_group)
        assert a == b and a > 0
        done += 1


def test_isometric_copy_invariance(l4_vectors_group):
    rng = random.Random(3)
    lat = lambda4()
    u = _random_gl2o(rng, steps=10, n=4)
    lat2 = OLattice(4, lat.hgram.congruent(u), "basis change", "Lambda4'")
    assert lat2.is_eisenstein()
    for idx in [ThetaIndex.diag(2, 4), ThetaIndex.deg2(4, KScalar(1), 4),
                ThetaIndex.deg2(2, KScalar(Fraction(-1, 3), Fraction(2, 3)), 4)]:
        assert theta_coeff(lat2, idx, group=None) == theta_coeff(lat, idx, vectors=l4_vectors_group)


def test_siegel_phi(l4_table):
    t1 = theta_deg1(lambda4(), 6)
    p0 = siegel_phi(t1)
    assert p0.degree == 0 and list(p0.coeffs.values()) == [1]
    p1 = siegel_phi(l4_table)
    assert p1.degree == 1 and p1.deg1_list() == t1.deg1_list()


def test_table_serialization(l4_table):
    back = ThetaTable.from_json(l4_table.to_json())
    assert back.coeffs == l4_table.coeffs and back.degree == 2
    csv = l4_table.to_csv().splitlines()
    assert csv[0] == "index,coefficient" and len(csv) == len(l4_table.coeffs) + 1


def test_budget_guard_and_partial_table():
    with pytest.raises(ResourceGuardError):
        LatticeVectors(lambda4(), 8, max_vectors=1000)
    tab = theta_deg2_table(lambda4(), 6, group=None, max_vectors=3000)
    assert tab.complete is False and tab.bound < 6
    assert tab[ThetaIndex.diag(2, 2)] == 17280


# --- combinations --------------------------------------------------------------------------

def test_combo_definitions():
    assert [c for c, _ in COMBOS["F"].terms] == [1, -30, 135, -160, 54]
    assert all(c.coefficient_sum() == 0 for c in COMBOS.values())
    assert [lab for _, lab in COMBOS["F"].terms] == list(RANK12_LABELS)


def test_combo_degree1_root_counts():
    tabs = {lab: theta_deg1(build_rank12(lab), 4) for lab in RANK12_LABELS}
    assert combo_coeffs(COMBOS["F"], [0, 2], tables=tabs) == [0, 0]
    assert combo_coeffs(COMBOS["H"], [0, 2], tables=tabs) == [0, 0]
    assert combo_coeffs(COMBOS["J"], [2], tables=tabs) == [72]


def test_cusp_check_j():
    rep = cusp_check(COMBOS["J"], 16)
    assert rep["phi_image_zero"]
    assert rep["nonzero_witness"]["value"] == 72
    assert rep["delta_constant"] == 72 and rep["proportional_to_delta"]
    assert rep["stated_constant"] == 720 and rep["stated_constant_matches"] is False


def test_cusp_check_h_degree2_small():
    rep = cusp_check(COMBOS["H"], 4, degree=2)
    assert rep["phi_image_zero"]
    assert rep["status"] == "ok" and rep["nonzero_witness"]["value"] != 0
