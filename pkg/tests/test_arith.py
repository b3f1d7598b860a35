from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from eislat.arith import (OMEGA, THETA, EisInt, HermitianMatrix, KScalar, eis_divmod,
                          eis_norm, herm_det, units)

ints = st.integers(-10 ** 6, 10 ** 6)
eis = st.builds(EisInt, ints, ints)
small = st.integers(-50, 50)
fracs = st.fractions(min_value=-100, max_value=100, max_denominator=30)
kscalars = st.builds(KScalar, fracs, fracs)


def test_norm_examples():
    assert eis_norm(OMEGA) == 1
    assert eis_norm(EisInt(0, 0)) == 0
    assert eis_norm(THETA) == 3


def test_omega_relations():
    assert OMEGA * OMEGA == OMEGA - 1
    assert OMEGA.conj() == 1 - OMEGA
    assert THETA * THETA == EisInt(-3, 0)
    assert len(set(units())) == 6
    assert all(u.norm() == 1 for u in units())


def test_divmod_examples():
    q, r = eis_divmod(EisInt(5, 0), EisInt(2, 0))
    assert q * 2 + r == EisInt(5, 0) and r.norm() < 4
    assert eis_divmod(OMEGA, OMEGA) == (EisInt(1, 0), EisInt(0, 0))
    q, r = eis_divmod(THETA, OMEGA)
    assert q * OMEGA + r == THETA and r.norm() <= 1
    with pytest.raises(ZeroDivisionError):
        eis_divmod(OMEGA, EisInt(0, 0))


@settings(max_examples=300)
@given(eis, eis)
def test_divmod_postcondition(x, y):
    if y.is_zero():
        return
    q, r = eis_divmod(x, y)
    assert q * y + r == x
    assert r.norm() < y.norm()


@given(eis, eis)
def test_norm_multiplicative_and_conj_involution(x, y):
    assert (x * y).norm() == x.norm() * y.norm()
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x + y).conj() == x.conj() + y.conj()
    assert x.conj().conj() == x


@given(kscalars, kscalars)
def test_field_axioms(x, y):
    assert x.conj().conj() == x
    n = x * x.conj()
    assert n.b == 0 and n.a >= 0
    if x != 0:
        assert x * x.inverse() == 1
        assert (y / x) * x == y
    assert x * (y + 1) == x * y + x


def test_kscalar_serialization_roundtrip():
    x = KScalar(Fraction(-2, 3), Fraction(4, 6))
    assert str(x) == "-2/3 + 2/3*w"
    assert KScalar.parse(str(x)) == x


def test_herm_det_examples():
    assert herm_det(HermitianMatrix([[1 if i == j else 0 for j in range(4)] for i in range(4)])) == 1
    assert herm_det(HermitianMatrix([[2, 0], [0, 2]])) == 4
    from eislat.hermitian import lambda4
    assert herm_det(lambda4().hgram) == Fraction(16, 9)


def test_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianMatrix([[1, OMEGA], [OMEGA, 1]])


def _random_unimodular(rng, n):
    u = [[EisInt(int(i == j), 0) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2)
        c = EisInt(rng.randint(-2, 2), rng.randint(-2, 2))
        for row in u:
            row[j] = row[j] + c * row[i]
    return u


@pytest.mark.parametrize("seed", range(20))
def test_herm_det_congruence(seed):
    rng = random.Random(seed)
    from eislat.hermitian import lambda4
    h = lambda4().hgram
    u = _random_unimodular(rng, 4)
    hu = h.congruent(u)
    assert hu.is_hermitian()
    # unimodular over O: |det U|^2 = 1
    assert herm_det(hu) == herm_det(h)
