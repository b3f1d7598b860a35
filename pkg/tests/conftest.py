"""Session-wide caches for the expensive lattice computations."""
from functools import lru_cache

import pytest

from eislat.hermitian import RANK12_LABELS, aut_z, build_rank12, unitary_aut

# orders from the classification table; the Leech entry includes the factor 7 (see notes)
TABLE_UNITARY_ORDERS = {
    "3E8": 2 ** 22 * 3 ** 16 * 5 ** 3,
    "4E6": 2 ** 16 * 3 ** 17,
    "6D4": 2 ** 21 * 3 ** 9 * 5,
    "12A2": 2 ** 7 * 3 ** 15 * 5 * 11,
    "Leech": 2 ** 14 * 3 ** 8 * 5 ** 2 * 7 * 11 * 13,
}
TABLE_LEECH_ORDER_AS_PRINTED = 2 ** 14 * 3 ** 8 * 5 ** 2 * 11 * 13
TABLE_INDICES = {
    "3E8": 2 ** 21 * 5 ** 3 * 7 ** 3,
    "4E6": 2 ** 16 * 5 ** 4,
    "6D4": 2 ** 19,
    "12A2": 2 ** 12,
    "Leech": 2 ** 8 * 3 * 5 ** 2 * 7 * 23,
}


@lru_cache(maxsize=None)
def unitary_order(label: str) -> int:
    return unitary_aut(build_rank12(label)).order


@lru_cache(maxsize=None)
def unitary_group(label: str):
    return unitary_aut(build_rank12(label))


@lru_cache(maxsize=None)
def z_order(label: str) -> int:
    return aut_z(build_rank12(label)).order


@pytest.fixture(scope="session")
def rank12():
    return {lab: build_rank12(lab) for lab in RANK12_LABELS}
