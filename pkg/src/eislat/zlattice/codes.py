"""The small codes used as glue: ternary Golay, tetracode (F_3) and hexacode (F_4)."""
from __future__ import annotations

import itertools
from collections import Counter

# F_4 = {0, 1, w, w^2} encoded as 0, 1, 2, 3 with bits in the basis (1, w); addition is xor.
F4_MUL = [
    [0, 0, 0, 0],
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
]
F4_CONJ = [0, 1, 3, 2]

GOLAY_A = [
    [0, 1, 1, 1, 1, 1],
    [1, 0, 1, 2, 2, 1],
    [1, 1, 0, 1, 2, 2],
    [1, 2, 1, 0, 1, 2],
    [1, 2, 2, 1, 0, 1],
    [1, 1, 2, 2, 1, 0],
]


def ternary_span(gens: list[list[int]]) -> list[tuple[int, ...]]:
    n = len(gens[0])
    words = set()
    for coeffs in itertools.product(range(3), repeat=len(gens)):
        words.add(tuple(sum(c * g[k] for c, g in zip(coeffs, gens)) % 3 for k in range(n)))
    return sorted(words)


def ternary_golay_generators() -> list[list[int]]:
    return [[int(i == j) for j in range(6)] + GOLAY_A[i] for i in range(6)]


def ternary_golay() -> list[tuple[int, ...]]:
    """All 729 words of the extended ternary Golay code [12, 6, 6]."""
    return ternary_span(ternary_golay_generators())


def tetracode_generators() -> list[list[int]]:
    return [[1, 1, 1, 0], [0, 1, 2, 1]]


def tetracode() -> list[tuple[int, ...]]:
    return ternary_span(tetracode_generators())


def hexacode_generators() -> list[list[int]]:
    w, wb = 2, 3
    return [
        [1, 0, 0, 1, wb, w],
        [0, 1, 0, 1, w, wb],
        [0, 0, 1, 1, 1, 1],
    ]


def f4_span(gens: list[list[int]]) -> list[tuple[int, ...]]:
    n = len(gens[0])
    words = set()
    for coeffs in itertools.product(range(4), repeat=len(gens)):
        word = [0] * n
        for c, g in zip(coeffs, gens):
            for k in range(n):
                word[k] ^= F4_MUL[c][g[k]]
        words.add(tuple(word))
    return sorted(words)


def hexacode() -> list[tuple[int, ...]]:
    """All 64 words of the hexacode [6, 3, 4] over F_4."""
    return f4_span(hexacode_generators())


def weight_distribution(words) -> dict[int, int]:
    return dict(sorted(Counter(sum(1 for a in w if a) for w in words).items()))
