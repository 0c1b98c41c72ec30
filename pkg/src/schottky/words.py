"""Word combinatorics over the symmetric generator alphabet {1, ..., 2m}.

Letter j <= m stands for the j-th generator, letter j+m for its inverse,
indices understood cyclically mod 2m.  A word is reduced when no letter is
followed by its inverse letter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .moebius import MoebiusMap

Letters = tuple[int, ...]


def inverse_letter(letter: int, m: int) -> int:
    """The letter of the inverse generator, 1-based."""
    return (letter + m - 1) % (2 * m) + 1


def is_reduced(letters: Sequence[int], m: int) -> bool:
    return all(letters[i + 1] != inverse_letter(letters[i], m)
               for i in range(len(letters) - 1))


def is_cyclically_reduced(letters: Sequence[int], m: int) -> bool:
    if not is_reduced(letters, m):
        return False
    if len(letters) >= 2 and letters[0] == inverse_letter(letters[-1], m):
        return False
    return True


def reduce_letters(letters: Iterable[int], m: int) -> Letters:
    """Free reduction: cancel adjacent inverse pairs until none remain."""
    out: list[int] = []
    for l in letters:
        if out and l == inverse_letter(out[-1], m):
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def invert_letters(letters: Sequence[int], m: int) -> Letters:
    return tuple(inverse_letter(l, m) for l in reversed(letters))


@dataclass(frozen=True)
class Word:
    """A word over {1, ..., 2m}; ``reduced`` records the no-cancellation flag."""

    letters: Letters
    m: int
    reduced: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(l) for l in self.letters))
        for l in self.letters:
            if not 1 <= l <= 2 * self.m:
                raise ValueError(f"letter {l} outside 1..{2 * self.m}")
        object.__setattr__(self, "reduced", is_reduced(self.letters, self.m))

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(invert_letters(self.letters, self.m), self.m)

    def __mul__(self, other: "Word") -> "Word":
        if self.m != other.m:
            raise ValueError("rank mismatch")
        return Word(reduce_letters(self.letters + other.letters, self.m), self.m)


def enumerate_words(m: int, n: int, first_constraint: int | None = None) -> list[Word]:
    """All reduced words of length n; cardinality 2m(2m-1)^(n-1).

    With ``first_constraint = j`` the first letter is restricted to
    alpha_1 != j+m mod 2m, giving (2m-1)^n words.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if first_constraint is not None and not 1 <= first_constraint <= 2 * m:
        raise ValueError("first_constraint outside 1..2m")
    return [Word(ls, m) for ls in _letter_tuples(m, n, first_constraint)]


def _letter_tuples(m: int, n: int, first_constraint: int | None) -> Iterator[Letters]:
    alphabet = range(1, 2 * m + 1)
    if first_constraint is None:
        firsts = list(alphabet)
    else:
        banned = inverse_letter(first_constraint, m)
        firsts = [l for l in alphabet if l != banned]

    def extend(prefix: list[int]) -> Iterator[Letters]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        banned = inverse_letter(prefix[-1], m)
        for l in alphabet:
            if l != banned:
                prefix.append(l)
                yield from extend(prefix)
                prefix.pop()

    for f in firsts:
        yield from extend([f])


def word_matrix(letters: Sequence[int], generators: Sequence[MoebiusMap]) -> MoebiusMap:
    """Product of the 2m generators (inverses included) along the word."""
    g = MoebiusMap.identity()
    for l in letters:
        g = g @ generators[l - 1]
    return g


def word_product(letters: Sequence[int],
                 generators: Sequence[MoebiusMap]) -> tuple[float, float, float, float]:
    """Raw (a, b, c, d) of the word's matrix, without re-normalisation.

    Long products have entries ~ e^(l/2); their determinant is 1 exactly in
    exact arithmetic but cannot be recomputed stably from the entries, so no
    unit-determinant check is applied here.
    """
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    for l in letters:
        g = generators[l - 1]
        a, b, c, d = (a * g.a + b * g.c, a * g.b + b * g.d,
                      c * g.a + d * g.c, c * g.b + d * g.d)
    return a, b, c, d


def word_displacement(letters: Sequence[int],
                      generators: Sequence[MoebiusMap]) -> float | None:
    """Displacement length 2 arccosh(|tr|/2) of the word, None if not hyperbolic."""
    a, _, _, d = word_product(letters, generators)
    t = abs(a + d)
    if t <= 2.0 + 1e-9:
        return None
    return 2.0 * math.acosh(t / 2.0)


def _min_rotation(letters: Letters) -> Letters:
    return min(letters[i:] + letters[:i] for i in range(len(letters)))


def _is_aperiodic(letters: Letters) -> bool:
    n = len(letters)
    for p in range(1, n):
        if n % p == 0 and letters == letters[p:] + letters[:p]:
            return False
    return True


@lru_cache(maxsize=None)
def necklaces(m: int, n: int, primitive: bool = False) -> tuple[Letters, ...]:
    """Cyclically reduced words of length n, one per rotation class.

    Representatives are minimal under rotation in lexicographic order; with
    ``primitive`` only aperiodic classes (no proper-power words) are kept.
    Inverse classes are kept distinct.
    """
    seen: set[Letters] = set()
    out: list[Letters] = []
    for ls in _letter_tuples(m, n, None):
        if not is_cyclically_reduced(ls, m):
            continue
        rep = _min_rotation(ls)
        if rep in seen:
            continue
        seen.add(rep)
        if primitive and not _is_aperiodic(rep):
            continue
        out.append(rep)
    return tuple(sorted(out))
