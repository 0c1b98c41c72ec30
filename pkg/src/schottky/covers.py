"""Finite covers as coset actions, induced permutation reps and characters.

A cover of degree n is encoded by the permutations the m generators induce
on n cosets; inverse letters act by the inverse permutations.  Characters of
the induced representation are fixed-point counts, so everything stays in
exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (BudgetExceededError, IntransitiveActionError,
                     NonAbelianError, NonRegularActionError)
from .words import inverse_letter

Perm = tuple[int, ...]
IntMatrix = tuple[tuple[int, int], tuple[int, int]]

_BFS_CAP = 10_000_000  # group-closure size cap for congruence images


def _compose(p: Perm, q: Perm) -> Perm:
    """(p o q)(i) = p[q[i]]."""
    return tuple(p[x] for x in q)


def _invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


@dataclass(frozen=True)
class CosetAction:
    """Permutation images of the m generators on n cosets (0-based)."""

    n: int
    perms: tuple[Perm, ...]

    def __post_init__(self):
        object.__setattr__(self, "perms", tuple(tuple(p) for p in self.perms))
        for p in self.perms:
            if sorted(p) != list(range(self.n)):
                raise ValueError("generator image is not a permutation of 0..n-1")
        if not self._is_transitive():
            raise IntransitiveActionError("coset action is not transitive")

    @property
    def m(self) -> int:
        return len(self.perms)

    def _is_transitive(self) -> bool:
        seen = {0}
        frontier = [0]
        perms = list(self.perms) + [_invert(p) for p in self.perms]
        while frontier:
            x = frontier.pop()
            for p in perms:
                y = p[x]
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return len(seen) == self.n

    def letter_perm(self, letter: int) -> Perm:
        """Permutation of a letter in 1..2m (letters above m are inverses)."""
        if 1 <= letter <= self.m:
            return self.perms[letter - 1]
        if self.m < letter <= 2 * self.m:
            return _invert(self.perms[letter - self.m - 1])
        raise ValueError(f"letter {letter} outside 1..{2 * self.m}")

    def word_perm(self, letters: Sequence[int]) -> Perm:
        p = tuple(range(self.n))
        for l in letters:
            p = _compose(p, self.letter_perm(l))
        return p


def character(action: CosetAction, letters: Sequence[int]) -> int:
    """Fixed points of the word's permutation: the induced-rep character.

    A class function; positive exactly when the word is conjugate into the
    cover subgroup (some coset fixed); the identity word gives n.
    """
    p = action.word_perm(letters)
    return sum(1 for i, x in enumerate(p) if i == x)


@dataclass(frozen=True)
class UnitaryRep:
    """Finite-dimensional unitary representation by generator images."""

    images: tuple[np.ndarray, ...]

    def __post_init__(self):
        imgs = tuple(np.asarray(u, dtype=complex) for u in self.images)
        object.__setattr__(self, "images", imgs)
        d = self.dim
        for u in imgs:
            if u.shape != (d, d):
                raise ValueError("generator images must share one square shape")
            if np.max(np.abs(u @ u.conj().T - np.eye(d))) > 1e-10:
                raise ValueError("generator image is not unitary")

    @property
    def dim(self) -> int:
        return self.images[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.images)

    def letter_image(self, letter: int) -> np.ndarray:
        if 1 <= letter <= self.m:
            return self.images[letter - 1]
        if self.m < letter <= 2 * self.m:
            return self.images[letter - self.m - 1].conj().T
        raise ValueError(f"letter {letter} outside 1..{2 * self.m}")

    def word_image(self, letters: Sequence[int]) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for l in letters:
            u = u @ self.letter_image(l)
        return u


def trivial_rep(m: int, dim: int = 1) -> UnitaryRep:
    return UnitaryRep(tuple(np.eye(dim, dtype=complex) for _ in range(m)))


def induced_permutation_rep(action: CosetAction) -> UnitaryRep:
    """0/1 permutation matrices of the generators; character = fixed points."""
    images = []
    for p in action.perms:
        mat = np.zeros((action.n, action.n))
        mat[np.asarray(p), np.arange(action.n)] = 1.0
        images.append(mat)
    return UnitaryRep(tuple(images))


# ---------------------------------------------------------------------------
# Regular actions


def _perm_group_order(perms: Iterable[Perm], cap: int = 1_000_000) -> int:
    gens = [p for p in perms]
    gens += [_invert(p) for p in gens]
    idp = tuple(range(len(gens[0])))
    seen = {idp}
    frontier = [idp]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = _compose(x, g)
            if y not in seen:
                if len(seen) >= cap:
                    raise BudgetExceededError("permutation closure exceeded cap")
                seen.add(y)
                frontier.append(y)
    return len(seen)


def regular_action(n: int, gen_perms: Sequence[Sequence[int]]) -> CosetAction:
    """Action of a deck group on itself; degree equals the group order.

    ``gen_perms`` are the right-multiplication permutations of the generator
    images on an explicit element list of length n.  Rejects images that do
    not generate (the action would be intransitive) and actions that are not
    free of degree n.
    """
    action = CosetAction(n, tuple(tuple(p) for p in gen_perms))
    if _perm_group_order(action.perms) != n:
        raise NonRegularActionError("generated permutation group has order != n")
    return action


def is_regular(action: CosetAction) -> bool:
    try:
        return _perm_group_order(action.perms) == action.n
    except BudgetExceededError:
        return False


def cyclic_action(m: int, k: int, exponents: Sequence[int] | None = None) -> CosetAction:
    """Regular Z/k cover; generator i acts by +exponents[i] (default all +1)."""
    exps = list(exponents) if exponents is not None else [1] * m
    if len(exps) != m:
        raise ValueError("need one exponent per generator")
    perms = tuple(tuple((x + e) % k for x in range(k)) for e in exps)
    return regular_action(k, perms)


def product_cyclic_action(m: int, orders: Sequence[int],
                          images: Sequence[Sequence[int]]) -> CosetAction:
    """Regular cover by Z/k1 x ... x Z/kr; images are exponent tuples."""
    orders = list(orders)
    if any(len(im) != len(orders) for im in images) or len(images) != m:
        raise ValueError("need one exponent tuple per generator")
    elements = list(itertools.product(*[range(k) for k in orders]))
    index = {e: i for i, e in enumerate(elements)}
    perms = []
    for im in images:
        perm = [index[tuple((x + e) % k for x, e, k in zip(el, im, orders))]
                for el in elements]
        perms.append(tuple(perm))
    return regular_action(len(elements), tuple(perms))


def trivial_action(m: int) -> CosetAction:
    return CosetAction(1, tuple(tuple([0]) for _ in range(m)))


# ---------------------------------------------------------------------------
# Congruence actions


def _mat_mod(g: IntMatrix, q: int) -> tuple[int, int, int, int]:
    return (g[0][0] % q, g[0][1] % q, g[1][0] % q, g[1][1] % q)


def _mat_mul(x, y, q: int):
    return ((x[0] * y[0] + x[1] * y[2]) % q,
            (x[0] * y[1] + x[1] * y[3]) % q,
            (x[2] * y[0] + x[3] * y[2]) % q,
            (x[2] * y[1] + x[3] * y[3]) % q)


def _mat_inv(x, q: int):
    # det = 1 mod q, so the adjugate is the inverse
    return (x[3] % q, (-x[1]) % q, (-x[2]) % q, x[0] % q)


def sl2_image(int_gens: Sequence[IntMatrix], q: int) -> set:
    """BFS closure of the generator images in SL2(Z/q)."""
    if q < 2:
        raise ValueError("q must be >= 2")
    gens = []
    for g in int_gens:
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if det != 1:
            raise ValueError("generators must have determinant 1")
        gm = _mat_mod(g, q)
        gens += [gm, _mat_inv(gm, q)]
    identity = (1 % q, 0, 0, 1 % q)
    seen = {identity}
    frontier = [identity]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = _mat_mul(x, g, q)
            if y not in seen:
                if len(seen) >= _BFS_CAP:
                    raise BudgetExceededError("SL2 image closure exceeded cap")
                seen.add(y)
                frontier.append(y)
    return seen


def _subgroup_elements(q: int, kind: int, group: set) -> list:
    """Elements of H_kind intersected with the image group.

    H_0: upper triangular, H_1: upper unitriangular, H_2: identity only.
    """
    if kind == 2:
        return [(1 % q, 0, 0, 1 % q)]
    out = []
    for x in group:
        if x[2] != 0:
            continue
        if kind == 1 and not (x[0] == 1 % q and x[3] == 1 % q):
            continue
        out.append(x)
    return out


def congruence_action(int_gens: Sequence[IntMatrix], q: int, kind: int) -> CosetAction:
    """Action on cosets of the level-q congruence subgroup of the given kind.

    kind 0/1/2 selects lower-left = 0 / unitriangular / identity mod q.  The
    image group G is computed by BFS closure in SL2(Z/q); cosets are g(H n G)
    with the generators acting by left multiplication, so the degree equals
    the index of the congruence subgroup.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if kind not in (0, 1, 2):
        raise ValueError("kind must be 0, 1 or 2")
    group = sl2_image(int_gens, q)
    subgroup = _subgroup_elements(q, kind, group)

    def coset_key(x):
        return min(_mat_mul(x, h, q) for h in subgroup)

    gens = [_mat_mod(g, q) for g in int_gens]
    identity = (1 % q, 0, 0, 1 % q)
    start = coset_key(identity)
    index = {start: 0}
    reps = [start]
    frontier = [start]
    letters = gens + [_mat_inv(g, q) for g in gens]
    while frontier:
        x = frontier.pop()
        for g in letters:
            y = coset_key(_mat_mul(g, x, q))
            if y not in index:
                index[y] = len(reps)
                reps.append(y)
                frontier.append(y)
    perms = []
    for g in gens:
        perms.append(tuple(index[coset_key(_mat_mul(g, x, q))] for x in reps))
    return CosetAction(len(reps), tuple(perms))


# ---------------------------------------------------------------------------
# Characters of abelian deck groups


def abelian_characters(action: CosetAction) -> list[UnitaryRep]:
    """All 1-dimensional characters of an abelian regular deck group.

    Elements are reached by BFS recording an exponent vector per element;
    closing edges contribute relation vectors.  A character assigns the i-th
    generator exp(2 pi i a_i / e) (e the group exponent), valid iff every
    relation maps to 1; all |G| solutions are returned.
    """
    if not is_regular(action):
        raise NonRegularActionError("characters require a regular action")
    m, n = action.m, action.n
    perms = [action.perms[i] for i in range(m)]
    for p, r in itertools.combinations(perms, 2):
        if _compose(p, r) != _compose(r, p):
            raise NonAbelianError("deck group is not abelian")

    idp = tuple(range(n))
    exps: dict[Perm, tuple[int, ...]] = {idp: (0,) * m}
    frontier = [idp]
    relations: set[tuple[int, ...]] = set()
    while frontier:
        x = frontier.pop()
        ex = exps[x]
        for i, p in enumerate(perms):
            y = _compose(x, p)
            ey = tuple(e + (1 if j == i else 0) for j, e in enumerate(ex))
            if y in exps:
                rel = tuple(a - b for a, b in zip(ey, exps[y]))
                if any(rel):
                    relations.add(rel)
            else:
                exps[y] = ey
                frontier.append(y)

    def perm_order(p: Perm) -> int:
        k, x = 1, p
        while x != idp:
            x = _compose(x, p)
            k += 1
        return k

    exponent = 1
    for p in perms:
        exponent = math.lcm(exponent, perm_order(p))

    chars = []
    for a in itertools.product(range(exponent), repeat=m):
        if all(sum(r * ai for r, ai in zip(rel, a)) % exponent == 0
               for rel in relations):
            images = tuple(
                np.array([[np.exp(2j * np.pi * ai / exponent)]]) for ai in a)
            chars.append(UnitaryRep(images))
    if len(chars) != n:
        raise NonAbelianError(
            f"found {len(chars)} characters for a group of order {n}")
    return chars


# ---------------------------------------------------------------------------
# Serialization

def action_to_dict(action: CosetAction) -> dict:
    return {
        "degree": action.n,
        "generator_perms": [[x + 1 for x in p] for p in action.perms],
    }


def action_from_dict(data: dict) -> CosetAction:
    n = int(data["degree"])
    perms = tuple(tuple(int(x) - 1 for x in p) for p in data["generator_perms"])
    return CosetAction(n, perms)


def save_action(action: CosetAction, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(action_to_dict(action), fh, indent=2)


def load_action(path: str) -> CosetAction:
    with open(path) as fh:
        return action_from_dict(json.load(fh))
