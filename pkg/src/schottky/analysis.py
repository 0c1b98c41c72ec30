"""Cover-level invariants: shortest geodesics, 0-volume, girth, factorization.

Girth here is the length of the shortest nontrivial reduced relation of the
deck group over the symmetric generating set, i.e. the shortest closed
non-backtracking cycle through the identity of the labelled Cayley graph.
For a regular cover this equals the minimal word length over the nontrivial
elements of the cover subgroup, which is how the two quantities are checked
against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covers import (CosetAction, abelian_characters, character,
                     congruence_action, induced_permutation_rep, is_regular)
from .errors import BudgetExceededError, NonRegularActionError
from .scheme import IntMatrix, SchottkyScheme, contraction_bound
from .transfer import TransferAssembler
from .words import inverse_letter, necklaces, word_displacement


@dataclass(frozen=True)
class CoverInvariants:
    degree: int
    ell0: float
    ell0_certified: bool
    zvol: float
    girth: int | float | None
    min_subgroup_word_length: int | None


@dataclass(frozen=True)
class GeodesicBound:
    length: float
    word: tuple[int, ...]
    certified: bool


def l0_cover(scheme: SchottkyScheme, action: CosetAction,
             max_len: int) -> GeodesicBound:
    """Shortest geodesic length on the cover, from fixed-point classes.

    Scans cyclically reduced class representatives of word length <= max_len
    whose permutation fixes a coset (exactly the classes meeting the cover
    subgroup) and minimises the displacement length.  Certification as for
    the base shortest-geodesic search: complete when
    max_len log(1/theta) exceeds the minimum found.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    gens = [scheme.generator(l) for l in scheme.letters]
    best, best_word = math.inf, ()
    for n in range(1, max_len + 1):
        for rep in necklaces(scheme.m, n):
            if character(action, rep) == 0:
                continue
            ell = word_displacement(rep, gens)
            if ell is not None and ell < best:
                best, best_word = ell, rep
    theta = contraction_bound(scheme)
    certified = math.isfinite(best) and max_len * math.log(1.0 / theta) > best
    return GeodesicBound(best, best_word, certified)


def zero_volume(scheme_or_rank: SchottkyScheme | int, degree: int = 1) -> float:
    """0-volume 2 pi (m - 1) of a rank-m surface, times the covering degree."""
    m = scheme_or_rank.m if isinstance(scheme_or_rank, SchottkyScheme) \
        else int(scheme_or_rank)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    return 2.0 * math.pi * (m - 1) * degree


def girth(action: CosetAction, cap: int = 10_000_000) -> int | float:
    """Shortest nontrivial reduced relation length of a regular cover.

    BFS over (group element, last letter) states applying all letters except
    the immediate inverse; the first return to the identity is the shortest
    cyclically reduced word in the deck-group kernel.  Infinite for a free
    (trivial-kernel) action, which cannot occur at finite degree > 1 unless
    the alphabet is exhausted.
    """
    if not is_regular(action):
        raise NonRegularActionError("girth is defined for regular covers")
    m = action.m
    letters = list(range(1, 2 * m + 1))
    perms = {l: action.letter_perm(l) for l in letters}
    identity = tuple(range(action.n))

    # depth-1 relations: a generator mapping to the identity of the deck group
    for l in letters:
        if perms[l] == identity:
            return 1

    frontier = [(perms[l], l) for l in letters]
    seen = set(frontier)
    depth = 1
    while frontier:
        depth += 1
        nxt = []
        for g, last in frontier:
            banned = inverse_letter(last, m)
            for l in letters:
                if l == banned:
                    continue
                h = tuple(g[x] for x in perms[l])
                if h == identity:
                    return depth
                state = (h, l)
                if state not in seen:
                    if len(seen) > cap:
                        raise BudgetExceededError("girth BFS exceeded cap")
                    seen.add(state)
                    nxt.append(state)
        frontier = nxt
    return math.inf


def min_subgroup_word_length(scheme_rank: int, action: CosetAction,
                             max_len: int) -> int | None:
    """min WL over nontrivial classes meeting the cover subgroup, or None.

    Independent of the girth BFS: enumerates necklaces and filters on the
    fixed-point character, exactly as the cover geodesic search does.
    """
    for n in range(1, max_len + 1):
        for rep in necklaces(scheme_rank, n):
            if character(action, rep) > 0:
                return n
    return None


def cover_invariants(scheme: SchottkyScheme, action: CosetAction,
                     max_len: int = 8) -> CoverInvariants:
    bound = l0_cover(scheme, action, max_len)
    regular = is_regular(action)
    return CoverInvariants(
        degree=action.n,
        ell0=bound.length,
        ell0_certified=bound.certified,
        zvol=zero_volume(scheme, action.n),
        girth=girth(action) if regular else None,
        min_subgroup_word_length=min_subgroup_word_length(scheme.m, action, max_len),
    )


@dataclass(frozen=True)
class CongruenceL0Report:
    q: int
    degree: int
    ell0: float
    certified: bool
    lower_bound: float
    satisfied: bool


def l0_congruence_check(scheme: SchottkyScheme, int_gens: tuple[IntMatrix, ...],
                        q: int, max_len: int = 6) -> CongruenceL0Report:
    """Shortest cover geodesic of the lower-triangular-vanishing cover vs
    the log(q/(4 sqrt 2)) lower bound."""
    if q < 2:
        return CongruenceL0Report(q, 1, math.inf, True, -math.inf, True)
    action = congruence_action(int_gens, q, kind=0)
    bound = l0_cover(scheme, action, max_len)
    lower = math.log(q / (4.0 * math.sqrt(2.0)))
    return CongruenceL0Report(
        q=q, degree=action.n, ell0=bound.length, certified=bound.certified,
        lower_bound=lower, satisfied=bound.length >= lower)


def factorization_check(scheme: SchottkyScheme, action: CosetAction,
                        s_samples, Q: int = 30) -> float:
    """Max relative error of det(I - L_{s,lambda}) against the character product.

    For an abelian regular cover the induced representation decomposes into
    the deck group's characters, so the twisted determinant must equal the
    product of the character-twisted determinants at every s.
    """
    chars = abelian_characters(action)
    lam = induced_permutation_rep(action)
    asm_lam = TransferAssembler(scheme, rep=lam, Q=Q)
    asm_chars = [TransferAssembler(scheme, rep=ch, Q=Q) for ch in chars]
    worst = 0.0
    for s in s_samples:
        s = complex(s)
        n = asm_lam.size
        det_lam = complex(np.linalg.det(np.eye(n, dtype=complex) - asm_lam.matrix(s)))
        prod = 1.0 + 0.0j
        for asm in asm_chars:
            k = asm.size
            prod *= complex(np.linalg.det(np.eye(k, dtype=complex) - asm.matrix(s)))
        denom = max(abs(det_lam), 1e-300)
        worst = max(worst, abs(det_lam - prod) / denom)
    return worst
