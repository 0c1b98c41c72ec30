"""Schottky schemes: paired disks on the real line plus hyperbolic pairings.

A rank-m scheme holds 2m disks D_1..D_2m with pairwise disjoint closures and
m hyperbolic maps; map j sends the exterior of D_j onto the interior of
D_{j+m}.  Indices extend cyclically mod 2m with letter j+m the inverse of j.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import (ContractionError, InfeasibleParametersError,
                     NonIntegralError, ValidationError)
from .moebius import MoebiusMap, apply
from .words import necklaces, word_displacement, word_matrix

_MAPPING_TEST_ANGLES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
_MAPPING_TOL = 1e-9
_GAP_TOL = 1e-9  # closures must be separated by more than this times max radius


@dataclass(frozen=True)
class Disk:
    """Euclidean disk in C centered on the real axis."""

    center: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def boundary_point(self, angle: float) -> complex:
        return self.center + self.radius * complex(math.cos(angle), math.sin(angle))

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return abs(z - self.center) <= self.radius - margin

    def gap_to(self, other: "Disk") -> float:
        """Distance between the two closures (negative if they overlap)."""
        return abs(self.center - other.center) - self.radius - other.radius

    @property
    def interval(self) -> tuple[float, float]:
        """Trace of the disk on the real axis."""
        return (self.center - self.radius, self.center + self.radius)


def isometric_disk(g: MoebiusMap) -> Disk:
    """Isometric circle |cz+d| = 1 of g, as a disk (requires c != 0)."""
    if g.c == 0.0:
        raise ValueError("isometric circle undefined for c = 0")
    return Disk(-g.d / g.c, 1.0 / abs(g.c))


def moebius_disk_image(g: MoebiusMap, disk: Disk) -> Disk:
    """Exact image of a disk centered on R under a real Moebius map.

    Such an image is again a disk centered on R, determined by the images of
    the two real boundary points; the pole of g must lie outside the closure.
    """
    lo, hi = disk.interval
    pole_ok = True
    if g.c != 0.0:
        pole = -g.d / g.c
        pole_ok = not (lo <= pole <= hi)
    if not pole_ok:
        raise ValueError("pole inside disk; image is not a bounded disk")
    a = apply(g, complex(lo)).real
    b = apply(g, complex(hi)).real
    return Disk(0.5 * (a + b), 0.5 * abs(b - a))


@dataclass(frozen=True)
class SchottkyScheme:
    """2m ordered disks plus m generators (inverses derived)."""

    disks: tuple[Disk, ...]
    generators: tuple[MoebiusMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "disks", tuple(self.disks))
        object.__setattr__(self, "generators", tuple(self.generators))
        if len(self.disks) != 2 * len(self.generators):
            raise ValueError("need exactly 2m disks for m generators")
        if not self.generators:
            raise ValueError("need at least one generator")

    @property
    def m(self) -> int:
        return len(self.generators)

    @property
    def letters(self) -> range:
        return range(1, 2 * self.m + 1)

    def generator(self, letter: int) -> MoebiusMap:
        """Generator for a letter in 1..2m; letters above m are inverses."""
        m = self.m
        if not 1 <= letter <= 2 * m:
            raise ValueError(f"letter {letter} outside 1..{2 * m}")
        if letter <= m:
            return self.generators[letter - 1]
        return self.generators[letter - m - 1].inverse()

    def disk(self, letter: int) -> Disk:
        return self.disks[letter - 1]

    def admissible(self, branch: int, source: int) -> bool:
        """Branch letter i may be applied on D_j iff i != j+m mod 2m."""
        return (branch - source - self.m) % (2 * self.m) != 0

    def word_map(self, letters: Sequence[int]) -> MoebiusMap:
        gens = [self.generator(l) for l in self.letters]
        return word_matrix(letters, gens)

    def scheme_hash(self) -> str:
        payload = json.dumps(scheme_to_dict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_scheme; ``failure`` is the first violated condition."""

    ok: bool
    failure: str | None
    min_gap: float
    theta: float | None

    def require(self) -> None:
        if not self.ok:
            raise ValidationError(self.failure or "invalid scheme")


def branch_derivative_sup(scheme: SchottkyScheme, branch: int, source: int) -> float:
    """sup over the closed source disk of |(gamma_branch^-1)'|, exactly.

    For g = [[a,b],[c,d]] the inverse branch derivative is 1/(a - cz)^2 with
    pole at g(infinity) = a/c, which is inside D_{branch+m}, hence off the
    admissible source disks; the sup is attained nearest the pole.
    """
    g = scheme.generator(branch)
    if g.c == 0.0:
        return math.inf
    pole = g.a / g.c
    disk = scheme.disk(source)
    dist = abs(pole - disk.center) - disk.radius
    if dist <= 0:
        return math.inf
    return 1.0 / (g.c * g.c * dist * dist)


def contraction_bound(scheme: SchottkyScheme) -> float:
    """Uniform contraction factor of admissible inverse branches.

    theta = max over admissible (branch i, source j) of the exact sup of
    |(gamma_i^-1)'| on D_j; theta < 1 certifies disk-level contraction.
    """
    theta = 0.0
    for j in scheme.letters:
        for i in scheme.letters:
            if scheme.admissible(i, j):
                theta = max(theta, branch_derivative_sup(scheme, i, j))
    if not theta < 1.0:
        raise ContractionError(f"disk-level contraction failed: theta = {theta}")
    return theta


def validate_scheme(scheme: SchottkyScheme) -> ValidationReport:
    """Check disjoint closures and the exterior-to-interior mapping property.

    The circle-mapping test sends three boundary points of each D_j through
    gamma_j and requires them on the boundary of D_{j+m} within 1e-9 times
    its radius, plus one exterior probe strictly inside D_{j+m}.  The report
    carries the minimum closure gap and the contraction bound theta.
    """
    m = scheme.m
    min_gap = math.inf
    for p, q in itertools.combinations(scheme.letters, 2):
        min_gap = min(min_gap, scheme.disk(p).gap_to(scheme.disk(q)))

    def report(failure: str | None) -> ValidationReport:
        theta = None
        if failure is None:
            try:
                theta = contraction_bound(scheme)
            except ContractionError as exc:
                return ValidationReport(False, f"contraction: {exc}", min_gap, None)
        return ValidationReport(failure is None, failure, min_gap, theta)

    max_radius = max(d.radius for d in scheme.disks)
    if min_gap <= _GAP_TOL * max_radius:
        return report(f"disjointness: minimum closure gap {min_gap:.3e}")

    for j, g in enumerate(scheme.generators, start=1):
        if g.classify() != "hyperbolic":
            return report(f"hyperbolicity: generator {j} is {g.classify()}")

    for j in range(1, m + 1):
        g = scheme.generator(j)
        src, dst = scheme.disk(j), scheme.disk(j + m)
        for angle in _MAPPING_TEST_ANGLES:
            w = apply(g, src.boundary_point(angle))
            off = abs(abs(w - dst.center) - dst.radius)
            if not off <= _MAPPING_TOL * dst.radius:
                return report(
                    f"mapping: generator {j} sends boundary of D{j} off "
                    f"boundary of D{j + m} by {off:.3e}")
        probe = src.center + 2.5 * src.radius  # exterior of D_j by construction
        w = apply(g, complex(probe))
        if not (abs(w - dst.center) < dst.radius):
            return report(f"mapping: generator {j} sends exterior point outside D{j + m}")

    return report(None)


# ---------------------------------------------------------------------------
# Builders


def cylinder_scheme(ell: float) -> SchottkyScheme:
    """Rank-1 scheme of a hyperbolic cylinder of core length ell.

    The generator has fixed points -1 and +1 and trace 2cosh(ell/2); the two
    disks are its isometric circles, centered at -+coth(ell/2) with radius
    1/sinh(ell/2).
    """
    if not ell > 0:
        raise ValueError("ell must be positive")
    g = MoebiusMap.from_fixed_points(-1.0, 1.0, ell)
    scheme = SchottkyScheme(
        disks=(isometric_disk(g), isometric_disk(g.inverse())),
        generators=(g,),
    )
    validate_scheme(scheme).require()
    return scheme


def pants_scheme(ell1: float, ell2: float, separation: float) -> SchottkyScheme:
    """Rank-2 scheme: two hyperbolic generators with unit-half-width axes.

    Generator i has fixed points p_i -+ 1 where p_1 = -separation/2 and
    p_2 = +separation/2, displacement length ell_i, and the four disks are
    the isometric circles.  Raises when the closures are not disjoint.
    """
    if ell1 <= 0 or ell2 <= 0 or separation <= 0:
        raise InfeasibleParametersError("lengths and separation must be positive")
    p1, p2 = -separation / 2.0, separation / 2.0
    g1 = MoebiusMap.from_fixed_points(p1 - 1.0, p1 + 1.0, ell1)
    g2 = MoebiusMap.from_fixed_points(p2 - 1.0, p2 + 1.0, ell2)
    scheme = SchottkyScheme(
        disks=(isometric_disk(g1), isometric_disk(g2),
               isometric_disk(g1.inverse()), isometric_disk(g2.inverse())),
        generators=(g1, g2),
    )
    rep = validate_scheme(scheme)
    if not rep.ok:
        raise InfeasibleParametersError(rep.failure or "invalid pants parameters")
    return scheme


IntMatrix = tuple[tuple[int, int], tuple[int, int]]


def _int_candidates(c_max: int, entry_max: int):
    for c in range(1, c_max + 1):
        for a in range(-entry_max, entry_max + 1):
            for d in range(-entry_max, entry_max + 1):
                if abs(a + d) <= 2:
                    continue
                num = a * d - 1
                if num % c != 0:
                    continue
                b = num // c
                if abs(b) > 4 * entry_max:
                    continue
                yield ((a, b), (c, d))


def _sl2_generates(mats: Sequence[IntMatrix], q: int) -> bool:
    from .covers import sl2_image  # local import to avoid a cycle
    order = q ** 3
    for p in sorted(set(_prime_factors(q))):
        order = order // (p * p) * (p * p - 1)
    return len(sl2_image(mats, q)) == order


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def integral_scheme(gap: float = 0.05) -> tuple[SchottkyScheme, tuple[IntMatrix, ...]]:
    """Search a rank-2 scheme with integer SL2(Z) generators.

    Scans small-entry hyperbolic integer matrices, takes isometric circles
    as disks, and returns the first pair whose scheme validates and whose
    reduction mod q is all of SL2(Z/q) for q in {2, 3, 5}.  The integer
    matrices are returned alongside the floating-point scheme.
    """
    candidates = list(_int_candidates(c_max=6, entry_max=6))
    for m1 in candidates:
        g1 = MoebiusMap(m1[0][0], m1[0][1], m1[1][0], m1[1][1])
        d1, d1i = isometric_disk(g1), isometric_disk(g1.inverse())
        if d1.gap_to(d1i) <= gap:
            continue
        for m2 in candidates:
            g2 = MoebiusMap(m2[0][0], m2[0][1], m2[1][0], m2[1][1])
            d2, d2i = isometric_disk(g2), isometric_disk(g2.inverse())
            disks = (d1, d2, d1i, d2i)
            if any(x.gap_to(y) <= gap for x, y in itertools.combinations(disks, 2)):
                continue
            scheme = SchottkyScheme(disks=disks, generators=(g1, g2))
            if not validate_scheme(scheme).ok:
                continue
            if not all(_sl2_generates((m1, m2), q) for q in (2, 3, 5)):
                continue
            return scheme, (m1, m2)
    raise InfeasibleParametersError("no integral scheme found in the search box")


def integral_generators(scheme: SchottkyScheme) -> tuple[IntMatrix, ...]:
    """Exact integer generator matrices, or NonIntegralError."""
    out = []
    for g in scheme.generators:
        ints = tuple(round(x) for x in (g.a, g.b, g.c, g.d))
        if max(abs(x - y) for x, y in zip(ints, (g.a, g.b, g.c, g.d))) > 1e-9:
            raise NonIntegralError("generator entries are not integers")
        if ints[0] * ints[3] - ints[1] * ints[2] != 1:
            raise NonIntegralError("integer matrix does not have determinant 1")
        out.append(((ints[0], ints[1]), (ints[2], ints[3])))
    return tuple(out)


def subscheme(scheme: SchottkyScheme, keep: Sequence[int]) -> SchottkyScheme:
    """Scheme on a subset of generator indices (1-based, each <= m)."""
    keep = sorted(set(keep))
    if any(not 1 <= k <= scheme.m for k in keep):
        raise ValueError("generator indices outside 1..m")
    disks = tuple(scheme.disk(k) for k in keep) + \
        tuple(scheme.disk(k + scheme.m) for k in keep)
    return SchottkyScheme(disks=disks,
                          generators=tuple(scheme.generators[k - 1] for k in keep))


def conjugate_scheme(scheme: SchottkyScheme, h: MoebiusMap) -> SchottkyScheme:
    """Conjugate the whole scheme by h (disks mapped exactly)."""
    disks = tuple(moebius_disk_image(h, d) for d in scheme.disks)
    gens = tuple(h @ g @ h.inverse() for g in scheme.generators)
    return SchottkyScheme(disks=disks, generators=gens)


# ---------------------------------------------------------------------------
# Shortest geodesic


@dataclass(frozen=True)
class ShortestGeodesic:
    length: float
    word: tuple[int, ...]
    certified: bool


def shortest_geodesic(scheme: SchottkyScheme, max_len: int) -> ShortestGeodesic:
    """Minimal displacement length over cyclic words of length <= max_len.

    One representative per rotation class is examined.  The result is
    certified complete when max_len * log(1/theta) exceeds the minimum
    found, since every word of length N satisfies l(w) >= N log(1/theta).
    """
    validate_scheme(scheme).require()
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    gens = [scheme.generator(l) for l in scheme.letters]
    best, best_word = math.inf, ()
    for n in range(1, max_len + 1):
        for rep in necklaces(scheme.m, n):
            ell = word_displacement(rep, gens)
            if ell is not None and ell < best:
                best, best_word = ell, rep
    theta = contraction_bound(scheme)
    certified = max_len * math.log(1.0 / theta) > best
    return ShortestGeodesic(best, best_word, certified)


# ---------------------------------------------------------------------------
# Serialization

def scheme_to_dict(scheme: SchottkyScheme) -> dict:
    return {
        "m": scheme.m,
        "disks": [{"center": d.center, "radius": d.radius} for d in scheme.disks],
        "generators": [[[g.a, g.b], [g.c, g.d]] for g in scheme.generators],
    }


def scheme_from_dict(data: dict) -> SchottkyScheme:
    m = int(data["m"])
    disks = tuple(Disk(float(d["center"]), float(d["radius"])) for d in data["disks"])
    gens = tuple(MoebiusMap(float(g[0][0]), float(g[0][1]),
                            float(g[1][0]), float(g[1][1]))
                 for g in data["generators"])
    if len(disks) != 2 * m or len(gens) != m:
        raise ValidationError("scheme file has inconsistent counts")
    return SchottkyScheme(disks=disks, generators=gens)


def save_scheme(scheme: SchottkyScheme, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(scheme_to_dict(scheme), fh, indent=2)


def load_scheme(path: str) -> SchottkyScheme:
    with open(path) as fh:
        return scheme_from_dict(json.load(fh))
