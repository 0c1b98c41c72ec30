"""Real Moebius transformations and their action on the extended plane.

A transformation is stored as a 2x2 real matrix whose determinant is
renormalised to 1 on construction; a matrix and its negative describe the
same map, so equality is always understood up to a global sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotHyperbolicError, PoleError

#: Point at infinity of the extended complex plane.
INFINITY = complex(math.inf, 0.0)

_DET_TOL = 1e-10
_TRACE_TOL = 1e-9  # |tr| within this of 2 counts as parabolic


def is_infinity(z: complex) -> bool:
    """True for the point at infinity (any non-finite complex value)."""
    z = complex(z)
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


@dataclass(frozen=True)
class MoebiusMap:
    """Unit-determinant real 2x2 matrix acting by z -> (az+b)/(cz+d)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0.0:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        if abs(det - 1.0) > _DET_TOL:
            s = 1.0 / math.sqrt(det)
            for name in ("a", "b", "c", "d"):
                object.__setattr__(self, name, getattr(self, name) * s)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_fixed_points(cls, repelling: float, attracting: float,
                          length: float) -> "MoebiusMap":
        """Hyperbolic map with the given real fixed points and displacement length.

        The multiplier toward ``attracting`` is e^-length; both fixed points
        must be distinct reals.
        """
        x1, x2 = float(repelling), float(attracting)
        if x1 == x2:
            raise ValueError("fixed points must be distinct")
        if length <= 0:
            raise ValueError("length must be positive")
        lam = math.exp(length / 2.0)
        w2 = x2 - x1
        a = (x2 * lam - x1 / lam) / w2
        b = x1 * x2 * (1.0 / lam - lam) / w2
        c = (lam - 1.0 / lam) / w2
        d = (x2 / lam - x1 * lam) / w2
        return cls(a, b, c, d)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def classify(self) -> str:
        """'hyperbolic', 'parabolic' or 'elliptic', by |tr| against 2.

        |tr| within 1e-9 of 2 is classified parabolic (the identity included).
        """
        t = abs(self.trace)
        if abs(t - 2.0) <= _TRACE_TOL:
            return "parabolic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def is_hyperbolic(self) -> bool:
        return self.classify() == "hyperbolic"

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, z: complex) -> complex:
        return apply(self, z)

    def approx_eq(self, other: "MoebiusMap", tol: float = 1e-9) -> bool:
        """Entrywise closeness up to the global sign ambiguity."""
        dp = max(abs(self.a - other.a), abs(self.b - other.b),
                 abs(self.c - other.c), abs(self.d - other.d))
        dm = max(abs(self.a + other.a), abs(self.b + other.b),
                 abs(self.c + other.c), abs(self.d + other.d))
        return min(dp, dm) <= tol

    def fixed_points(self) -> tuple[float, float]:
        """(attracting, repelling) boundary fixed points of a hyperbolic map."""
        if not self.is_hyperbolic():
            raise NotHyperbolicError(f"|tr| = {abs(self.trace)} <= 2")
        if self.c == 0.0:
            # One fixed point is infinity; the finite one is b/(d-a).
            finite = self.b / (self.d - self.a)
            if abs(self.a) > abs(self.d):  # derivative (a/d)^... at infinity attracting
                return math.inf, finite
            return finite, math.inf
        disc = math.sqrt(self.trace * self.trace - 4.0)
        x1 = (self.a - self.d + disc) / (2.0 * self.c)
        x2 = (self.a - self.d - disc) / (2.0 * self.c)
        # attracting <=> |derivative| < 1 there
        if abs(derivative(self, x1)) < 1.0:
            return x1, x2
        return x2, x1


def apply(g: MoebiusMap, z: complex) -> complex:
    """Action of g on the extended complex plane.

    Conventions: infinity maps to infinity when c = 0 and to a/c otherwise;
    a finite pole cz + d = 0 maps to infinity.
    """
    if is_infinity(z):
        if g.c == 0.0:
            return INFINITY
        return complex(g.a / g.c)
    z = complex(z)
    w = g.c * z + g.d
    if w == 0:
        return INFINITY
    return (g.a * z + g.b) / w


def derivative(g: MoebiusMap, z: complex) -> complex:
    """g'(z) = 1/(cz+d)^2 for finite z away from the pole."""
    z = complex(z)
    w = g.c * z + g.d
    if w == 0:
        raise PoleError(f"derivative pole at z = {z}")
    return 1.0 / (w * w)


def displacement_length(g: MoebiusMap) -> float:
    """Translation length 2*arccosh(|tr|/2) of a hyperbolic map.

    Equals the log of the squared modulus of the dominant eigenvalue, is
    invariant under conjugation and additive along powers.
    """
    t = abs(g.trace)
    if g.classify() != "hyperbolic":
        raise NotHyperbolicError(f"|tr| = {t} <= 2, not hyperbolic")
    return 2.0 * math.acosh(t / 2.0)


def conjugate(g: MoebiusMap, h: MoebiusMap) -> MoebiusMap:
    """h g h^-1."""
    return h @ g @ h.inverse()
