"""Topological pressure, Hausdorff dimension and separation diagnostics.

The pressure at real sigma is the log of the leading eigenvalue of the
transfer matrix with trivial twist; it is strictly decreasing and strictly
convex, and its unique zero is the dimension delta of the limit set.  The
dimension is cross-validated against the largest real zero of the Fredholm
determinant and against truncation-order doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NonConvergenceError
from .refine import DiskCover, refine
from .scheme import SchottkyScheme, validate_scheme
from .transfer import TransferAssembler
from .words import enumerate_words, word_product

DEFAULT_DIM_Q = 24
_AGREE_TOL = 1e-8


def pressure(scheme: SchottkyScheme, sigma: float, Q: int = DEFAULT_DIM_Q) -> float:
    """log of the spectral radius of the transfer matrix at real sigma."""
    asm = TransferAssembler(scheme, Q=Q)
    return _pressure_from(asm, sigma)


def _pressure_from(asm: TransferAssembler, sigma: float) -> float:
    try:
        eigs = np.linalg.eigvals(asm.matrix(complex(sigma)))
    except np.linalg.LinAlgError as exc:
        raise NonConvergenceError(f"eigenvalue solve failed at sigma={sigma}") from exc
    radius = float(np.max(np.abs(eigs)))
    if radius <= 0:
        raise NonConvergenceError(f"spectral radius vanished at sigma={sigma}")
    return math.log(radius)


def pressure_grid(scheme: SchottkyScheme, sigmas: Sequence[float],
                  Q: int = DEFAULT_DIM_Q) -> list[tuple[float, float]]:
    asm = TransferAssembler(scheme, Q=Q)
    return [(float(s), _pressure_from(asm, s)) for s in sigmas]


def pressure_weight_estimate(scheme: SchottkyScheme, sigma: float,
                             level: int) -> float:
    """Pressure from the transition weight matrix of a refined cover.

    Entry (target, source) holds sup over the source interval of the branch
    derivative to the power sigma; the log spectral radius converges to the
    pressure geometrically as the cover disks shrink.
    """
    cover = refine(scheme, level)
    n = len(cover)
    weights = np.zeros((n, n))
    for p in range(n):
        lo, hi = cover.disks[p].interval
        xs = np.linspace(lo, hi, 9)
        for i in cover.admissible_branches(p):
            q = cover.branch_target(p, i)
            g = scheme.generator(i)
            dv = 1.0 / np.abs(g.a - g.c * xs) ** 2  # |(gamma_i^-1)'| on the trace
            weights[q, p] = float(np.max(dv)) ** sigma
    radius = float(np.max(np.abs(np.linalg.eigvals(weights))))
    return math.log(radius)


@dataclass(frozen=True)
class DimensionReport:
    """Limit-set dimension with its cross-checks and pressure samples."""

    delta: float
    pressure_samples: tuple[tuple[float, float], ...]
    delta_determinant: float | None
    delta_doubled_Q: float | None
    Q: int
    agreement: bool
    note: str = ""


def _det_real(asm: TransferAssembler, sigma: float) -> float:
    n = asm.size
    mat = np.eye(n, dtype=complex) - asm.matrix(complex(sigma))
    return float(np.linalg.det(mat).real)


def _pressure_root(asm: TransferAssembler) -> float | None:
    lo, hi = 0.0, 1.0 - 1e-6
    p_lo = _pressure_from(asm, lo)
    if abs(p_lo) < 1e-12:
        return 0.0
    if p_lo < 0:
        return None  # pressure already negative at 0: elementary-like
    p_hi = _pressure_from(asm, hi)
    if p_hi > 0:
        raise NonConvergenceError("pressure still positive at sigma = 1")
    return float(brentq(lambda x: _pressure_from(asm, x), lo, hi, xtol=1e-13))


def _det_root_near(asm: TransferAssembler, guess: float) -> float | None:
    """Largest real zero of det(I - L_sigma), bracketed around the guess."""
    hi = guess + 0.05
    while _det_real(asm, hi) <= 0:
        hi += 0.05
        if hi > 1.5:
            return None
    lo = guess - 0.05
    while lo > guess - 0.6 and _det_real(asm, lo) >= 0:
        lo -= 0.05
    if _det_real(asm, lo) >= 0:
        return None
    return float(brentq(lambda x: _det_real(asm, x), lo, hi, xtol=1e-13))


def hausdorff_dimension(scheme: SchottkyScheme, Q: int = DEFAULT_DIM_Q) -> DimensionReport:
    """Limit-set dimension as the pressure root, cross-validated two ways.

    The two locators (pressure root, largest real determinant zero) must
    agree to 1e-8 and the value must be stable under doubling Q; any
    disagreement is reported, never averaged away.  Rank-1 schemes have a
    two-point limit set and return delta = 0 exactly.
    """
    validate_scheme(scheme).require()
    asm = TransferAssembler(scheme, Q=Q)
    grid = np.linspace(0.0, 0.95, 11)
    samples = tuple((float(x), _pressure_from(asm, x)) for x in grid)

    if scheme.m == 1:
        return DimensionReport(0.0, samples, 0.0, 0.0, Q, True,
                               note="rank-1 scheme: two-point limit set")

    delta_p = _pressure_root(asm)
    if delta_p is None:
        return DimensionReport(0.0, samples, None, None, Q, False,
                               note="no pressure sign change in [0, 1)")
    delta_det = _det_root_near(asm, delta_p)
    asm2 = TransferAssembler(scheme, Q=2 * Q)
    delta_2q = _pressure_root(asm2)
    agreement = (
        delta_det is not None and delta_2q is not None
        and abs(delta_det - delta_p) < _AGREE_TOL
        and abs(delta_2q - delta_p) < _AGREE_TOL)
    note = "" if agreement else "locators disagree beyond 1e-8"
    return DimensionReport(delta_p, samples, delta_det, delta_2q, Q, agreement, note)


# ---------------------------------------------------------------------------
# Branch separation diagnostics


def branch_separation(scheme: SchottkyScheme, n: int, samples: int = 7) -> float:
    """Minimal distance between images of one point under distinct branches.

    Samples points on the real trace of each disk and minimises
    |gamma_a^-1 z - gamma_b^-1 z| over distinct admissible words a, b of
    length n.  Rank-1 schemes have a single branch per disk and return inf.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gens = [scheme.generator(l) for l in scheme.letters]
    best = math.inf
    for j in scheme.letters:
        words = enumerate_words(scheme.m, n, first_constraint=j)
        if len(words) < 2:
            continue
        # inverse of (a b; c d) is (d -b; -c a); raw products avoid the
        # unit-determinant renormalisation, which is unstable for long words
        mats = np.array([word_product(w.letters, gens) for w in words])
        lo, hi = scheme.disk(j).interval
        span = hi - lo
        xs = np.linspace(lo + 0.05 * span, hi - 0.05 * span, samples)
        a = mats[:, 3][:, None]
        b = -mats[:, 1][:, None]
        c = -mats[:, 2][:, None]
        d = mats[:, 0][:, None]
        images = (a * xs[None, :] + b) / (c * xs[None, :] + d)
        for col in range(images.shape[1]):
            pts = np.sort(images[:, col])
            gaps = np.diff(pts)
            if gaps.size:
                best = min(best, float(np.min(gaps)))
    return best


@dataclass(frozen=True)
class SeparationFit:
    """Fit of c * rho^n below measured branch-separation minima."""

    minima: tuple[tuple[int, float], ...]
    c: float
    rho: float


def separation_fit(scheme: SchottkyScheme, lengths: Sequence[int],
                   samples: int = 7) -> SeparationFit:
    """Fit log(min distance) ~ log c + n log rho, with c shrunk so the
    geometric law lower-bounds every measurement."""
    minima = [(int(n), branch_separation(scheme, n, samples)) for n in lengths]
    finite = [(n, v) for n, v in minima if math.isfinite(v)]
    if len(finite) < 2:
        return SeparationFit(tuple(minima), math.nan, math.nan)
    ns = np.array([n for n, _ in finite], dtype=float)
    logs = np.log([v for _, v in finite])
    slope, intercept = np.polyfit(ns, logs, 1)
    rho = float(np.exp(slope))
    c = float(np.exp(intercept))
    c = min(c, min(v / rho ** n for n, v in finite))
    return SeparationFit(tuple(minima), c, rho)


def refined_cover(scheme: SchottkyScheme, level: int) -> DiskCover:
    """Convenience re-export of the level-n nested cover."""
    return refine(scheme, level)
