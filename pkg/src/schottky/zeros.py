"""Locating and counting determinant zeros in rectangles.

Windings are computed by tracking the boundary phase of det(I - L_s) in log
form (safe for the huge determinant magnitudes far from the critical strip),
with adaptive step halving until every increment is below pi/2.  Zeros are
polished by Newton iteration on the eigenvalue of L_s nearest 1, using the
exact s-derivative of the matrix; this reaches ~1e-12 positions even at
multiplicity-2 zeros, where root-finding on the determinant itself would
stall at the square root of the evaluation noise.
"""

from __future__ import annotations

import cmath
import functools
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .covers import CosetAction, UnitaryRep, induced_permutation_rep
from .errors import (BoundaryZeroError, NonConvergenceError,
                     PhaseTrackingError)
from .refine import DiskCover, level0_cover, refine
from .scheme import SchottkyScheme
from .transfer import TransferAssembler

_BOUNDARY_ABS_TOL = 1e-6     # |det| below this on a contour sample forces a nudge
_NUDGE_FACTOR = 1e-4
_MAX_NUDGES = 3
_WINDING_INT_TOL = 0.05
_POLISH_RESIDUAL = 1e-8
_CLUSTER_EIG_TOL = 1e-7      # second eigenvalue this close to 1 means a double zero
_SPLIT_FRACTIONS = (0.5, 0.5437, 0.4563, 0.5871, 0.4129)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the s-plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("rectangle must have positive width and height")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max),
                       0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def expanded(self, amount: float) -> "Rect":
        return Rect(self.re_min - amount, self.re_max + amount,
                    self.im_min - amount, self.im_max + amount)

    def corners(self) -> list[complex]:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def split(self, fraction: float = 0.5) -> tuple["Rect", "Rect"]:
        """Split across the longer side at the given fraction."""
        if self.width >= self.height:
            x = self.re_min + fraction * self.width
            return (Rect(self.re_min, x, self.im_min, self.im_max),
                    Rect(x, self.re_max, self.im_min, self.im_max))
        y = self.im_min + fraction * self.height
        return (Rect(self.re_min, self.re_max, self.im_min, y),
                Rect(self.re_min, self.re_max, y, self.im_max))


@dataclass(frozen=True)
class ResonanceReport:
    """Zeros of det(I - L_s) in a rectangle, with multiplicities.

    Zeros are labelled ``zeta_zero``: the resonance set is contained in the
    zero set of the determinant, and no identification of multiplicities
    with resolvent ranks is claimed.
    """

    zeros: tuple[tuple[complex, int], ...]
    rect: Rect
    winding: int
    diagnostics: dict = field(default_factory=dict)
    unresolved: tuple[tuple[Rect, int], ...] = ()
    label: str = "zeta_zero"

    @property
    def total_multiplicity(self) -> int:
        return sum(mult for _, mult in self.zeros)


def _resolve_rep(scheme: SchottkyScheme, cover: CosetAction | None,
                 rep: UnitaryRep | None) -> UnitaryRep | None:
    if rep is not None:
        return rep
    if cover is not None:
        return induced_permutation_rep(cover)
    return None


@functools.lru_cache(maxsize=32)
def _delta_of(scheme: SchottkyScheme) -> float:
    from .thermo import hausdorff_dimension
    return hausdorff_dimension(scheme).delta


class _DetEngine:
    """Cached evaluations of det(I - L_s) in log form plus its s-derivative.

    One LU factorisation per point serves both the log-determinant and the
    trace solve for d/ds log det = -tr((I-T)^-1 dT).
    """

    def __init__(self, assembler: TransferAssembler):
        self.asm = assembler
        self.cache: dict[complex, tuple[float, float, complex]] = {}
        self.evals = 0

    def eval(self, s: complex) -> tuple[float, float, complex]:
        """(phase of det, log|det|, d/ds log det)."""
        got = self.cache.get(s)
        if got is None:
            T, dT = self.asm.matrix_and_derivative(s)
            A = np.eye(T.shape[0], dtype=complex) - T
            with warnings.catch_warnings():
                # an exactly singular factorisation is a legitimate outcome
                # (evaluation at a zero); the -inf log determinant covers it
                warnings.simplefilter("ignore", LinAlgWarning)
                lu, piv = lu_factor(A, check_finite=False)
            diag = np.diagonal(lu)
            swaps = int(np.sum(piv != np.arange(len(piv)))) % 2
            with np.errstate(divide="ignore"):
                logabs = float(np.sum(np.log(np.abs(diag))))
            phase = float(np.sum(np.angle(diag))) + math.pi * swaps
            phase = _wrap(phase)
            if math.isfinite(logabs):
                dlog = -complex(np.trace(lu_solve((lu, piv), dT,
                                                  check_finite=False)))
            else:
                dlog = complex(math.inf, 0.0)
            got = (phase, logabs, dlog)
            self.cache[s] = got
            self.evals += 1
        return got

    def phase_logabs(self, s: complex) -> tuple[float, float]:
        phase, logabs, _ = self.eval(s)
        return phase, logabs

    def det(self, s: complex) -> complex:
        phase, logabs = self.phase_logabs(s)
        return cmath.exp(complex(logabs, phase)) if logabs < 700 else \
            cmath.exp(complex(700.0, phase))


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


_SLOPE_JUMP_TOL = 1.8  # h * |jump of directional Re d(log det)| flagging a zero
_EDGE_SAMPLE_CAP = 40_000


def _edge_phase(engine: _DetEngine, s0: complex, s1: complex,
                initial_step: float, scale: float) -> float:
    """Accumulated phase of the determinant along the segment s0 -> s1.

    Steps are halved until every wrapped phase increment is below pi/2 and,
    per segment, the jump of the directional modulus slope Re(u d log det)
    times the step stays small.  The slope-jump rule is what catches
    even-order zeros lying close to the path: those swing the phase by a
    multiple of 2pi between coarse samples (invisible after wrapping) but
    flip the modulus slope from -k/h to +k/h across the passage, while a
    smooth background contributes only O(h^2).
    """
    length = abs(s1 - s0)
    direction = (s1 - s0) / length
    min_len = 1e-12 * max(length, scale)

    def sample(s: complex):
        phase, logabs, dlog = engine.eval(s)
        if logabs < math.log(_BOUNDARY_ABS_TOL):
            raise BoundaryZeroError(
                f"|det| < {_BOUNDARY_ABS_TOL} on the contour near {s}")
        d = dlog * direction
        return phase, d.real, abs(d.imag)

    n = max(2, int(math.ceil(length / initial_step)) + 1)
    nodes = [s0 + (s1 - s0) * k / (n - 1) for k in range(n)]
    total = 0.0
    budget = [_EDGE_SAMPLE_CAP]

    def walk(a: complex, fa, b: complex, fb) -> float:
        h = abs(b - a)
        # three refinement triggers: a wrapped phase step that may alias, a
        # modulus-slope jump (even-order zero beside the path), and a phase
        # velocity too fast for the step (far-field spin at rate ~ |Re s|).
        # A full 2pi wrap needs a true step above 3pi/2, so the velocity
        # bound 2.6 < 3pi/2 rules it out with margin.
        ok = abs(_wrap(fb[0] - fa[0])) < 0.5 * math.pi and \
            abs(fb[1] - fa[1]) * h < _SLOPE_JUMP_TOL and \
            max(fa[2], fb[2]) * h < 2.6
        if ok:
            return _wrap(fb[0] - fa[0])
        if h < min_len:
            raise BoundaryZeroError(f"refinement exhausted near {a}")
        budget[0] -= 1
        if budget[0] <= 0:
            raise PhaseTrackingError("edge sampling cap exceeded")
        mid = 0.5 * (a + b)
        fm = sample(mid)
        return walk(a, fa, mid, fm) + walk(mid, fm, b, fb)

    vals = [sample(z) for z in nodes]
    for (a, fa), (b, fb) in zip(zip(nodes[:-1], vals[:-1]), zip(nodes[1:], vals[1:])):
        total += walk(a, fa, b, fb)
    return total


def _winding(engine: _DetEngine, rect: Rect, initial_step: float) -> int:
    corners = rect.corners()
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        total += _edge_phase(engine, a, b, initial_step, rect.diameter)
    w = total / (2.0 * math.pi)
    if abs(w - round(w)) > _WINDING_INT_TOL:
        raise PhaseTrackingError(f"winding sum {w} is not near an integer")
    return int(round(w))


def _winding_nudged(engine: _DetEngine, rect: Rect,
                    initial_step: float) -> tuple[int, Rect]:
    """Winding with up to three outward nudges when zeros sit on the contour."""
    current = rect
    for attempt in range(_MAX_NUDGES + 1):
        try:
            return _winding(engine, current, initial_step), current
        except BoundaryZeroError:
            if attempt == _MAX_NUDGES:
                raise
            current = current.expanded(_NUDGE_FACTOR * rect.diameter)
    raise AssertionError("unreachable")


def winding_count(rect: Rect, scheme: SchottkyScheme,
                  cover: CosetAction | None = None, rep: UnitaryRep | None = None,
                  Q: int = 40, level: int = 0, initial_step: float = 0.2) -> int:
    """Number of determinant zeros (with multiplicity) inside the rectangle.

    The boundary may be nudged outward up to three times by 1e-4 of the
    diameter when the determinant vanishes on it.
    """
    asm = TransferAssembler(scheme, _cover_for(scheme, level), _resolve_rep(scheme, cover, rep), Q)
    engine = _DetEngine(asm)
    w, _ = _winding_nudged(engine, rect, initial_step)
    return w


def _cover_for(scheme: SchottkyScheme, level: int) -> DiskCover:
    return level0_cover(scheme) if level == 0 else refine(scheme, level)


# ---------------------------------------------------------------------------
# Polishing


def _polish_zero(asm: TransferAssembler, s0: complex,
                 max_iter: int = 50) -> tuple[complex, int]:
    """Newton on the eigenvalue of L_s nearest 1; returns (zero, #branches at 1).

    The eigenvalue derivative is the diagonal element of V^-1 (dL/ds) V, so
    each crossing branch is a simple root in s even when several branches
    cross at the same point (a genuine multiplicity-2 determinant zero).
    """
    s = complex(s0)
    converged = False
    for _ in range(max_iter):
        T, dT = asm.matrix_and_derivative(s)
        lam, V = np.linalg.eig(T)
        idx = int(np.argmin(np.abs(lam - 1.0)))
        mu = lam[idx]
        if abs(mu - 1.0) < 1e-12:
            converged = True
            break
        try:
            left = np.linalg.inv(V)
        except np.linalg.LinAlgError as exc:
            raise NonConvergenceError("defective eigenbasis while polishing") from exc
        dmu = left[idx] @ dT @ V[:, idx]
        if dmu == 0:
            raise NonConvergenceError("stationary eigenvalue while polishing")
        step = (mu - 1.0) / dmu
        s = s - step
        if abs(step) < 1e-12 * max(1.0, abs(s)):
            converged = True
            break
    if not converged:
        raise NonConvergenceError(f"eigenvalue Newton did not converge from {s0}")
    lam = np.linalg.eigvals(asm.matrix(s))
    n_at_one = int(np.sum(np.abs(lam - 1.0) < _CLUSTER_EIG_TOL))
    return s, max(n_at_one, 1)


def _split_consistent(engine: _DetEngine, rect: Rect, w: int,
                      initial_step: float) -> list[tuple[Rect, int]]:
    for frac in _SPLIT_FRACTIONS:
        r1, r2 = rect.split(frac)
        try:
            w1 = _winding(engine, r1, initial_step)
            w2 = _winding(engine, r2, initial_step)
        except (BoundaryZeroError, PhaseTrackingError):
            continue
        if w1 + w2 == w:
            return [(r1, w1), (r2, w2)]
    raise PhaseTrackingError(f"no consistent split of {rect} (winding {w})")


def locate_zeros(rect: Rect, scheme: SchottkyScheme,
                 cover: CosetAction | None = None, rep: UnitaryRep | None = None,
                 tol: float = 1e-9, Q: int = 40, level: int = 0,
                 cell_cap: int = 2, initial_step: float = 0.2,
                 exclude_topological: bool = False,
                 _engine: _DetEngine | None = None) -> ResonanceReport:
    """Locate determinant zeros in a rectangle by bisection plus polishing.

    Cells are subdivided until they hold at most ``cell_cap`` zeros, then
    polished; a cell whose two zeros do not separate above the resolution
    is reported as one multiplicity-2 zero.  Cells still holding more than
    ``cell_cap`` zeros at diameter < tol are returned as unresolved.
    With ``exclude_topological`` zeros within 1e-8 of {0, -1/2, -1, ...}
    are dropped (their order can exceed the resonance multiplicity).
    """
    if _engine is None:
        asm = TransferAssembler(scheme, _cover_for(scheme, level),
                                _resolve_rep(scheme, cover, rep), Q)
        engine = _DetEngine(asm)
    else:
        engine = _engine
    total, outer = _winding_nudged(engine, rect, initial_step)
    found: list[tuple[complex, int]] = []
    unresolved: list[tuple[Rect, int]] = []
    coarse = max(0.3, 8.0 * tol)
    queue: list[tuple[Rect, int]] = [(outer, total)]
    while queue:
        cell, w = queue.pop()
        if w == 0:
            continue
        if w <= cell_cap and cell.diameter <= coarse:
            z, n_at_one = _try_polish(engine.asm, cell, w)
            if z is not None:
                if w == 1 or n_at_one >= w or cell.diameter < tol:
                    found.append((z, w))
                    continue
            elif cell.diameter < tol:
                unresolved.append((cell, w))
                continue
        elif w > cell_cap and cell.diameter < tol:
            unresolved.append((cell, w))
            continue
        queue.extend(_split_consistent(engine, cell, w, initial_step))

    found = _dedupe(found)
    if exclude_topological:
        found = [(z, k) for z, k in found
                 if not (abs(z.imag) < 1e-8 and abs(z.real * 2 - round(z.real * 2)) < 2e-8
                         and z.real < 1e-8)]
    found.sort(key=lambda zk: (zk[0].real, zk[0].imag))
    residual = max((abs(engine.det(z)) for z, _ in found), default=0.0)
    diagnostics = {
        "Q": engine.asm.Q,
        "level": engine.asm.cover.level,
        "rect_nudged": outer != rect,
        "det_evals": engine.evals,
        "max_polished_residual": residual,
    }
    return ResonanceReport(tuple(found), rect, total, diagnostics, tuple(unresolved))


def _try_polish(asm: TransferAssembler, cell: Rect, w: int):
    try:
        z, n_at_one = _polish_zero(asm, cell.center)
    except NonConvergenceError:
        return None, 0
    if not cell.contains(z, pad=0.05 * cell.diameter):
        return None, 0
    return z, n_at_one


def _dedupe(zeros: list[tuple[complex, int]]) -> list[tuple[complex, int]]:
    """Merge coincident polished zeros (ties resolved toward the earlier point)."""
    out: list[tuple[complex, int]] = []
    for z, k in sorted(zeros, key=lambda zk: (zk[0].real, zk[0].imag)):
        if out and abs(out[-1][0] - z) < 1e-8:
            out[-1] = (out[-1][0], out[-1][1] + k)
        else:
            out.append((z, k))
    return out


# ---------------------------------------------------------------------------
# Counting functions


def count_M(scheme: SchottkyScheme, cover: CosetAction | None, sigma: float,
            T: float, delta: float | None = None, Q: int = 40,
            level: int | None = None, margin: float = 0.1,
            rep: UnitaryRep | None = None) -> int:
    """Zeros with Re s >= sigma and |Im s - T| <= 1, with multiplicity.

    The box is [sigma, delta + margin] x [T-1, T+1]; the half plane right of
    delta is zero-free, so the count is 0 whenever sigma > delta.  The limit
    set dimension is computed (and cached per scheme) when not supplied.
    """
    if delta is None:
        delta = _delta_of(scheme)
    hi = delta + margin
    if sigma >= hi:
        return 0
    if level is None:
        level = 1 if abs(T) + 1 > 30 else 0
    rect = Rect(sigma, hi, T - 1.0, T + 1.0)
    return winding_count(rect, scheme, cover, rep, Q=Q, level=level)


def count_N(scheme: SchottkyScheme, cover: CosetAction | None, r: float,
            Q: int = 24, level: int | None = None, tile: float = 2.0,
            band: float = 0.37, rep: UnitaryRep | None = None,
            initial_step: float = 0.2) -> int:
    """Zeros with |s| <= r, with multiplicity, by tiling the disk.

    The induced representations used here have real matrices, so the zero
    set is symmetric under conjugation: the upper half plane above a small
    band is tiled and counted twice, the band around the real axis once.
    Tiles fully inside the disk contribute their winding; tiles crossing the
    circle are resolved by locating zeros and filtering on |s| <= r.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if level is None:
        level = 1 if r > 30 else 0
    the_rep = _resolve_rep(scheme, cover, rep)
    if the_rep is not None and np.max([np.abs(u.imag).max() for u in the_rep.images]) > 0:
        raise ValueError("count_N requires a real representation (cover action)")
    for attempt in range(5):
        offset = 0.0137 * (attempt + 1)
        asm = TransferAssembler(scheme, _cover_for(scheme, level), the_rep, Q)
        engine = _DetEngine(asm)
        try:
            return _count_disk(engine, r, tile, band + 0.077 * attempt,
                               offset, initial_step)
        except (BoundaryZeroError, PhaseTrackingError):
            if attempt == 4:
                raise
    raise AssertionError("unreachable")


def _count_disk(engine: _DetEngine, r: float, tile: float, band: float,
                offset: float, initial_step: float) -> int:
    # columns twice as wide as rows: the determinant phase spins fastest
    # along the imaginary direction, so vertical edge length is what counts
    width = 2.0 * tile
    x0 = -r - offset
    n_cols = int(math.ceil((r - x0) / width)) + 1
    x_edges = [x0 + i * width for i in range(n_cols + 1)]

    def tiles_in_row(y0: float, y1: float):
        for i in range(n_cols):
            yield Rect(x_edges[i], x_edges[i + 1], y0, y1)

    def nearest_dist(rect: Rect) -> float:
        x = min(max(0.0, rect.re_min), rect.re_max)
        y = min(max(0.0, rect.im_min), rect.im_max)
        return math.hypot(x, y)

    def farthest_dist(rect: Rect) -> float:
        return max(abs(complex(x, y))
                   for x in (rect.re_min, rect.re_max)
                   for y in (rect.im_min, rect.im_max))

    def count_tile(rect: Rect) -> int:
        if nearest_dist(rect) > r:
            return 0
        if farthest_dist(rect) <= r:
            return _winding(engine, rect, initial_step)
        if rect.diameter > 0.7:
            # recurse toward the circle: only zeros near |s| = r need to be
            # located, everything else is settled by plain windings
            a, b = rect.split(0.5)
            return count_tile(a) + count_tile(b)
        report = locate_zeros(rect, engine.asm.scheme, _engine=engine,
                              tol=1e-7, initial_step=initial_step)
        # half-open tile membership keeps the tiling a partition even if the
        # located rectangle was nudged outward
        return sum(k for z, k in report.zeros
                   if abs(z) <= r * (1.0 + 1e-9)
                   and rect.re_min <= z.real < rect.re_max
                   and rect.im_min <= z.imag < rect.im_max)

    tiles = list(tiles_in_row(-band, band))
    upper_tiles = []
    y = band
    while y < r:
        y1 = min(y + tile, r + offset + tile)
        upper_tiles.extend(tiles_in_row(y, y1))
        y = y1
    workers = max(1, int(os.environ.get("SCHOTTKY_THREADS", "2")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            band_counts = list(pool.map(count_tile, tiles))
            upper_counts = list(pool.map(count_tile, upper_tiles))
        return sum(band_counts) + 2 * sum(upper_counts)
    return sum(map(count_tile, tiles)) + 2 * sum(map(count_tile, upper_tiles))
