"""Finite Bergman-basis truncations of twisted transfer operators.

On each cover disk E_p (center c_p, radius r_p) the Hilbert-space basis is
kappa_{p,q}(z) = sqrt((q+1)/(pi r_p^2)) ((z-c_p)/r_p)^q, q = 0..Q.  The
operator sends f restricted to a source disk through every admissible
inverse branch; matrix entries are Taylor coefficients of the weighted
branch compositions, extracted by trapezoid contour quadrature on the
target disk's boundary circle.  Sampling on the full circle keeps the
order-q coefficient free of the 2^q roundoff amplification that a
half-radius contour would introduce.

For a function F holomorphic on the target disk with Taylor coefficients
a_q at its center, the coefficient against kappa_q is
a_q r^q sqrt(pi r^2/(q+1)); this normalisation is unit-tested against a
direct two-dimensional quadrature of the Bergman inner product.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .covers import CosetAction, UnitaryRep, character, trivial_rep
from .errors import (BudgetExceededError, NonConvergenceError, PoleError,
                     PrecisionLossWarning, DivergenceWarning)
from .moebius import MoebiusMap
from .refine import DiskCover, level0_cover
from .scheme import SchottkyScheme
from .words import necklaces, word_displacement

DEFAULT_Q = 40
_QUAD_TOL = 1e-12
_ADAPTIVE_TOL = 1e-10
_CONDITION_DIGITS = 13  # warn when the condition estimate eats this many digits


@dataclass(frozen=True)
class TransferMatrix:
    """Dense truncation of the transfer operator at one parameter value."""

    s: complex
    entries: np.ndarray
    Q: int
    level: int
    n_disks: int
    dim_rep: int
    scheme_hash: str
    cover_degree: int

    @property
    def size(self) -> int:
        return self.entries.shape[0]


class TransferAssembler:
    """Precomputes all s-independent branch data for fast re-assembly.

    One instance serves a whole grid or contour scan: ``matrix(s)`` costs one
    complex exponential per contour sample plus FFTs, and ``logdet(s)``
    evaluates det(I - L_s) in log form to avoid overflow at large |Re s|.
    """

    def __init__(self, scheme: SchottkyScheme, cover: DiskCover | None = None,
                 rep: UnitaryRep | None = None, Q: int = DEFAULT_Q,
                 verify_quadrature: bool = False, K: int | None = None):
        if Q < 4:
            raise ValueError("truncation order Q must be >= 4")
        self.scheme = scheme
        self.cover = cover if cover is not None else level0_cover(scheme)
        self.rep = rep if rep is not None else trivial_rep(scheme.m)
        if self.rep.m != scheme.m:
            raise ValueError("representation rank does not match the scheme")
        self.Q = Q
        self.K = K if K is not None else max(4 * (Q + 1), 128)
        self.d = self.rep.dim
        self.n_disks = len(self.cover)
        self.size = self.n_disks * (Q + 1) * self.d
        self._build_branches()
        if verify_quadrature:
            self._verify_quadrature()

    def _branch_data(self, target: int, branch: int, K: int):
        """Contour samples of the branch map and inverse-branch derivative."""
        disk_t = self.cover.disks[target]
        src = self.cover.branch_target(target, branch)
        disk_s = self.cover.disks[src]
        g = self.scheme.generator(branch)  # branch map is g^-1
        nodes = disk_t.center + disk_t.radius * np.exp(2j * np.pi * np.arange(K) / K)
        denom = g.a - g.c * nodes  # (g^-1)'(z) = 1/(a - cz)^2
        if np.min(np.abs(denom)) < 1e-12:
            raise PoleError(f"branch {branch} has a pole on the contour of disk {target}")
        if g.c != 0.0:
            pole = g.a / g.c
            if abs(pole - disk_t.center) <= disk_t.radius:
                raise PoleError(f"branch {branch} pole inside target disk {target}")
        w = (g.d * nodes - g.b) / denom  # g^-1(z)
        # Principal log of the derivative, continued from its positive real
        # values on the real trace: a - cz keeps one sign of real part on the
        # whole disk (the pole is outside), so flipping that sign first keeps
        # -2 log(.) inside (-pi, pi) and real on the axis.
        sigma = 1.0 if (g.a - g.c * disk_t.center) > 0 else -1.0
        logderiv = -2.0 * np.log((sigma * denom).astype(complex))
        u = (w - disk_s.center) / disk_s.radius
        sup_u = float(np.max(np.abs(u)))
        if sup_u >= 1.0:
            raise PoleError(
                f"branch {branch} image escapes source disk {src} (|u| = {sup_u:.3f})")
        orders = np.arange(self.Q + 1)
        basis = (u[:, None] ** orders[None, :]) * \
            np.sqrt((orders[None, :] + 1) / (np.pi * disk_s.radius ** 2))
        return src, logderiv, basis

    def _build_branches(self):
        self.branches: list[tuple[int, int, int, np.ndarray, np.ndarray]] = []
        max_abs_arg = 0.0
        for t in range(self.n_disks):
            for i in self.cover.admissible_branches(t):
                src, logderiv, basis = self._branch_data(t, i, self.K)
                self.branches.append((t, src, i, logderiv, basis))
                max_abs_arg = max(max_abs_arg, float(np.max(np.abs(logderiv.imag))))
        self.max_abs_arg = max_abs_arg
        orders = np.arange(self.Q + 1)
        self._target_scale = {}
        for t, disk in enumerate(self.cover.disks):
            # coefficient of kappa_{q'} = a_{q'} r^{q'} sqrt(pi r^2/(q'+1)),
            # and the FFT on the radius-r circle returns a_{q'} r^{q'} directly
            self._target_scale[t] = np.sqrt(np.pi * disk.radius ** 2 / (orders + 1))

    def _verify_quadrature(self, s_ref: complex = 1.0 + 0.0j):
        coarse = self._assemble(s_ref, derivative=False)
        fine = _DoubledAssembler(self).matrix(s_ref)
        scale = max(1.0, float(np.max(np.abs(fine))))
        err = float(np.max(np.abs(coarse - fine))) / scale
        if err > _QUAD_TOL:
            raise NonConvergenceError(
                f"contour quadrature not converged: entry change {err:.3e} under "
                f"doubling of the node count")

    def _assemble(self, s: complex, derivative: bool) -> np.ndarray:
        Qp1 = self.Q + 1
        out = np.zeros((self.size, self.size), dtype=complex)
        dout = np.zeros_like(out) if derivative else None
        for t, src, i, logderiv, basis in self.branches:
            weights = np.exp(s * logderiv)
            samples = weights[:, None] * basis
            coeff = np.fft.fft(samples, axis=0)[:Qp1] / self.K
            block = coeff * self._target_scale[t][:, None]
            rep_img = self.rep.letter_image(i)
            rows = slice(t * Qp1 * self.d, (t + 1) * Qp1 * self.d)
            cols = slice(src * Qp1 * self.d, (src + 1) * Qp1 * self.d)
            out[rows, cols] += np.kron(block, rep_img)
            if derivative:
                dsamples = (weights * logderiv)[:, None] * basis
                dcoeff = np.fft.fft(dsamples, axis=0)[:Qp1] / self.K
                dblock = dcoeff * self._target_scale[t][:, None]
                dout[rows, cols] += np.kron(dblock, rep_img)
        if derivative:
            return out, dout
        return out

    def matrix(self, s: complex) -> np.ndarray:
        return self._assemble(complex(s), derivative=False)

    def matrix_and_derivative(self, s: complex) -> tuple[np.ndarray, np.ndarray]:
        """(L_s, dL_s/ds); the derivative inserts log (g^-1)' in the weight."""
        return self._assemble(complex(s), derivative=True)

    def condition_exponent(self, s: complex) -> float:
        """Estimated base-10 digits lost to the twist factor's size at s."""
        return abs(complex(s).imag) * self.max_abs_arg / math.log(10.0)

    def logdet(self, s: complex) -> tuple[complex, float]:
        """(sign, log|det|) of det(I - L_s); safe for huge determinants."""
        sign, logabs = np.linalg.slogdet(
            np.eye(self.size, dtype=complex) - self.matrix(s))
        return complex(sign), float(logabs)

    def det(self, s: complex) -> complex:
        sign, logabs = self.logdet(s)
        return sign * complex(math.exp(min(logabs, 709.0)))

    def transfer_matrix(self, s: complex) -> TransferMatrix:
        # cover_degree records dim(rep), which is the covering degree for
        # induced permutation representations.
        return TransferMatrix(
            s=complex(s), entries=self.matrix(s), Q=self.Q,
            level=self.cover.level, n_disks=self.n_disks, dim_rep=self.d,
            scheme_hash=self.scheme.scheme_hash(), cover_degree=self.d)


class _DoubledAssembler:
    """Same assembly with twice the contour nodes, for quadrature checks."""

    def __init__(self, base: TransferAssembler):
        self.base = base
        self.K = 2 * base.K
        self.data = []
        for t, src, i, _, _ in base.branches:
            s2, logderiv, basis = base._branch_data(t, i, self.K)
            assert s2 == src
            self.data.append((t, src, i, logderiv, basis))

    def matrix(self, s: complex) -> np.ndarray:
        b = self.base
        Qp1 = b.Q + 1
        out = np.zeros((b.size, b.size), dtype=complex)
        for t, src, i, logderiv, basis in self.data:
            samples = np.exp(s * logderiv)[:, None] * basis
            coeff = np.fft.fft(samples, axis=0)[:Qp1] / self.K
            block = coeff * b._target_scale[t][:, None]
            rows = slice(t * Qp1 * b.d, (t + 1) * Qp1 * b.d)
            cols = slice(src * Qp1 * b.d, (src + 1) * Qp1 * b.d)
            out[rows, cols] += np.kron(block, b.rep.letter_image(i))
        return out


def assemble(scheme: SchottkyScheme, cover: DiskCover | None, rep: UnitaryRep | None,
             s: complex, Q: int = DEFAULT_Q,
             verify_quadrature: bool = False) -> TransferMatrix:
    """Truncated transfer matrix at parameter s (trivial rep, level 0 default)."""
    asm = TransferAssembler(scheme, cover, rep, Q, verify_quadrature)
    return asm.transfer_matrix(s)


def fredholm_det(T: TransferMatrix) -> complex:
    """det(I - T) by pivoted LU; warns when conditioning looks hopeless."""
    n = T.size
    with np.errstate(over="ignore"):
        det = complex(np.linalg.det(np.eye(n, dtype=complex) - T.entries))
    spread = float(np.max(np.abs(T.entries))) if n else 0.0
    if spread > 0:
        digits = math.log10(spread) + math.log10(max(n, 1))
        if digits > _CONDITION_DIGITS:
            warnings.warn(
                f"determinant at s = {T.s} may lose ~{digits:.0f} digits",
                PrecisionLossWarning, stacklevel=2)
    return det


def fredholm_det_adaptive(scheme: SchottkyScheme, cover: DiskCover | None,
                          rep: UnitaryRep | None, s: complex,
                          Q: int = 16, max_Q: int = 320) -> complex:
    """Redouble Q until the determinant moves by < 1e-10 relatively."""
    prev = None
    while Q <= max_Q:
        val = fredholm_det(assemble(scheme, cover, rep, s, Q))
        if prev is not None:
            denom = max(abs(val), 1e-300)
            if abs(val - prev) / denom < _ADAPTIVE_TOL:
                return val
        prev = val
        Q *= 2
    raise NonConvergenceError(f"determinant not stable up to Q = {max_Q}")


def singular_values(T: TransferMatrix) -> np.ndarray:
    """Singular values of the truncated operator, decreasing."""
    return np.linalg.svd(T.entries, compute_uv=False)


# ---------------------------------------------------------------------------
# Conjugacy-class data and orbit sums


@lru_cache(maxsize=None)
def _class_data(scheme: SchottkyScheme, length: int) -> tuple:
    """(word, displacement length) per primitive class of word length `length`."""
    gens = [scheme.generator(l) for l in scheme.letters]
    out = []
    for rep in necklaces(scheme.m, length, primitive=True):
        ell = word_displacement(rep, gens)
        if ell is not None:
            out.append((rep, ell))
    return tuple(out)


def primitive_classes(scheme: SchottkyScheme, max_len: int):
    """Primitive conjugacy classes up to word length max_len.

    Cyclically reduced necklace representatives, lexicographically minimal
    under rotation; inverse classes are listed separately.
    """
    out = []
    for n in range(1, max_len + 1):
        out.extend(_class_data(scheme, n))
    return out


@dataclass(frozen=True)
class EulerProductResult:
    value: complex
    tail_estimate: float
    word_cutoff: int


def euler_product(scheme: SchottkyScheme, rep: UnitaryRep, s: complex,
                  word_cutoff: int, delta: float | None = None) -> EulerProductResult:
    """Partial Euler product over primitive classes with word length <= cutoff.

    Each class contributes prod_k det(1 - rho(gamma) e^{-(s+k) l(gamma)}),
    truncated once the factors are within machine precision of 1.  The tail
    estimate extrapolates the class sums geometrically, in the spirit of the
    exponential prime-orbit growth bound.
    """
    s = complex(s)
    if delta is not None and s.real <= delta:
        warnings.warn(f"Euler product requested at Re s = {s.real} <= delta = {delta}",
                      DivergenceWarning, stacklevel=2)
    if word_cutoff < 1:
        raise ValueError("word_cutoff must be >= 1")
    value = 1.0 + 0.0j
    per_length_sum = {}
    d = rep.dim
    for n in range(1, word_cutoff + 1):
        total = 0.0
        for word, ell in _class_data(scheme, n):
            u = rep.word_image(word)
            # det(1 - U f) = prod_j (1 - lambda_j f) over the unitary's spectrum
            lam = np.linalg.eigvals(u) if d > 1 else u[0, :]
            k_max = max(1, int(math.ceil((-math.log(1e-18) / ell) - s.real)) + 1)
            factors = np.exp(-(s + np.arange(k_max + 1)) * ell)
            value *= complex(np.prod(1.0 - lam[None, :] * factors[:, None]))
            total += d * math.exp(-s.real * ell)
        per_length_sum[n] = total
    # geometric extrapolation of the class sums beyond the cutoff
    tail = 0.0
    if word_cutoff >= 2 and per_length_sum[word_cutoff] > 0:
        ratio = per_length_sum[word_cutoff] / max(per_length_sum[word_cutoff - 1], 1e-300)
        if ratio < 0.99:
            tail = per_length_sum[word_cutoff] * ratio / (1.0 - ratio)
        else:
            tail = math.inf
    return EulerProductResult(complex(value), tail, word_cutoff)


def trace_orbit_sum(scheme: SchottkyScheme, action: CosetAction | None,
                    power: int, s: complex, max_len: int | None = None) -> complex:
    """Trace of the m-th operator power as a sum over closed orbits.

    Sums d * chi(gamma^{power/d}) e^{-s l d'} / (1 - e^{-l d'}) over divisors
    d of the power and primitive classes of word length d, with d' = power/d;
    chi is the fixed-point character of the cover action (1 for the trivial
    cover).  Must match the matrix trace of the assembled operator power.
    """
    s = complex(s)
    if power < 1:
        raise ValueError("power must be >= 1")
    if max_len is not None and power > max_len:
        raise BudgetExceededError(f"power {power} beyond enumeration budget {max_len}")
    total = 0.0 + 0.0j
    for d in range(1, power + 1):
        if power % d != 0:
            continue
        k = power // d
        for word, ell in _class_data(scheme, d):
            if action is None:
                chi = 1
            else:
                chi = character(action, word * k)
            if chi == 0:
                continue
            x = math.exp(-ell * k)  # e^{-l(gamma^k)} with l multiplicative
            total += d * chi * np.exp(-s * ell * k) / (1.0 - x)
    return complex(total)
