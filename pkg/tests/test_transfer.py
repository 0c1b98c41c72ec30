import cmath
import math
import warnings

import numpy as np
import pytest

from schottky.covers import (CosetAction, cyclic_action, induced_permutation_rep,
                             trivial_rep)
from schottky.errors import DivergenceWarning, PrecisionLossWarning
from schottky.refine import level0_cover, refine
from schottky.scheme import Disk, cylinder_scheme, pants_scheme
from schottky.thermo import hausdorff_dimension
from schottky.transfer import (TransferAssembler, assemble, euler_product,
                               fredholm_det, fredholm_det_adaptive,
                               primitive_classes, singular_values,
                               trace_orbit_sum)

from oracles import cylinder_zeta, cylinder_zeta_log


@pytest.fixture(scope="module")
def cyl():
    return cylinder_scheme(2.0)


@pytest.fixture(scope="module")
def pants():
    return pants_scheme(2.0, 2.0, 6.0)


@pytest.fixture(scope="module")
def pants_delta(pants):
    return hausdorff_dimension(pants).delta


# --- basis normalisation ----------------------------------------------------

def bergman_inner_product(f, g, disk: Disk, n_r=80, n_t=256):
    """<f, g> on the disk by polar quadrature (Gauss-Legendre x trapezoid)."""
    nodes, wts = np.polynomial.legendre.leggauss(n_r)
    t = 0.5 * (nodes + 1.0)           # radial parameter in [0, 1]
    wt = 0.5 * wts
    ang = 2.0 * np.pi * np.arange(n_t) / n_t
    z = disk.center + disk.radius * t[:, None] * np.exp(1j * ang)[None, :]
    vals = f(z) * np.conj(g(z))
    radial = (vals.mean(axis=1) * t * wt).sum()
    return 2.0 * np.pi * disk.radius ** 2 * radial


def kappa(disk: Disk, q):
    return lambda z: math.sqrt((q + 1) / (math.pi * disk.radius ** 2)) * \
        ((z - disk.center) / disk.radius) ** q


def test_basis_orthonormal_under_quadrature():
    disk = Disk(0.3, 0.7)
    for q in (0, 1, 4, 9):
        assert bergman_inner_product(kappa(disk, q), kappa(disk, q), disk) == \
            pytest.approx(1.0, abs=1e-12)
    assert abs(bergman_inner_product(kappa(disk, 2), kappa(disk, 5), disk)) < 1e-13


def test_coefficient_rule_against_two_dim_quadrature():
    # coefficient of a holomorphic f against kappa_q must equal
    # a_q r^q sqrt(pi r^2 / (q+1)) with a_q the Taylor coefficient
    disk = Disk(0.3, 0.7)

    def f(z):
        return np.exp(z) / (2.0 - z)

    K = 256
    nodes = disk.center + disk.radius * np.exp(2j * np.pi * np.arange(K) / K)
    taylor = np.fft.fft(f(nodes)) / K  # a_q r^q
    for q in (0, 1, 3, 7, 12):
        predicted = taylor[q] * math.sqrt(math.pi * disk.radius ** 2 / (q + 1))
        direct = bergman_inner_product(f, kappa(disk, q), disk)
        assert direct == pytest.approx(predicted, abs=1e-12)


# --- assembly structure ------------------------------------------------------

def test_block_structure_admissibility(pants):
    T = assemble(pants, None, None, 1.0 + 0.5j, Q=8)
    Qp1 = 9
    for t in range(4):
        for p in range(4):
            block = T.entries[t * Qp1:(t + 1) * Qp1, p * Qp1:(p + 1) * Qp1]
            if pants.admissible(p + 1, t + 1):
                assert np.max(np.abs(block)) > 0
            else:
                assert np.max(np.abs(block)) == 0


def test_entries_real_at_real_s(pants):
    T = assemble(pants, None, None, 0.7, Q=10)
    assert np.max(np.abs(T.entries.imag)) < 1e-14


def test_entry_decay_in_source_order(cyl):
    T = assemble(cyl, None, None, 1.0, Q=20)
    col_norms = [np.linalg.norm(T.entries[:21, q]) for q in range(21)]
    assert col_norms[20] < col_norms[10] < col_norms[0]
    assert col_norms[20] < col_norms[0] * 1e-6


def test_cylinder_leading_entry_magnitude():
    # single-branch leading entry tends to e^{-Re(s) l} as separation grows
    for ell in (3.0, 5.0):
        s = cylinder_scheme(ell)
        T = assemble(s, None, None, 1.3, Q=12)
        lead = abs(T.entries[0, 0])
        assert lead == pytest.approx(math.exp(-1.3 * ell), rel=0.2)


def test_kronecker_inflation(pants):
    s = 0.9 + 0.4j
    scalar = assemble(pants, None, trivial_rep(2, 1), s, Q=6).entries
    inflated = assemble(pants, None, trivial_rep(2, 3), s, Q=6).entries
    Qp1, d = 7, 3
    n = scalar.shape[0]
    expect = np.zeros((n * d, n * d), dtype=complex)
    for bi in range(4):
        for bj in range(4):
            blk = scalar[bi * Qp1:(bi + 1) * Qp1, bj * Qp1:(bj + 1) * Qp1]
            expect[bi * Qp1 * d:(bi + 1) * Qp1 * d, bj * Qp1 * d:(bj + 1) * Qp1 * d] = \
                np.kron(blk, np.eye(d))
    assert np.allclose(inflated, expect, atol=1e-14)


def test_permutation_twist_matches_manual_interleave(pants):
    act = CosetAction(2, ((1, 0), (0, 1)))
    s = 0.8 + 1.1j
    twisted = assemble(pants, None, induced_permutation_rep(act), s, Q=6).entries
    scalar = assemble(pants, None, None, s, Q=6).entries
    perms = {1: np.array([[0, 1], [1, 0]]), 2: np.eye(2),
             3: np.array([[0, 1], [1, 0]]), 4: np.eye(2)}
    Qp1 = 7
    expect = np.zeros_like(twisted)
    for t in range(4):
        for p in range(4):
            if not pants.admissible(p + 1, t + 1):
                continue
            blk = scalar[t * Qp1:(t + 1) * Qp1, p * Qp1:(p + 1) * Qp1]
            expect[t * Qp1 * 2:(t + 1) * Qp1 * 2, p * Qp1 * 2:(p + 1) * Qp1 * 2] = \
                np.kron(blk, perms[p + 1])
    assert np.allclose(twisted, expect, atol=1e-14)


# --- determinants ------------------------------------------------------------

def test_fredholm_matches_cylinder_oracle(cyl):
    for s in (1.0 + 0j, 0.5 + 2j, 2.0 - 1.0j, -1.0 + 3.3j):
        det = fredholm_det(assemble(cyl, None, None, s, Q=30))
        assert det == pytest.approx(cylinder_zeta(s, 2.0), abs=1e-11)


def test_cylinder_det_value_at_one(cyl):
    det = fredholm_det(assemble(cyl, None, None, 1.0, Q=30))
    assert det.real == pytest.approx(0.7163850195971755, abs=1e-10)
    assert abs(det.imag) < 1e-14
    assert abs(det - cylinder_zeta(1.0 + 0j, 2.0)) < 1e-12


def test_cylinder_det_vanishes_at_zero(cyl):
    det = fredholm_det(assemble(cyl, None, None, 0.0, Q=30))
    assert abs(det) < 1e-12


def test_adaptive_det_stable(pants):
    val = fredholm_det_adaptive(pants, None, None, 0.7 + 1.0j, Q=16)
    ref = fredholm_det(assemble(pants, None, None, 0.7 + 1.0j, Q=64))
    assert val == pytest.approx(ref, rel=1e-9)


def test_det_truncation_stability(pants):
    # level 0 holds 1e-10 through moderate heights; the twist factor costs
    # conditioning ~ e^{|Im s| max|arg|}, so taller strips use level 1
    s = 0.4 + 12j
    d1 = fredholm_det(assemble(pants, None, None, s, Q=40))
    d2 = fredholm_det(assemble(pants, None, None, s, Q=80))
    assert abs(d1 - d2) / abs(d2) < 1e-10
    s = 0.4 + 30j
    cov = refine(pants, 1)
    d1 = fredholm_det(assemble(pants, cov, None, s, Q=40))
    d2 = fredholm_det(assemble(pants, cov, None, s, Q=80))
    assert abs(d1 - d2) / abs(d2) < 1e-10


def test_det_invariant_under_disk_relabeling(pants):
    s = 0.8 + 0.3j
    base = fredholm_det(assemble(pants, None, None, s, Q=16))
    # swap the roles of the two generators: disks reorder accordingly
    from schottky.scheme import SchottkyScheme
    swapped = SchottkyScheme(
        disks=(pants.disks[1], pants.disks[0], pants.disks[3], pants.disks[2]),
        generators=(pants.generators[1], pants.generators[0]))
    other = fredholm_det(assemble(swapped, None, None, s, Q=16))
    assert other == pytest.approx(base, rel=1e-12)


def test_det_agrees_across_refinement_levels(pants):
    # same Fredholm determinant on the level-1 refined cover
    s = 0.6 + 2.2j
    d0 = fredholm_det(assemble(pants, level0_cover(pants), None, s, Q=40))
    d1 = fredholm_det(assemble(pants, refine(pants, 1), None, s, Q=40))
    assert d1 == pytest.approx(d0, rel=1e-8)


def test_precision_loss_warning():
    s = cylinder_scheme(2.0)
    with pytest.warns(PrecisionLossWarning):
        fredholm_det(assemble(s, None, None, -30.0 + 0.4j, Q=24))


# --- Euler products ----------------------------------------------------------

def test_euler_product_cylinder_closed_form(cyl):
    s = 1.4 + 0.8j
    res = euler_product(cyl, trivial_rep(1), s, word_cutoff=3)
    assert res.value == pytest.approx(cylinder_zeta(s, 2.0), rel=1e-12)


def test_euler_product_power_rule_for_trivial_inflation(pants):
    s = 1.5 + 0.5j
    v1 = euler_product(pants, trivial_rep(2, 1), s, word_cutoff=6).value
    v3 = euler_product(pants, trivial_rep(2, 3), s, word_cutoff=6).value
    assert v3 == pytest.approx(v1 ** 3, rel=1e-10)


def test_euler_fredholm_agreement(pants, pants_delta):
    rng = np.random.default_rng(5)
    asm = TransferAssembler(pants, Q=40)
    for _ in range(4):
        s = complex(pants_delta + 0.5 + 1.5 * rng.random(),
                    10.0 * rng.random() - 5.0)
        det = fredholm_det(asm.transfer_matrix(s))
        res = euler_product(pants, trivial_rep(2), s, word_cutoff=10,
                            delta=pants_delta)
        assert abs(det - res.value) / abs(det) < 1e-6
        assert res.tail_estimate < 1e-6


def test_euler_divergence_warning(pants, pants_delta):
    with pytest.warns(DivergenceWarning):
        euler_product(pants, trivial_rep(2), pants_delta - 0.05, 3,
                      delta=pants_delta)


def test_primitive_class_counts(pants):
    classes = primitive_classes(pants, 3)
    by_len = {}
    for word, ell in classes:
        by_len.setdefault(len(word), []).append(ell)
        assert ell > 0
    assert len(by_len[1]) == 4
    # length 2: 12 cyclically reduced words, minus the four squares (a, a),
    # in rotation classes of size two
    assert len(by_len[2]) == 4
    assert len(by_len[3]) == 8


# --- traces ------------------------------------------------------------------

def test_trace_identity_cylinder_closed_form(cyl):
    s = 0.7 + 0.4j
    asm = TransferAssembler(cyl, Q=30)
    T = asm.matrix(s)
    for m in (1, 2, 3, 6):
        closed = 2 * np.exp(-s * 2.0 * m) / (1 - np.exp(-2.0 * m))
        assert trace_orbit_sum(cyl, None, m, s) == pytest.approx(closed, rel=1e-12)
        assert np.trace(np.linalg.matrix_power(T, m)) == \
            pytest.approx(closed, abs=1e-10)


def test_trace_identity_pants_with_cover(pants):
    s = 0.8 + 0.5j
    act = cyclic_action(2, 3)
    asm = TransferAssembler(pants, rep=induced_permutation_rep(act), Q=30)
    T = asm.matrix(s)
    for m in (1, 2, 3, 4, 5, 6):
        lhs = np.trace(np.linalg.matrix_power(T, m))
        rhs = trace_orbit_sum(pants, act, m, s)
        assert abs(lhs - rhs) < 1e-8


def test_trace_zero_when_no_fixed_points():
    # Z/3 cover of the cylinder: chi vanishes on words of length not = 0 mod 3
    cylinder = cylinder_scheme(2.0)
    act = cyclic_action(1, 3)
    assert trace_orbit_sum(cylinder, act, 1, 1.0 + 0j) == 0
    assert trace_orbit_sum(cylinder, act, 2, 1.0 + 0j) == 0
    assert abs(trace_orbit_sum(cylinder, act, 3, 1.0 + 0j)) > 0


def test_trivial_cover_reduces_to_untwisted(pants):
    s = 0.9 + 0.1j
    from schottky.covers import trivial_action
    for m in (1, 2, 3):
        assert trace_orbit_sum(pants, trivial_action(2), m, s) == \
            pytest.approx(trace_orbit_sum(pants, None, m, s), rel=1e-13)


# --- singular values ---------------------------------------------------------

def test_singular_values_decay_linearly(pants):
    T = assemble(pants, None, None, 0.6 + 1.2j, Q=30)
    mu = singular_values(T)
    assert np.all(np.diff(mu) <= 1e-300 + 0 * mu[1:])  # non-increasing
    keep = mu > mu[0] * 1e-12
    ks = np.arange(len(mu))[keep]
    slope, _ = np.polyfit(ks, np.log(mu[keep]), 1)
    resid = np.polyval(np.polyfit(ks, np.log(mu[keep]), 1), ks) - np.log(mu[keep])
    r2 = 1 - np.sum(resid ** 2) / np.sum((np.log(mu[keep]) - np.log(mu[keep]).mean()) ** 2)
    assert slope < 0
    assert r2 > 0.99


def test_weyl_inequality(pants):
    for s in (0.5 + 1j, 0.2 + 3j, 1.5 - 2j):
        T = assemble(pants, None, None, s, Q=24)
        mu = singular_values(T)
        lhs = math.log(abs(fredholm_det(T)))
        rhs = float(np.sum(np.log1p(mu)))
        assert lhs <= rhs + 1e-10


def test_twisted_singular_values_match_block_scalar(pants):
    # unitary twists do not change the singular values of the inflation
    s = 0.7 + 0.9j
    act = cyclic_action(2, 2)
    twisted = assemble(pants, None, induced_permutation_rep(act), s, Q=12)
    plain = assemble(pants, None, trivial_rep(2, 2), s, Q=12)
    mu1 = singular_values(twisted)
    mu2 = singular_values(plain)
    assert np.allclose(mu1, mu2, rtol=1e-10, atol=1e-12)
