import math

import numpy as np
import pytest

from schottky.covers import cyclic_action, induced_permutation_rep
from schottky.scheme import cylinder_scheme, pants_scheme
from schottky.thermo import hausdorff_dimension
from schottky.zeros import (Rect, count_M, count_N, locate_zeros,
                            winding_count)

from oracles import cylinder_lattice_count, cylinder_zero_lattice


@pytest.fixture(scope="module")
def cyl():
    return cylinder_scheme(2.0)


@pytest.fixture(scope="module")
def pants():
    return pants_scheme(2.0, 2.0, 6.0)


@pytest.fixture(scope="module")
def pants_delta(pants):
    return hausdorff_dimension(pants).delta


def test_rect_validation():
    with pytest.raises(ValueError):
        Rect(1.0, 0.0, 0.0, 1.0)


def test_winding_around_single_lattice_point(cyl):
    w = winding_count(Rect(-0.3, 0.3, math.pi - 0.3, math.pi + 0.3), cyl, Q=24)
    assert w == 2


def test_winding_zero_right_of_delta(cyl, pants, pants_delta):
    assert winding_count(Rect(0.05, 2.0, -20.0, 20.0), cyl, Q=30) == 0
    assert winding_count(Rect(pants_delta + 0.05, pants_delta + 2.0, -20.0, 20.0),
                         pants, Q=40) == 0


def test_winding_additive_over_partition(cyl):
    big = Rect(-2.4, 0.6, 0.5, 7.0)
    left = Rect(-2.4, -0.9, 0.5, 7.0)
    right = Rect(-0.9, 0.6, 0.5, 7.0)
    total = winding_count(big, cyl, Q=24)
    assert total == winding_count(left, cyl, Q=24) + \
        winding_count(right, cyl, Q=24)
    assert total == 2 * len(cylinder_zero_lattice(2.0, big))


def test_locate_cylinder_lattice(cyl):
    rect = Rect(-3.5, 1.0, 0.1, 12.0)
    report = locate_zeros(rect, cyl, Q=28)
    expected = cylinder_zero_lattice(2.0, rect)
    assert len(report.zeros) == len(expected) == 12
    assert report.winding == 24
    for z, mult in report.zeros:
        assert mult == 2
        assert min(abs(z - e) for e in expected) < 1e-8
    assert not report.unresolved
    assert report.total_multiplicity == report.winding
    assert report.label == "zeta_zero"


def test_located_zeros_have_small_residual_and_stability(cyl):
    rect = Rect(-0.4, 0.4, 2.8, 3.5)
    from schottky.transfer import TransferAssembler, fredholm_det
    rep = locate_zeros(rect, cyl, Q=24)
    (z, mult), = rep.zeros
    assert mult == 2
    asm = TransferAssembler(cyl, Q=24)
    assert abs(fredholm_det(asm.transfer_matrix(z))) < 1e-8
    rep2 = locate_zeros(rect, cyl, Q=48)
    assert abs(rep2.zeros[0][0] - z) < 1e-7


def test_zero_set_conjugate_symmetric(pants):
    top = locate_zeros(Rect(-0.9, 0.4, 0.3, 2.3), pants, Q=30)
    bottom = locate_zeros(Rect(-0.9, 0.4, -2.3, -0.3), pants, Q=30)
    zs_top = sorted(z for z, _ in top.zeros)
    zs_bottom = sorted(z.conjugate() for z, _ in bottom.zeros)
    assert len(zs_top) == len(zs_bottom)
    for a, b in zip(zs_top, zs_bottom):
        assert abs(a - b) < 1e-8


def test_pants_real_zero_at_delta(pants, pants_delta):
    report = locate_zeros(Rect(pants_delta - 0.05, pants_delta + 0.05,
                               -0.05, 0.05), pants, Q=30)
    assert len(report.zeros) == 1
    z, mult = report.zeros[0]
    assert mult == 1
    assert abs(z - pants_delta) < 1e-8


def test_empty_rect_in_zero_free_region(pants, pants_delta):
    report = locate_zeros(Rect(pants_delta + 0.1, pants_delta + 1.0, 1.0, 3.0),
                          pants, Q=30)
    assert report.zeros == ()
    assert report.winding == 0


def test_exclude_topological_flag(cyl):
    # s = 0 is a lattice zero of the cylinder zeta; the flag drops it
    rect = Rect(-0.45, 0.45, -0.45, 0.45)
    keep = locate_zeros(rect, cyl, Q=24)
    drop = locate_zeros(rect, cyl, Q=24, exclude_topological=True)
    assert len(keep.zeros) == 1
    assert drop.zeros == ()


def test_count_m_cylinder(cyl):
    # box around s = pi i catches the multiplicity-2 zero
    assert count_M(cyl, None, -0.5, math.pi, delta=0.0, Q=24) == 2
    assert count_M(cyl, None, 0.2, math.pi, delta=0.0, Q=24) == 0


def test_count_m_monotone_in_sigma(pants, pants_delta):
    counts = [count_M(pants, None, sigma, 2.0, delta=pants_delta, Q=30)
              for sigma in (-0.4, -0.1, 0.2)]
    assert counts[0] >= counts[1] >= counts[2]


def test_count_n_cylinder_small(cyl):
    for r in (2.0, 5.0):
        assert count_N(cyl, None, r, Q=20, level=0, tile=1.7) == \
            cylinder_lattice_count(r, 2.0)


def test_count_n_small_radius_includes_boundary_zero():
    s = cylinder_scheme(2.0)
    # |s| <= 1 catches the double zeros at 0 and at -1 (exactly on the circle)
    assert count_N(s, None, 1.0, Q=16, level=0, tile=0.9) == \
        cylinder_lattice_count(1.0, 2.0) == 4


def test_count_n_empty_below_first_zero():
    # sign-twisted cylinder zeta = prod (1+e^{-(s+k)l})^2 has its lowest
    # zeros at height pi/2, so the unit disk is empty
    import numpy as np
    from schottky.covers import UnitaryRep
    s = cylinder_scheme(2.0)
    sign_rep = UnitaryRep((np.array([[-1.0]]),))
    assert count_N(s, None, 1.0, Q=16, level=0, tile=0.9, rep=sign_rep) == 0


def test_count_n_cover_scaling_small():
    s = cylinder_scheme(2.0)
    base = count_N(s, None, 7.0, Q=20, level=1, tile=1.7)
    act = cyclic_action(1, 2)
    cover = count_N(s, act, 7.0, Q=20, level=1, tile=1.7)
    assert base == cylinder_lattice_count(7.0, 2.0)
    assert cover == cylinder_lattice_count(7.0, 4.0)
    assert cover > base
