import math

import numpy as np
import pytest

from schottky.errors import ContractionError, InfeasibleParametersError
from schottky.moebius import MoebiusMap, apply, derivative
from schottky.scheme import (Disk, SchottkyScheme, branch_derivative_sup,
                             contraction_bound, conjugate_scheme,
                             cylinder_scheme, integral_generators,
                             integral_scheme, load_scheme, moebius_disk_image,
                             pants_scheme, save_scheme, scheme_from_dict,
                             scheme_to_dict, shortest_geodesic, subscheme,
                             validate_scheme)
from schottky.words import enumerate_words, word_matrix


@pytest.fixture(scope="module")
def cyl():
    return cylinder_scheme(2.0)


@pytest.fixture(scope="module")
def pants():
    return pants_scheme(2.0, 2.0, 6.0)


def test_cylinder_fixture_geometry(cyl):
    # centers -+coth(1), radius 1/sinh(1)
    assert cyl.disks[0].center == pytest.approx(-1.3130352854993312, abs=1e-12)
    assert cyl.disks[1].center == pytest.approx(+1.3130352854993312, abs=1e-12)
    assert cyl.disks[0].radius == pytest.approx(0.8509181282393216, abs=1e-12)
    from schottky.moebius import displacement_length
    assert displacement_length(cyl.generators[0]) == pytest.approx(2.0, rel=1e-13)


def test_cylinder_validates(cyl):
    rep = validate_scheme(cyl)
    assert rep.ok and rep.failure is None
    assert rep.min_gap > 0
    assert 0 < rep.theta < 1


def test_tiny_cylinder_fails_validation():
    # closures meet as ell -> 0+: the gap shrinks like ell while radii blow up
    from schottky.errors import ValidationError
    from schottky.scheme import isometric_disk
    g = MoebiusMap.from_fixed_points(-1.0, 1.0, 1e-12)
    s = SchottkyScheme(
        disks=(isometric_disk(g), isometric_disk(g.inverse())),
        generators=(g,))
    rep = validate_scheme(s)
    assert not rep.ok
    assert "disjointness" in rep.failure
    with pytest.raises(ValidationError):
        cylinder_scheme(1e-12)


def test_overlapping_disks_fail():
    g = MoebiusMap.from_fixed_points(-1.0, 1.0, 2.0)
    s = SchottkyScheme(
        disks=(Disk(-0.5, 1.0), Disk(0.5, 1.0)), generators=(g,))
    rep = validate_scheme(s)
    assert not rep.ok and "disjointness" in rep.failure


def test_identity_generator_fails_mapping():
    cylinder = cylinder_scheme(2.0)
    s = SchottkyScheme(disks=cylinder.disks,
                       generators=(MoebiusMap.identity(),))
    rep = validate_scheme(s)
    assert not rep.ok
    assert "hyperbolicity" in rep.failure


def test_wrong_pairing_fails_mapping(cyl):
    # right disks, but the generator of a different cylinder
    g = MoebiusMap.from_fixed_points(-1.0, 1.0, 1.0)
    s = SchottkyScheme(disks=cyl.disks, generators=(g,))
    rep = validate_scheme(s)
    assert not rep.ok and "mapping" in rep.failure


def test_pants_fixture(pants):
    assert validate_scheme(pants).ok
    assert 0 < contraction_bound(pants) < 1


def test_pants_zero_separation_infeasible():
    with pytest.raises(InfeasibleParametersError):
        pants_scheme(2.0, 2.0, 0.0)


def test_pants_symmetric_under_reflection():
    p = pants_scheme(2.0, 2.0, 7.0)
    centers = sorted(round(d.center, 12) for d in p.disks)
    assert centers == sorted(round(-c, 12) for c in centers)
    radii = {round(d.radius, 12) for d in p.disks}
    assert len(radii) == 1


def test_moebius_disk_image_exact():
    g = MoebiusMap(2.0, 1.0, 1.0, 1.0)
    disk = Disk(4.0, 1.0)
    img = moebius_disk_image(g, disk)
    for ang in np.linspace(0, 2 * np.pi, 17):
        w = apply(g, disk.boundary_point(ang))
        assert abs(abs(w - img.center) - img.radius) < 1e-12


def test_contraction_bound_dominates_branch_sups(cyl, pants):
    for s in (cyl, pants):
        theta = contraction_bound(s)
        sups = [branch_derivative_sup(s, i, j)
                for j in s.letters for i in s.letters if s.admissible(i, j)]
        assert theta == pytest.approx(max(sups))
        assert theta < 1


def test_contraction_decays_with_separation():
    thetas = [contraction_bound(cylinder_scheme(ell)) for ell in (1.0, 2.0, 4.0)]
    assert thetas[0] > thetas[1] > thetas[2]
    assert thetas[2] < 0.05


def test_fixed_point_derivative_below_theta_power(pants):
    # e^{-l(w)} <= theta^{|w|} for cyclically reduced words
    theta = contraction_bound(pants)
    gens = [pants.generator(l) for l in pants.letters]
    from schottky.words import necklaces, word_displacement
    for n in (1, 2, 3):
        for rep in necklaces(2, n):
            ell = word_displacement(rep, gens)
            assert math.exp(-ell) <= theta ** n * (1 + 1e-12)


def test_branch_images_nest(cyl, pants):
    # apply(matrix(w)^-1, z) lands in the disk of the last letter
    for s in (cyl, pants):
        gens = [s.generator(l) for l in s.letters]
        for j in s.letters:
            z = complex(s.disk(j).center, 0.3 * s.disk(j).radius)
            for w in enumerate_words(s.m, 3, first_constraint=j):
                img = apply(word_matrix(w.letters, gens).inverse(), z)
                last = s.disk(w.letters[-1])
                assert abs(img - last.center) < last.radius


def test_shortest_geodesic_cylinder(cyl):
    res = shortest_geodesic(cyl, 3)
    assert res.length == pytest.approx(2.0, rel=1e-12)
    assert res.certified


def test_shortest_geodesic_pants(pants):
    res = shortest_geodesic(pants, 4)
    assert res.length == pytest.approx(2.0, rel=1e-12)
    assert res.word in ((1,), (2,), (3,), (4,))
    assert res.certified


def test_shortest_geodesic_uncertified_when_budget_too_small():
    # theta near 1: a single-letter scan cannot certify the minimum
    s = cylinder_scheme(0.22)
    res = shortest_geodesic(s, 1)
    assert res.length == pytest.approx(0.22, rel=1e-9)
    assert not res.certified


def test_subscheme_of_pants_is_cylinder_like(pants):
    sub = subscheme(pants, [1])
    assert sub.m == 1
    assert validate_scheme(sub).ok


def test_conjugated_scheme_still_validates(pants):
    h = MoebiusMap(1.2, 0.7, 0.0, 1 / 1.2)
    conj = conjugate_scheme(pants, h)
    assert validate_scheme(conj).ok


def test_scheme_roundtrip(tmp_path, pants):
    path = tmp_path / "scheme.json"
    save_scheme(pants, str(path))
    loaded = load_scheme(str(path))
    assert loaded.m == pants.m
    for a, b in zip(loaded.disks, pants.disks):
        assert a.center == pytest.approx(b.center, abs=1e-15)
    data = scheme_to_dict(pants)
    again = scheme_from_dict(data)
    assert again.scheme_hash() == pants.scheme_hash()


def test_integral_scheme_has_integer_unit_determinant_generators():
    scheme, gens = integral_scheme()
    assert validate_scheme(scheme).ok
    assert integral_generators(scheme) == gens
    for (a, b), (c, d) in gens:
        assert a * d - b * c == 1
        assert abs(a + d) > 2
