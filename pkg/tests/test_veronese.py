import itertools

import pytest

from veronesean.projlin import ProjPoint, ProjSubspace, intersect, pg_lines, pg_points, span
from veronesean.rnc import RationalNormalCurve, recognize_rnc
from veronesean.veronese import MonomialBasis, build_variety, image_of_line, veronese_map


def test_monomial_basis_order_n2_d2():
    basis = MonomialBasis.of(2, 2)
    assert basis.exponents == (
        (2, 0, 0),
        (1, 1, 0),
        (1, 0, 1),
        (0, 2, 0),
        (0, 1, 1),
        (0, 0, 2),
    )
    assert basis.size == 6


def test_monomial_basis_counts():
    for n, d in [(1, 2), (2, 3), (3, 2), (4, 2)]:
        basis = MonomialBasis.of(n, d)
        import math

        assert basis.size == math.comb(n + d, d)
        assert len(set(basis.exponents)) == basis.size


def test_veronese_map_examples():
    b12 = MonomialBasis.of(1, 2)
    assert veronese_map(b12, ProjPoint.make(5, (1, 2))) == ProjPoint.make(5, (1, 2, 4))
    b22 = MonomialBasis.of(2, 2)
    assert veronese_map(b22, ProjPoint.make(5, (1, 1, 1))) == ProjPoint.make(
        5, (1, 1, 1, 1, 1, 1)
    )
    assert veronese_map(b22, ProjPoint.make(5, (0, 1, 2))) == ProjPoint.make(
        5, (0, 0, 0, 1, 2, 4)
    )


def test_veronese_map_scalar_invariance():
    basis = MonomialBasis.of(2, 3)
    p = 7
    for x in pg_points(p, 2)[:20]:
        for scale in range(2, p):
            scaled = ProjPoint.make(p, tuple((scale * c) % p for c in x.coords))
            assert veronese_map(basis, scaled) == veronese_map(basis, x)


def test_build_variety_2_2_5_counts():
    cap = build_variety(2, 2, 5)
    assert cap.ambient_dim == 5
    assert len(cap.points) == 31
    assert len(cap.spaces) == 31
    assert all(sp.subspace.dim == 2 for sp in cap.spaces)
    assert all(len(sp.point_ids) == 6 for sp in cap.spaces)


def test_build_variety_twisted_cubic_cap():
    cap = build_variety(1, 3, 7)
    assert cap.ambient_dim == 3
    assert len(cap.points) == 8
    assert len(cap.spaces) == 1


def test_build_variety_3_2_5_counts():
    cap = build_variety(3, 2, 5)
    assert cap.ambient_dim == 9
    assert len(cap.points) == 156
    assert len(cap.spaces) == 806


def test_build_variety_rejects_small_field():
    with pytest.raises(ValueError):
        build_variety(2, 2, 4)  # not prime
    with pytest.raises(ValueError):
        build_variety(2, 3, 3)  # p < d + 2


def test_build_variety_warns_when_main_bound_fails():
    with pytest.warns(UserWarning):
        build_variety(1, 3, 5)  # 25 < 27 but p >= d + 2


def test_variety_spans_ambient():
    cap = build_variety(2, 2, 5)
    assert span(*cap.points).dim == 5


def test_image_of_coordinate_line():
    # the image of {x2 = 0} consists of the points (a^2, ab, b^2) padded by
    # zeros at the x2-monomials, spanning coordinates 0, 1, 3
    basis = MonomialBasis.of(2, 2)
    p = 5
    line = span(ProjPoint.make(p, (1, 0, 0)), ProjPoint.make(p, (0, 1, 0)))
    sub = image_of_line(basis, line)
    assert sub.dim == 2
    expected = ProjSubspace.from_rows(
        p, 5, [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0]]
    )
    assert sub == expected


@pytest.mark.parametrize("n,d,p,count", [(2, 2, 5, 6), (2, 3, 7, 8)])
def test_image_of_line_is_curve(n, d, p, count):
    basis = MonomialBasis.of(n, d)
    line = pg_lines(p, n)[0]
    sub = image_of_line(basis, line)
    assert sub.dim == d
    images = [veronese_map(basis, pt) for pt in line.points()]
    assert len(set(images)) == count
    curve = recognize_rnc(images, sub, d)
    assert isinstance(curve, RationalNormalCurve)


def _paper_lines(n, p):
    """The three representative lines: L1 = <e0, e1>, L2 = <e0, e2>,
    L3 = <e_{n-1}, e_n> (the latter only for n >= 3)."""
    def unit(i):
        return ProjPoint.make(p, tuple(1 if k == i else 0 for k in range(n + 1)))

    l1 = span(unit(0), unit(1))
    l2 = span(unit(0), unit(2))
    l3 = span(unit(n - 1), unit(n)) if n >= 3 else None
    return l1, l2, l3


def test_concurrent_line_images_meet_in_image_of_common_point():
    n, d, p = 2, 2, 5
    basis = MonomialBasis.of(n, d)
    l1, l2, _ = _paper_lines(n, p)
    meet = intersect(image_of_line(basis, l1), image_of_line(basis, l2))
    common = intersect(l1, l2)
    assert common.dim == 0
    expected = veronese_map(basis, common.points()[0])
    assert meet.dim == 0
    assert meet.contains(expected)


def test_disjoint_line_images_are_disjoint():
    n, d, p = 3, 2, 5
    basis = MonomialBasis.of(n, d)
    l1, _, l3 = _paper_lines(n, p)
    assert intersect(l1, l3).dim == -1
    assert intersect(image_of_line(basis, l1), image_of_line(basis, l3)).dim == -1


@pytest.mark.parametrize("n,d,p", [(2, 2, 5), (2, 2, 3), (2, 3, 5), (3, 2, 3)])
def test_line_image_intersections_all_pairs(n, d, p):
    # spans of line images intersect exactly in the image of the common
    # point, or not at all, over every pair of lines
    basis = MonomialBasis.of(n, d)
    lines = pg_lines(p, n)
    images = {line: image_of_line(basis, line) for line in lines}
    for la, lb in itertools.combinations(lines, 2):
        meet_src = intersect(la, lb)
        meet_img = intersect(images[la], images[lb])
        if meet_src.dim == -1:
            assert meet_img.dim == -1
        else:
            assert meet_img.dim == 0
            assert meet_img.contains(veronese_map(basis, meet_src.points()[0]))


def test_tangent_plane_at_representative_point():
    # tangent lines at phi(r) to the images of <r, p1> and <r, p2> span a
    # plane that contains the tangent at phi(r) to the image of <r, y> for
    # every y on the line <p1, p2>
    from veronesean.rnc import tangent_line

    n, d, p = 2, 2, 5
    basis = MonomialBasis.of(n, d)
    r = ProjPoint.make(p, (0, 0, 1))
    p1 = ProjPoint.make(p, (1, 0, 0))
    p2 = ProjPoint.make(p, (0, 1, 0))
    phir = veronese_map(basis, r)

    def tangent_at_phir(through):
        line = span(r, through)
        sub = image_of_line(basis, line)
        curve = recognize_rnc([veronese_map(basis, q) for q in line.points()], sub, d)
        assert isinstance(curve, RationalNormalCurve)
        return tangent_line(curve, phir)

    plane = span(tangent_at_phir(p1), tangent_at_phir(p2))
    assert plane.dim == 2
    for y in span(p1, p2).points():
        assert plane.contains_subspace(tangent_at_phir(y))
