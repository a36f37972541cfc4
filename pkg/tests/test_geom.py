import pytest

from relcluster.geom import (AmbientSpace, GeometryError, Subscheme, charts, is_effective_cartier_divisor,
                             saturate_irrelevant, scheme_image, singular_locus)
from relcluster.groebner import Ideal, radical_contains


def plane_product():
    return AmbientSpace.product(("P", ["x0", "x1", "x2"]), ("P", ["u", "v", "w"]))


def test_ambient_dimensions():
    assert plane_product().dimension == 4
    assert AmbientSpace.affine(["a", "b", "c"]).dimension == 3
    mixed = AmbientSpace.product(("A", ["a"]), ("P", ["x", "y", "z"]), ("P", ["u", "v"]))
    assert mixed.dimension == 4
    assert len(mixed.projective_blocks) == 2 and len(mixed.affine_blocks) == 1


def test_irrelevant_components_are_removed():
    P2 = AmbientSpace.projective(["x", "y", "z"])
    R = P2.ring
    # (x, y, z) is the irrelevant ideal: the subscheme is empty
    assert P2.subscheme([R("x"), R("y"), R("z^2")]).is_empty()
    I = Ideal(R, [R("x^2"), R("x*y"), R("x*z")])
    assert saturate_irrelevant(I, P2).equals(Ideal(R, [R("x")]))


def test_projective_dimension_and_degree():
    P3 = AmbientSpace.projective(["x", "y", "z", "t"])
    R = P3.ring
    cubic = P3.subscheme([R("x*z - y^2"), R("y*t - z^2"), R("x*t - y*z")])
    assert cubic.dimension() == 1 and cubic.degree() == 3
    pts = P3.subscheme([R("x*y"), R("z"), R("t")])
    assert pts.dimension() == 0 and pts.degree() == 2
    assert P3.whole().dimension() == 3 and P3.whole().degree() == 1


def test_product_degree_of_diagonal_points():
    amb = plane_product()
    R = amb.ring
    Z = amb.subscheme([R("x0*v - x1*u"), R("x0*w - x2*u"), R("x1*w - x2*v"), R("u - v"), R("w")])
    assert Z.dimension() == 0 and Z.degree() == 1


def test_section_image_by_elimination():
    src = AmbientSpace.projective(["u", "v"])
    tgt = AmbientSpace.product(("P", ["x", "y", "z", "t"]), ("P", ["u", "v"]))
    S = src.ring
    img = scheme_image({"x": S("u"), "y": S("v"), "z": S("0"), "t": S("0"), "u": S("u"), "v": S("v")},
                       src.whole(), tgt)
    R = tgt.ring
    assert img.ideal.equals(Ideal(R, [R("y*u - x*v"), R("z"), R("t")]))
    assert str(img.ideal) == "y*u - x*v, z, t"


def test_twisted_cubic_as_image():
    src = AmbientSpace.projective(["s", "t"])
    tgt = AmbientSpace.projective(["x0", "x1", "x2", "x3"])
    S = src.ring
    img = scheme_image({"x0": S("s^3"), "x1": S("s^2*t"), "x2": S("s*t^2"), "x3": S("t^3")}, src.whole(), tgt)
    assert img.dimension() == 1 and img.degree() == 3
    assert len(img.ideal.groebner()) == 3


def test_singular_locus_of_cone_and_smooth_conic():
    A3 = AmbientSpace.affine(["x", "y", "z"])
    R = A3.ring
    cone = singular_locus(A3.subscheme([R("x^2 + y^2 - z^2")]))
    assert cone.ideal.equals(Ideal(R, [R("x"), R("y"), R("z")]))
    P2 = AmbientSpace.projective(["x", "y", "z"])
    Q = P2.ring
    assert singular_locus(P2.subscheme([Q("x*y - z^2")])).is_empty()
    node = singular_locus(P2.subscheme([Q("y^2*z - x^3 - x^2*z")]))
    assert node.dimension() == 0 and node.degree() == 1
    assert radical_contains(node.ideal, Q("x")) and radical_contains(node.ideal, Q("y"))


def test_charts_and_closure_recover_the_ideal():
    P2 = AmbientSpace.projective(["x", "y", "z"])
    R = P2.ring
    Z = P2.subscheme([R("x*z - y^2")])
    cs = charts(Z)
    assert [c.label for c in cs] == ["x=1", "y=1", "z=1"]
    for c in cs:
        assert c.closure().equals(Z.saturate().ideal)
    C = cs[2].ring
    assert cs[2].ideal.equals(Ideal(C, [C("x - y^2")]))


def test_cartier_verdicts():
    amb = plane_product()
    R = amb.ring
    # identity vs swap: the equality locus on the base plane is u = v together with (u + v, w) points
    base = AmbientSpace.projective(["u", "v", "w"])
    B = base.ring
    Z = base.subscheme([B("u^2 - v^2"), B("w*u - w*v")])
    verdict = is_effective_cartier_divisor(Z)
    assert verdict.verdict == "not_cartier"
    assert any(not c["principal"] for c in verdict.charts)
    assert is_effective_cartier_divisor(base.subscheme([B("u")])).verdict == "cartier"
    assert is_effective_cartier_divisor(base.subscheme([B("u*v - w^2")])).verdict == "cartier"
    assert is_effective_cartier_divisor(base.whole()).verdict == "not_cartier"
    assert is_effective_cartier_divisor(base.subscheme([B("u"), B("v"), B("w")])).verdict == "cartier"
    X = amb.subscheme([R("x0")])
    assert is_effective_cartier_divisor(amb.subscheme([R("x0"), R("u")]), X).verdict == "unsupported"


def test_cartier_rejects_mismatched_ambient():
    a = AmbientSpace.projective(["u", "v"])
    b = AmbientSpace.projective(["s", "t"])
    with pytest.raises(GeometryError):
        is_effective_cartier_divisor(a.subscheme([a.ring("u")]), b.whole())


def test_containment_and_intersection():
    P2 = AmbientSpace.projective(["x", "y", "z"])
    R = P2.ring
    line = P2.subscheme([R("x")])
    point = P2.subscheme([R("x"), R("y")])
    assert line.contains(point) and not point.contains(line)
    meet = line.intersect(P2.subscheme([R("y")]))
    assert meet.equals(point)
    assert isinstance(meet, Subscheme)
