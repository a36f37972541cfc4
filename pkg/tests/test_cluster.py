import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from relcluster.cluster import (Family, FamilyError, Lift, Section, SectionError, analyze_pair, build_cluster,
                                hirzebruch_intersection, hirzebruch_is_section_class, intersection_scheme,
                                parametrized_pairs, stratify_pairs)
from relcluster.geom import AmbientSpace
from relcluster.repro import (line_section, plane_family, plane_section, quadric_surface_family, quadric_value,
                              random_binary_section, sample_off_quadric, sample_on_quadric, trivial_ruled_family)

from conftest import to_sympy


def test_family_validation():
    tot = AmbientSpace.product(("P", ["x", "y"]), ("P", ["u", "v"]))
    base = AmbientSpace.projective(["u", "v"])
    with pytest.raises(FamilyError):
        Family(tot.whole(), base, {"u": "u"})
    with pytest.raises(FamilyError):
        Family(tot.whole(), base, {"u": "u", "v": "v^2"})
    with pytest.raises(FamilyError):
        Family(tot.whole(), base, {"u": "u*x", "v": "v*x"})
    fam = Family(tot.whole(), base, {"u": "u", "v": "v"}, {"flat": False})
    assert fam.header()["assumptions"]["flat"] is False


def test_section_validation():
    fam = trivial_ruled_family("P1")
    with pytest.raises(SectionError):
        Section(fam, {"x0": "u", "x1": "v", "u": "u"})
    with pytest.raises(SectionError):
        Section(fam, {"x0": "u", "x1": "v^2", "u": "u", "v": "v"})
    with pytest.raises(SectionError):
        Section(fam, {"x0": "u", "x1": "0", "u": "u", "v": "v"}, "zero")
    with pytest.raises(SectionError):
        Section(fam, {"x0": "1", "x1": "1", "u": "v", "v": "u"})
    with pytest.raises(SectionError):
        Section(fam, {"x0": "1", "x1": "1", "u": "u", "v": "v", "w": "0"})
    S = quadric_surface_family()
    with pytest.raises(SectionError):
        Section(S, {"x": "v", "y": "u", "z": "0", "t": "0", "u": "u", "v": "v"})


def test_intersection_is_symmetric_and_detects_the_diagonal():
    fam = plane_family()
    s = plane_section(fam, ["u", "v", "w"], "id")
    t = plane_section(fam, ["v", "u", "w"], "swap")
    assert intersection_scheme(s, t).equals(intersection_scheme(t, s))
    pa = analyze_pair(s, plane_section(fam, ["2*u", "2*v", "2*w"], "scaled"))
    assert pa.verdict == "diagonal"


def test_swap_pair_is_not_admissible():
    fam = plane_family()
    pa = analyze_pair(plane_section(fam, ["u", "v", "w"]), plane_section(fam, ["v", "u", "w"]))
    assert pa.verdict == "not_admissible"
    assert pa.dimension == 1
    assert any(not c["principal"] for c in pa.certificate["charts"])


def test_constant_pairs_are_admissible_and_a_line_pair_is_not():
    fam = plane_family()
    pa = analyze_pair(plane_section(fam, [1, 0, 0]), plane_section(fam, [0, 1, 0]))
    assert pa.verdict == "admissible" and pa.dimension == -1
    pa = analyze_pair(plane_section(fam, ["u", "v", "w"]), plane_section(fam, [1, 0, 0]))
    assert pa.verdict == "not_admissible" and pa.dimension == 0


def _degree_by_gcd_of_minors(s, t):
    """Number of points (with multiplicity) where two sections over P^1 agree."""
    fibre = [v for v in s.family.total.ring.variables if v not in ("u", "v")]
    u, v = sympy.symbols("u v")
    minors = []
    for i, a in enumerate(fibre):
        for b in fibre[i + 1:]:
            minors.append(sympy.expand(to_sympy(s.coordinates[a]) * to_sympy(t.coordinates[b])
                                       - to_sympy(s.coordinates[b]) * to_sympy(t.coordinates[a])))
    g = 0
    for m in minors:
        g = sympy.gcd(g, m)
    if g == 0:
        return None
    return sympy.Poly(g, u, v).total_degree()


@pytest.mark.parametrize("seed", range(10))
def test_curve_base_pairs_are_admissible_with_gcd_degree(seed):
    rng = random.Random(seed)
    fam = trivial_ruled_family()
    s = random_binary_section(fam, rng, rng.randint(0, 2), "s")
    t = random_binary_section(fam, rng, rng.randint(0, 2), "t")
    pa = analyze_pair(s, t)
    expected = _degree_by_gcd_of_minors(s, t)
    if expected is None:
        assert pa.verdict == "diagonal"
        return
    assert pa.verdict == "admissible"
    assert (pa.degree if pa.dimension == 0 else 0) == expected


def test_cluster_with_infinitely_near_step():
    fam = plane_family()
    base = {"u": "u", "v": "v", "w": "w"}
    spec = build_cluster(fam, [("c", {"x0": 1, "x1": 2, "x2": 3, **base}),
                               ("e", {"x0": 1, "x1": 2, "x2": 3, **base, "E0_0": 1, "E0_1": -1})])
    assert [s.infinitely_near for s in spec.steps] == [False, True]
    assert spec.order == 1
    spec = build_cluster(fam, [("c", {"x0": 1, "x1": 2, "x2": 3, **base}),
                               ("d", {"x0": 1, "x1": 0, "x2": 0, **base, "E0_0": 1, "E0_1": 0})])
    assert [s.infinitely_near for s in spec.steps] == [False, False]


def test_single_section_cluster():
    fam = plane_family()
    spec = build_cluster(fam, [{"x0": 1, "x1": 0, "x2": 0, "u": "u", "v": "v", "w": "w"}])
    assert spec.order == 0 and spec.steps[0].blowup is None


def test_cluster_lift_on_the_quadric():
    fam = quadric_surface_family()
    p, q = (0, 0, 0, 0), (1, 0, 0, 1)
    assert quadric_value(p, q) != 0
    s0 = line_section(fam, p, "L")
    s1 = line_section(fam, q, "M")
    spec = build_cluster(fam, [s0, Lift(s1.coordinates, "M")])
    step = spec.steps[1]
    assert not step.infinitely_near
    assert step.lift is not None and step.lift.graph_certified
    with pytest.raises(SectionError):
        build_cluster(fam, [Lift(s1.coordinates, "M")])


def test_stratify_quadric_pairs_by_the_quadric():
    rng = random.Random(5)
    fam = quadric_surface_family()
    items = [sample_on_quadric(rng) for _ in range(20)] + [sample_off_quadric(rng) for _ in range(20)]
    items += [(p, p) for p, _ in items[:10]]
    pairs = [(str(k), line_section(fam, p, "L"), line_section(fam, q, "M")) for k, (p, q) in enumerate(items)]
    report = stratify_pairs(pairs)
    assert len(report.groups) == 3 and not report.errors
    assert report.groups[0].kind == "II"
    for k, (p, q) in enumerate(items):
        pa = report.analyses[k]
        if p == q:
            assert pa.verdict == "diagonal"
        elif quadric_value(p, q) == 0:
            assert (pa.dimension, pa.degree) == (0, 1)
        else:
            assert pa.dimension == -1


def test_parametrized_pairs_collect_errors():
    fam = trivial_ruled_family("P1")
    pairs = parametrized_pairs(fam, {"x0": "u", "x1": "k*v", "u": "u", "v": "v"},
                               {"x0": "1", "x1": "1", "u": "u", "v": "v"}, ["k"], [(1,), (0,), (2,)])
    report = stratify_pairs(pairs)
    assert [e["label"] for e in report.errors] == ["(0)"]
    assert sum(len(g.members) for g in report.groups) == 2


def test_hirzebruch_examples():
    assert hirzebruch_intersection(2, (1, 3), (1, 3)) == 4
    assert hirzebruch_intersection(1, (1, 0), (1, 0)) == -1
    assert not hirzebruch_is_section_class(3, (1, 1))
    assert hirzebruch_is_section_class(3, (1, 0)) and hirzebruch_is_section_class(3, (1, 3))
    assert not hirzebruch_is_section_class(0, (2, 0))
    with pytest.raises(ValueError):
        hirzebruch_intersection(-1, (1, 0), (1, 0))


small = st.integers(-20, 20)
pairs_ = st.tuples(small, small)


@given(st.integers(0, 8), pairs_, pairs_, pairs_, small)
def test_hirzebruch_form_is_symmetric_bilinear(e, a, b, c, k):
    assert hirzebruch_intersection(e, a, b) == hirzebruch_intersection(e, b, a)
    ab = (a[0] + k * b[0], a[1] + k * b[1])
    assert hirzebruch_intersection(e, ab, c) == hirzebruch_intersection(e, a, c) + k * hirzebruch_intersection(e, b, c)
