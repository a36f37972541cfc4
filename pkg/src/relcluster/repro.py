"""Built-in reproductions of three worked examples, as PASS/FAIL checks.

ex1: Hirzebruch surfaces F_e and sections of a ruled surface over P^1.
ex2: the trivial family P^2 x P^2 -> P^2 and which section pairs are admissible.
ex3: lines on the quadric surface xv = yu in P^3 x P^1 and the quadric
     Y = (a-a2)(d-d2) - (b-b2)(c-c2) in A^8 that parametrizes meeting pairs.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .blowup import global_strict_transform, lift_section, rees_ideal, strict_transform
from .cluster import (Family, Section, analyze_pair, build_cluster, hirzebruch_intersection,
                      hirzebruch_is_section_class, intersection_scheme)
from .geom import AmbientSpace, Subscheme, saturate_irrelevant, singular_locus
from .groebner import Ideal, radical_contains
from .poly import monomials_of_degree

DEFAULT_SEED = 20240611


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def as_dict(self, timings: bool = False) -> dict:
        d = {"check": self.name, "status": "PASS" if self.passed else "FAIL", "detail": self.detail}
        if timings:
            d["seconds"] = round(self.seconds, 4)
        return d


def _run(name: str, fn: Callable[[], tuple]) -> Check:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:           # a crash is a failed check, reported as such
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# ex1: ruled surfaces over P^1 and Hirzebruch numerics


def hirzebruch_grid(emax: int = 5, bound: int = 5):
    for e in range(emax + 1):
        for n in range(-bound, bound + 1):
            for m in range(-bound, bound + 1):
                yield e, n, m


def _section_class_by_enumeration(e: int, n: int, m: int) -> bool:
    """Section classes from intersection numbers alone: D.F = 1, and D is
    either C or an irreducible curve other than C, which meets C
    non-negatively."""
    if hirzebruch_intersection(e, (n, m), (0, 1)) != 1:
        return False
    if (n, m) == (1, 0):
        return True
    return hirzebruch_intersection(e, (n, m), (1, 0)) >= 0


def trivial_ruled_family(fibre: str = "P2") -> Family:
    """P^1 x P^k -> P^1 with base coordinates (u, v)."""
    names = ["x0", "x1", "x2"] if fibre == "P2" else ["x0", "x1"]
    tot = AmbientSpace.product(("P", names), ("P", ["u", "v"]))
    return Family(tot.whole(), AmbientSpace.projective(["u", "v"]), {"u": "u", "v": "v"})


def random_binary_section(fam: Family, rng: random.Random, degree: int, name: str) -> Section:
    """A section of P^1 x P^k -> P^1 given by random binary forms of one degree."""
    ring = fam.base_ring
    fibre = [v for v in fam.total.ring.variables if v not in ("u", "v")]
    while True:
        coords = {"u": ring.gen("u"), "v": ring.gen("v")}
        for x in fibre:
            f = ring.zero()
            for e in monomials_of_degree(2, degree):
                c = rng.randint(-3, 3)
                if c:
                    f = f + c * ring.gen("u") ** e[0] * ring.gen("v") ** e[1]
            coords[x] = f
        try:
            return Section(fam, coords, name)
        except ValueError:
            continue


def ex1_checks(seed: int = DEFAULT_SEED) -> list:
    def numerics():
        bad = []
        for e in range(6):
            C, F = (1, 0), (0, 1)
            if hirzebruch_intersection(e, C, C) != -e or hirzebruch_intersection(e, F, F) != 0 \
                    or hirzebruch_intersection(e, C, F) != 1:
                bad.append(e)
        for e, n, m in hirzebruch_grid():
            if (hirzebruch_intersection(e, (n, m), (0, 1)) == 1) != (n == 1):
                bad.append((e, n, m))
        return not bad, f"C^2=-e, F^2=0, C.F=1 and D.F=n on e<=5, |n|,|m|<=5; mismatches: {bad[:5]}"

    def sections():
        bad = [(e, n, m) for e, n, m in hirzebruch_grid()
               if hirzebruch_is_section_class(e, (n, m)) != _section_class_by_enumeration(e, n, m)]
        return not bad, f"section classes n=1 and (m=0 or m>=e); mismatches: {bad[:5]}"

    def curve_base():
        rng = random.Random(seed)
        fam = trivial_ruled_family()
        verdicts = []
        for k in range(12):
            s = random_binary_section(fam, rng, rng.randint(0, 2), f"s{k}")
            t = random_binary_section(fam, rng, rng.randint(0, 2), f"t{k}")
            pa = analyze_pair(s, t)
            verdicts.append(pa.verdict)
        ok = all(v == "admissible" for v in verdicts)
        return ok, f"12 random pairs over P^1: {sorted(set(verdicts))}"

    return [_run("hirzebruch intersection numbers", numerics),
            _run("hirzebruch section classes", sections),
            _run("curve base: every distinct pair admissible", curve_base)]


# ---------------------------------------------------------------------------
# ex2: the trivial family P^2 x P^2 -> P^2


def plane_family() -> Family:
    tot = AmbientSpace.product(("P", ["x0", "x1", "x2"]), ("P", ["u", "v", "w"]))
    return Family(tot.whole(), AmbientSpace.projective(["u", "v", "w"]), {"u": "u", "v": "v", "w": "w"})


def plane_section(fam: Family, forms, name: str = "") -> Section:
    coords = dict(zip(["x0", "x1", "x2"], forms))
    coords.update({"u": "u", "v": "v", "w": "w"})
    return Section(fam, coords, name)


def random_plane_section(fam: Family, rng: random.Random, degree: int, name: str) -> Section:
    ring = fam.base_ring
    while True:
        forms = []
        for _ in range(3):
            f = ring.zero()
            for e in monomials_of_degree(3, degree):
                c = rng.randint(-3, 3)
                if c:
                    f = f + c * ring.monomial(e)
            forms.append(f)
        try:
            return plane_section(fam, forms, name)
        except ValueError:
            continue


def ex2_pairs(seed: int = DEFAULT_SEED, count: int = 20) -> list:
    """Seeded non-constant pairs of degree <= 2 whose images meet but differ."""
    rng = random.Random(seed)
    fam = plane_family()
    out = []
    k = 0
    while len(out) < count:
        s = random_plane_section(fam, rng, rng.randint(1, 2), f"s{k}")
        t = random_plane_section(fam, rng, rng.randint(0, 2), f"t{k}")
        k += 1
        Z = intersection_scheme(s, t)
        if Z.ideal.is_zero() or Z.is_empty():
            continue
        out.append((s, t))
    return out


def ex2_constant_pairs(seed: int = DEFAULT_SEED, count: int = 10) -> list:
    rng = random.Random(seed + 1)
    fam = plane_family()
    out = []
    while len(out) < count:
        p = [rng.randint(-4, 4) for _ in range(3)]
        q = [rng.randint(-4, 4) for _ in range(3)]
        if not any(p) or not any(q):
            continue
        if all(p[i] * q[j] == p[j] * q[i] for i in range(3) for j in range(3)):
            continue
        out.append((plane_section(fam, p, f"c{p}"), plane_section(fam, q, f"c{q}")))
    return out


def ex2_checks(seed: int = DEFAULT_SEED) -> list:
    fam = plane_family()

    def swap():
        s = plane_section(fam, ["u", "v", "w"], "identity")
        t = plane_section(fam, ["v", "u", "w"], "swap")
        pa = analyze_pair(s, t)
        non_principal = [c for c in pa.certificate.get("charts", []) if not c["principal"]]
        expected = Ideal(fam.base_ring, [fam.base_ring("u^2 - v^2"), fam.base_ring("w*(u - v)")])
        ok = pa.verdict == "not_admissible" and non_principal and pa.intersection.ideal.equals(expected)
        return ok, f"identity vs swap: {pa.verdict}, intersection ({pa.intersection.ideal}), " \
                   f"non-principal on {[c['chart'] for c in non_principal]}"

    def constants():
        verdicts = [analyze_pair(s, t).verdict for s, t in ex2_constant_pairs(seed)]
        return all(v == "admissible" for v in verdicts), f"10 distinct constant pairs: {sorted(set(verdicts))}"

    def grid():
        verdicts = [analyze_pair(s, t).verdict for s, t in ex2_pairs(seed)]
        return all(v == "not_admissible" for v in verdicts), \
            f"20 meeting non-constant pairs of degree <= 2: {sorted(set(verdicts))}"

    def cluster():
        spec = build_cluster(fam, [("c", {"x0": 1, "x1": 2, "x2": 3, "u": "u", "v": "v", "w": "w"}),
                                   ("e", {"x0": 1, "x1": 2, "x2": 3, "u": "u", "v": "v", "w": "w",
                                          "E0_0": 1, "E0_1": -1})])
        flags = [s.infinitely_near for s in spec.steps]
        return flags == [False, True], f"constant section then a constant section of the exceptional " \
                                       f"P^1 x P^2: infinitely near flags {flags}"

    return [_run("identity vs swap is not admissible", swap),
            _run("distinct constant pairs are admissible", constants),
            _run("non-constant meeting pairs are not admissible", grid),
            _run("constant cluster with an infinitely near step", cluster)]


# ---------------------------------------------------------------------------
# ex3: lines on a quadric surface and the parameter quadric Y

PARAMS = ("a", "b", "c", "d")
PRIMED = ("a2", "b2", "c2", "d2")
QUADRIC = "(a - a2)*(d - d2) - (b - b2)*(c - c2)"
DIAGONAL = ("a - a2", "b - b2", "c - c2", "d - d2")


def quadric_surface_family() -> Family:
    """S = V(xv - yu) in P^3 x P^1, fibred over P^1 by (u, v)."""
    tot = AmbientSpace.product(("P", ["x", "y", "z", "t"]), ("P", ["u", "v"]))
    return Family(tot.subscheme([tot.ring("x*v - y*u")]), AmbientSpace.projective(["u", "v"]), {"u": "u", "v": "v"})


def line_section(fam: Family, p, name: str = "") -> Section:
    """u -> (u, v, -a u - b v, -c u - d v): the line through [u:v:0:0] cut by the plane pair p."""
    a, b, c, d = (Fraction(x) for x in p)
    R = fam.base_ring
    u, v = R.gen("u"), R.gen("v")
    coords = {"x": u, "y": v, "z": -a * u - b * v, "t": -c * u - d * v, "u": u, "v": v}
    return Section(fam, coords, name)


def line_centre(fam: Family, p) -> list:
    a, b, c, d = (Fraction(x) for x in p)
    R = fam.total.ring
    x, y, z, t = (R.gen(n) for n in "xyzt")
    return [a * x + b * y + z, c * x + d * y + t]


def quadric_value(p, q) -> Fraction:
    a, b, c, d = (Fraction(x) for x in p)
    a2, b2, c2, d2 = (Fraction(x) for x in q)
    return (a - a2) * (d - d2) - (b - b2) * (c - c2)


def sample_on_quadric(rng: random.Random, bound: int = 5) -> tuple:
    """A pair (p, q) with p != q on the quadric, solving for the last entry of q."""
    while True:
        p = tuple(Fraction(rng.randint(-bound, bound)) for _ in range(4))
        a2, b2, c2 = (Fraction(rng.randint(-bound, bound)) for _ in range(3))
        if a2 == p[0]:
            continue
        d2 = p[3] - (p[1] - b2) * (p[2] - c2) / (p[0] - a2)
        q = (a2, b2, c2, d2)
        if q != p:
            return p, q


def sample_off_quadric(rng: random.Random, bound: int = 5) -> tuple:
    while True:
        p = tuple(Fraction(rng.randint(-bound, bound)) for _ in range(4))
        q = tuple(Fraction(rng.randint(-bound, bound)) for _ in range(4))
        if quadric_value(p, q):
            return p, q


def parameter_space() -> AmbientSpace:
    return AmbientSpace.affine(list(PARAMS + PRIMED))


def quadric_blowup(centre=("a - a2", "b - b2"), names=("E0", "E1")):
    A = parameter_space()
    R = A.ring
    return rees_ideal(A.whole(), [R(f) for f in centre], names)


def quadric_subscheme() -> Subscheme:
    A = parameter_space()
    return A.subscheme([A.ring(QUADRIC)])


def quadric_fibre(b, p, q) -> Ideal:
    """Fibre of the strict transform of Y over the point (p, q), as an ideal on P^1."""
    Yt = global_strict_transform(b, quadric_subscheme())
    R = b.ambient.ring
    fibre = AmbientSpace.projective(list(b.names))
    F = fibre.ring
    values = dict(zip(PARAMS + PRIMED, list(p) + list(q)))
    mp = {n: F.gen(n) for n in b.names}
    mp.update({k: F.field(v) for k, v in values.items()})
    I = Ideal(F, [g.substitute(mp, F) for g in Yt.ideal.generators])
    return saturate_irrelevant(I, fibre)


def pointwise_lift(b, p, q) -> tuple:
    """Expected point of the fibre: the centre evaluated at (p, q), or the
    companion ratio from the quadric's other ruling when that vanishes."""
    values = dict(zip(PARAMS + PRIMED, list(p) + list(q)))
    A = parameter_space()
    vals = [f.evaluate(values) for f in b.centre]
    if any(vals):
        return tuple(vals)
    # (a-a2, b-b2) and (c-c2, d-d2) are proportional on Y; so are (a-a2, c-c2) and (b-b2, d-d2)
    partner = {("a - a2", "b - b2"): ("c - c2", "d - d2"), ("c - c2", "d - d2"): ("a - a2", "b - b2"),
               ("a - a2", "c - c2"): ("b - b2", "d - d2"), ("b - b2", "d - d2"): ("a - a2", "c - c2")}
    key = tuple(str(f) for f in b.centre)
    return tuple(A.ring(f).evaluate(values) for f in partner[key])


def fibre_is_point(I: Ideal, point) -> bool:
    F = I.ring
    fibre = AmbientSpace(F)
    Z = Subscheme(fibre, I, saturated=True)
    if Z.is_empty() or Z.dimension() != 0 or Z.degree() != 1:
        return False
    e0, e1 = F.variables
    return I.contains(point[1] * F.gen(e0) - point[0] * F.gen(e1))


def symbolic_line_lift(base_ideal=(QUADRIC,)):
    """Lift of L_(a2,b2,c2,d2) through the blow-up of S x A^4 along L_(a,b,c,d)."""
    tot = AmbientSpace.product(("A", list(PARAMS)), ("P", ["x", "y", "z", "t"]), ("P", ["u", "v"]))
    S = tot.subscheme([tot.ring("x*v - y*u")])
    R = tot.ring
    b = rees_ideal(S, [R("a*x + b*y + z"), R("c*x + d*y + t")], ["nu", "mu"])
    bamb = AmbientSpace.product(("A", list(PARAMS + PRIMED)), ("P", ["u", "v"]))
    BR = bamb.ring
    base = bamb.subscheme([BR(g) for g in base_ideal])
    sec = {v: BR(v) for v in PARAMS + ("u", "v")}
    sec.update({"x": BR("u"), "y": BR("v"), "z": BR("-a2*u - b2*v"), "t": BR("-c2*u - d2*v")})
    return b, lift_section(b, sec, base, certify_graph=False), base


def ex3_checks(seed: int = DEFAULT_SEED, samples: int = 20) -> list:
    rng = random.Random(seed)
    on = [sample_on_quadric(rng) for _ in range(samples)]
    off = [sample_off_quadric(rng) for _ in range(samples)]
    fam = quadric_surface_family()

    def equation():
        b = quadric_blowup()
        gens = b.display_generators()
        return gens == ["E1*(a - a2) - E0*(b - b2)"], f"blow-up of A^8 along (a - a2, b - b2): {gens}"

    def singular():
        Y = quadric_subscheme()
        S = singular_locus(Y)
        R = Y.ring
        D = Ideal(R, [R(f) for f in DIAGONAL])
        ok = all(radical_contains(S.ideal, g) for g in D.generators) and \
            all(radical_contains(D, g) for g in S.ideal.generators)
        return ok, f"singular locus of Y: ({S.ideal})"

    def simple_points():
        degs = []
        for p, q in on:
            Z = intersection_scheme(line_section(fam, p, "L"), line_section(fam, q, "L2"))
            degs.append((Z.dimension(), Z.degree()))
        empties = [intersection_scheme(line_section(fam, p), line_section(fam, q)).is_empty() for p, q in off]
        ok = all(d == (0, 1) for d in degs) and all(empties)
        return ok, f"{samples} pairs on Y minus the diagonal meet in {sorted(set(degs))}; " \
                   f"{sum(empties)}/{samples} pairs off Y are disjoint"

    def strict():
        b = quadric_blowup()
        chart = b.chart("E1")
        st = [c for c in strict_transform(b, quadric_subscheme()) if c.variable == "E1"][0]
        R = chart.ring
        members = [R("(a - a2) - E0*(b - b2)"), R("E0*(d - d2) - (c - c2)")]
        ok = all(st.ideal.contains(m) for m in members)
        return ok, "chart E1 = 1 of the strict transform contains (a - a2) - E0*(b - b2), E0*(d - d2) - (c - c2)"

    def lift():
        _, L, base = symbolic_line_lift()
        R = base.ring
        cross = Ideal(R, L.cross_relations)
        forms = [[str(x) for x in r] for r in L.ratio_forms]
        ok = cross.contains(R(QUADRIC)) and len(L.ratio_forms) >= 2
        return ok, f"certified ratio forms on Y: {forms}; Y lies in the cross-relation ideal"

    def alternative_centre():
        results = []
        for centre in (("a - a2", "b - b2"), ("c - c2", "d - d2")):
            b = quadric_blowup(centre)
            good = sum(fibre_is_point(quadric_fibre(b, p, q), pointwise_lift(b, p, q)) for p, q in on[:8])
            results.append(good)
        return all(r == 8 for r in results), \
            f"fibres of the strict transform over 8 sample pairs are the predicted single points: " \
            f"centre (a - a2, b - b2) {results[0]}/8, centre (c - c2, d - d2) {results[1]}/8"

    return [_run("blow-up equation", equation),
            _run("singular locus is the diagonal", singular),
            _run("meeting lines meet at a simple point", simple_points),
            _run("strict transform members", strict),
            _run("lifted ratios agree modulo Y", lift),
            _run("alternative centre gives a certified lift", alternative_centre)]


SUITES = {"ex1": ex1_checks, "ex2": ex2_checks, "ex3": ex3_checks}


def run_repro(example: str, seed: int = DEFAULT_SEED) -> list:
    if example not in SUITES:
        raise KeyError(f"unknown example {example!r}; expected one of {sorted(SUITES)}")
    return SUITES[example](seed)
