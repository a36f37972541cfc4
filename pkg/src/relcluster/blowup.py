"""Blow-ups presented by Rees ideals.

For X = V(J) and a centre (f_0, ..., f_k), the blow-up lives in
X x P^k with fibre coordinates y_0..y_k.  Its ideal is the kernel of
y_j -> t*f_j, obtained by eliminating t from J + (y_j - t*f_j) and then
saturating by the centre.  On a non-domain this is the saturated Rees
presentation, which is the convention used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .geom import AmbientSpace, GeometryError, Subscheme, saturate_irrelevant, scheme_image
from .groebner import Ideal, MonomialOrder, saturation
from .poly import Block, Polynomial, PolyRing, format_grouped, gcd


class BlowupError(GeometryError):
    pass


class InfinitelyNearError(BlowupError):
    """The section's image lies inside the centre, so it has no strict transform."""


class LiftError(BlowupError):
    pass


@dataclass
class BlowupChart:
    index: int
    variable: str           # the fibre coordinate set to 1
    ring: PolyRing
    ideal: Ideal
    exceptional_generator: Polynomial

    @property
    def exceptional(self) -> Ideal:
        return Ideal(self.ring, self.ideal.generators + (self.exceptional_generator,))


@dataclass
class BlowupResult:
    source: Subscheme
    centre: tuple               # generators f_j, in the source ring
    names: tuple                # fibre coordinates y_j
    ambient: AmbientSpace       # source ambient x P^k
    rees_ideal: Ideal
    charts: tuple
    saturation_exponent: int

    def total_space(self) -> Subscheme:
        return Subscheme(self.ambient, self.rees_ideal, saturated=False)

    def centre_ideal(self) -> Ideal:
        return Ideal(self.source.ring, self.centre)

    def koszul_relations(self) -> list:
        """y_j*f_i - y_i*f_j for i < j, in the blown-up ring."""
        R = self.ambient.ring
        f = [R.convert(g) for g in self.centre]
        y = [R.gen(n) for n in self.names]
        return [y[j] * f[i] - y[i] * f[j] for i in range(len(f)) for j in range(i + 1, len(f))]

    def display_generators(self) -> list:
        """Rees generators collected by fibre coordinates, e.g. ``E1*(a - a2) - E0*(b - b2)``.

        When X's equations and the Koszul relations of the centre already
        generate the Rees ideal, those are shown with the centre as given;
        otherwise the reduced basis for an order with X's coordinates first.
        """
        R = self.ambient.ring
        base = [R.convert(g) for g in self.source.ideal.groebner()]
        kos = self.koszul_relations()
        if Ideal(R, base + kos).equals(self.rees_ideal):
            return [str(g) for g in base] + [_grouped_koszul(self.names, self.centre, i, j)
                                             for i, j in _pairs(len(self.centre))]
        order = MonomialOrder.block(R, [self.source.ring.variables])
        return [format_grouped(g, self.names, order) for g in self.rees_ideal.groebner(order)]

    def chart(self, name_or_index) -> BlowupChart:
        for ch in self.charts:
            if name_or_index in (ch.index, ch.variable):
                return ch
        raise KeyError(name_or_index)


def _pairs(k: int) -> list:
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def _grouped_koszul(names, centre, i, j) -> str:
    return f"{names[j]}*({centre[i]}) - {names[i]}*({centre[j]})"


def default_names(k: int, stem: str = "E") -> tuple:
    return tuple(f"{stem}{j}" for j in range(k))


def rees_ideal(X: Subscheme, centre, names: Sequence[str] | None = None) -> BlowupResult:
    """Blow up X along the ideal generated by ``centre``."""
    ring = X.ring
    gens = list(centre.generators if isinstance(centre, Ideal) else centre)
    gens = [g if isinstance(g, Polynomial) and g.ring == ring else ring(g) for g in gens]
    if names is None:
        names = default_names(len(gens))
    names = tuple(names)
    if len(names) != len(gens):
        raise BlowupError(f"{len(names)} fibre coordinate names for {len(gens)} centre generators")
    kept = [(g, n) for g, n in zip(gens, names) if not X.ideal.contains(g)]
    if not kept:
        raise BlowupError("every centre generator vanishes on X")
    gens = [g for g, _ in kept]
    names = tuple(n for _, n in kept)
    clash = [n for n in names if n in ring]
    if clash:
        raise BlowupError(f"fibre coordinate names clash with ring variables: {clash}")

    rees_ring = PolyRing(ring.variables + names, ring.field, ring.blocks + (Block("projective", names),))
    t = rees_ring.fresh_name("T")
    big = rees_ring.extend([t], front=True)
    T = big.gen(t)
    elim_gens = [big.convert(g) for g in X.ideal.generators]
    elim_gens += [big.gen(n) - T * big.convert(f) for n, f in zip(names, gens)]
    eliminated = Ideal(big, elim_gens).eliminate([t])
    I = Ideal(rees_ring, [rees_ring.convert(g) for g in eliminated.generators])
    centre_big = Ideal(rees_ring, [rees_ring.convert(f) for f in gens])
    I, k = saturation(I, centre_big)

    charts = []
    for i, (n, f) in enumerate(zip(names, gens)):
        others = tuple(m for m in names if m != n)
        blocks = ring.blocks + ((Block("affine", others),) if others else ())
        cring = PolyRing(ring.variables + others, ring.field, blocks)
        cgens = [cring.convert(g.dehomogenize(n)) for g in I.generators]
        fi = cring.convert(f)
        cideal = saturation(Ideal(cring, cgens), Ideal(cring, [fi]))[0]
        charts.append(BlowupChart(i, n, cring, cideal, fi))
    return BlowupResult(X, tuple(gens), names, AmbientSpace(rees_ring), I, tuple(charts), k)


def blowup_of(X: Subscheme, centre, names=None) -> BlowupResult:
    return rees_ideal(X, centre, names)


# ---------------------------------------------------------------------------
# transforms


def _check_inside(b: BlowupResult, Z: Subscheme):
    if Z.ambient != b.source.ambient:
        raise BlowupError("Z does not live in the blown-up space's ambient")
    if not b.source.contains(Z):
        raise BlowupError("Z is not contained in X")


def total_transform(b: BlowupResult, Z: Subscheme) -> list:
    """Per-chart ideals of the pullback of Z."""
    _check_inside(b, Z)
    return [Ideal(ch.ring, ch.ideal.generators + tuple(ch.ring.convert(g) for g in Z.ideal.generators))
            for ch in b.charts]


@dataclass
class StrictTransformChart:
    index: int
    variable: str
    ideal: Ideal
    exponent: int           # power of the exceptional generator divided out


def strict_transform(b: BlowupResult, Z: Subscheme) -> list:
    """Per-chart strict transforms: total transform saturated by the exceptional generator."""
    out = []
    for ch, tot in zip(b.charts, total_transform(b, Z)):
        sat, k = saturation(tot, Ideal(ch.ring, [ch.exceptional_generator]))
        out.append(StrictTransformChart(ch.index, ch.variable, sat, k))
    return out


def global_strict_transform(b: BlowupResult, Z: Subscheme) -> Subscheme:
    """Strict transform of Z as a subscheme of X x P^k (not chart by chart)."""
    _check_inside(b, Z)
    R = b.ambient.ring
    I = Ideal(R, b.rees_ideal.generators + tuple(R.convert(g) for g in Z.ideal.generators))
    I = saturation(I, Ideal(R, [R.convert(f) for f in b.centre]))[0]
    return Subscheme(b.ambient, saturate_irrelevant(I, b.ambient), saturated=True)


# ---------------------------------------------------------------------------
# base change


def _specialize_ideal(I: Ideal, values: Mapping[str, object], ring: PolyRing) -> Ideal:
    mp = {v: ring.gen(v) for v in I.ring.variables if v in ring}
    mp.update({p: ring.field(val) for p, val in values.items()})
    return Ideal(ring, [g.substitute(mp, ring) for g in I.generators])


def _affine_hilbert_function(lms: Iterable[tuple], nvars: int, top: int) -> list:
    """Number of standard monomials of degree <= s for s = 0..top."""
    from .groebner import _series_data

    data = _series_data(list(lms), nvars)
    counts = []
    acc = 0
    for s in range(top + 1):
        acc += data.hilbert_function(s)
        counts.append(acc)
    return counts


def _generic_lms(I: Ideal, params: Sequence[str]) -> list:
    """Leading monomials over the fraction field of the parameters."""
    ring = I.ring
    fibre = [v for v in ring.variables if v not in params]
    order = MonomialOrder.block(ring, [fibre])
    ix = [ring.index(v) for v in fibre]
    return [tuple(m[i] for i in ix) for m in I.leading_monomials(order)]


@dataclass
class CommutationResult:
    verdict: str                # "true" | "false" | "inconclusive"
    charts: list = field(default_factory=list)
    flatness_proxy: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.verdict == "true"


def base_change_commutation_check(X: Subscheme, centre, params: Sequence[str], values: Mapping[str, object],
                                  names: Sequence[str] | None = None, proxy_degree: int = 6) -> CommutationResult:
    """Compare blow-up-then-specialize with specialize-then-blow-up, chart by chart.

    Flatness of the centre over the parameters is only probed: the affine
    Hilbert functions (degrees <= ``proxy_degree``) of X and of the centre
    on X must agree generically and at the specialization, otherwise the
    result is ``inconclusive``.
    """
    ring = X.ring
    params = tuple(params)
    if set(values) != set(params):
        raise BlowupError("specialization must assign every parameter")
    gens = list(centre.generators if isinstance(centre, Ideal) else centre)
    gens = [g if isinstance(g, Polynomial) else ring(g) for g in gens]
    names = tuple(names) if names is not None else default_names(len(gens))
    sring = ring.without(params)
    sX_ideal = _specialize_ideal(X.ideal, values, sring)
    s_centre = [_specialize_ideal(Ideal(ring, [g]), values, sring).generators for g in gens]

    proxy = {}
    n_fibre = sring.nvars
    for label, I in (("X", X.ideal), ("centre", X.ideal + Ideal(ring, gens))):
        gen_hf = _affine_hilbert_function(_generic_lms(I, params), n_fibre, proxy_degree)
        sI = _specialize_ideal(I, values, sring)
        spec_hf = _affine_hilbert_function(sI.leading_monomials(MonomialOrder.grevlex()), n_fibre, proxy_degree)
        proxy[label] = {"generic": gen_hf, "special": spec_hf, "agree": gen_hf == spec_hf}
    if not all(p["agree"] for p in proxy.values()):
        return CommutationResult("inconclusive", [], proxy, "flatness proxy failed: Hilbert functions differ")
    if any(not g for g in s_centre):
        return CommutationResult("inconclusive", [], proxy, "a centre generator vanishes after specialization")

    generic = rees_ideal(X, gens, names)
    sX = Subscheme(AmbientSpace(sring), sX_ideal)
    special = rees_ideal(sX, [g[0] for g in s_centre], names)
    if generic.names != special.names:
        return CommutationResult("inconclusive", [], proxy, "a centre generator became zero on the special fibre")
    charts = []
    for gch, sch in zip(generic.charts, special.charts):
        spec_g = _specialize_ideal(gch.ideal, values, sch.ring)
        same = spec_g.equals(sch.ideal)
        charts.append({"chart": gch.variable, "equal": same,
                       "basis": [str(g) for g in sch.ideal.groebner()]})
    verdict = "true" if all(c["equal"] for c in charts) else "false"
    return CommutationResult(verdict, charts, proxy, "")


# ---------------------------------------------------------------------------
# lifting sections


@dataclass
class LiftedSection:
    coordinates: dict               # variable of the blown-up ring -> polynomial on the base
    ratio_forms: list               # certified tuples for the fibre coordinates
    cross_relations: list           # r_a*s_b - r_b*s_a, all in the base ideal
    undefined_locus: Ideal          # where no certified form is defined
    chart_hits: list
    graph_certified: bool | None
    notes: list = field(default_factory=list)

    @property
    def defined_everywhere(self) -> bool:
        return self.undefined_locus.is_unit()

    def as_dict(self) -> dict:
        return {
            "coordinates": {k: str(v) for k, v in self.coordinates.items()},
            "ratio_forms": [[str(x) for x in r] for r in self.ratio_forms],
            "cross_relations": [str(c) for c in self.cross_relations],
            "undefined_locus": str(self.undefined_locus),
            "chart_hits": self.chart_hits,
            "graph_certified": self.graph_certified,
            "notes": list(self.notes),
        }


def _scale_free(vec: list) -> tuple:
    """Normalize a vector of polynomials up to a scalar, for deduplication."""
    for v in vec:
        if v:
            lc = v.leading_coefficient()
            return tuple(str(w / lc) for w in vec)
    return tuple("0" for _ in vec)


def lift_section(b: BlowupResult, section: Mapping[str, Polynomial], base: Subscheme,
                 certify_graph: bool = True) -> LiftedSection:
    """Lift a section of X -> B whose image is not inside the centre.

    The fibre coordinates of the lift are ratios [g_0 : ... : g_k] of the
    centre generators pulled back along the section (with common factors
    removed), plus, for a projective base block, the coefficient vectors of
    those pullbacks.  Each candidate is certified by substituting into every
    Rees generator modulo the base ideal.
    """
    bring = base.ring
    bideal = base.ideal
    X = b.source
    coords = {}
    for v in X.ring.variables:
        if v not in section:
            raise LiftError(f"section gives no coordinate for {v!r}")
        f = section[v]
        coords[v] = f if isinstance(f, Polynomial) and f.ring == bring else bring(f)

    def reduce(f):
        return bideal.reduce(f) if bideal.generators else f

    g = [reduce(f.substitute(coords, bring)) for f in b.centre]
    if not any(g):
        raise InfinitelyNearError("section image is contained in the centre")

    candidates = []
    if not bideal.generators:
        nz = [x for x in g if x]
        h = nz[0]
        for x in nz[1:]:
            h = gcd(h, x)
        candidates.append([x.__class__(bring, {}) if not x else _div(x, h) for x in g])
    else:
        candidates.append(list(g))
    for blk in base.ambient.projective_blocks:
        degs = set()
        for x in g:
            if x:
                degs |= x.block_degrees(blk)
        if len(degs) != 1:
            continue
        parts = [x.coefficients_in(blk) if x else {} for x in g]
        monos = sorted({m for p in parts for m in p}, reverse=True)
        for m in monos:
            vec = [reduce(p.get(m, bring.zero())) for p in parts]
            if any(vec):
                candidates.append(vec)

    full_ring = b.ambient.ring
    certified = []
    seen = set()
    notes = []
    for vec in candidates:
        key = _scale_free(vec)
        if key in seen:
            continue
        seen.add(key)
        mp = dict(coords)
        mp.update({n: r for n, r in zip(b.names, vec)})
        ok = all(not reduce(G.substitute(mp, bring)) for G in b.rees_ideal.generators)
        if ok:
            certified.append(vec)
    if not certified:
        raise LiftError("no candidate satisfies the blow-up equations; the strict transform is not a graph")

    cross = []
    for i in range(len(certified)):
        for j in range(i + 1, len(certified)):
            r, s = certified[i], certified[j]
            for a in range(len(r)):
                for c in range(a + 1, len(r)):
                    rel = r[a] * s[c] - r[c] * s[a]
                    if rel:
                        cross.append(rel)
                    if reduce(rel):
                        raise LiftError("certified ratio forms disagree on the base")

    undefined = Ideal(bring, list(bideal.generators) + [x for vec in certified for x in vec if x])
    undefined = saturate_irrelevant(undefined, base.ambient)

    primary = certified[0]
    hits = []
    for ch, r in zip(b.charts, primary):
        entry = {"chart": ch.variable, "generic": bool(r)}
        if r:
            miss = saturate_irrelevant(Ideal(bring, list(bideal.generators) + [r]), base.ambient)
            entry["leaves_chart_on"] = str(miss)
        hits.append(entry)

    out_coords = dict(coords)
    out_coords.update({n: r for n, r in zip(b.names, primary)})

    graph_ok = None
    if certify_graph and not bideal.generators:
        if not undefined.is_unit():
            notes.append("lift is undefined on part of the base; graph not certified")
            graph_ok = False
        else:
            img_tau = scheme_image(coords, base, X.ambient)
            strict = global_strict_transform(b, img_tau)
            lifted = scheme_image(out_coords, base, b.ambient)
            graph_ok = strict.equals(lifted)
            if not graph_ok:
                notes.append("strict transform of the section image has an extra (vertical) component")
    return LiftedSection(out_coords, certified, cross, undefined, hits, graph_ok, notes)


def _div(f: Polynomial, h: Polynomial) -> Polynomial:
    from .poly import divide_exact
    return divide_exact(f, h)
