"""Execute the queries of a spec document and assemble a report."""
from __future__ import annotations

import hashlib
import random
import time
from fractions import Fraction

from . import __version__
from .blowup import base_change_commutation_check, lift_section, rees_ideal, strict_transform
from .cluster import (Family, Lift, Section, analyze_pair, build_cluster, hirzebruch_intersection,
                      hirzebruch_is_section_class, parametrized_pairs, stratify_pairs)
from .geom import AmbientSpace, Subscheme, is_effective_cartier_divisor, singular_locus
from .groebner import (GroebnerLimitError, Ideal, MonomialOrder, NotHomogeneousError, hilbert,
                       current_limits, is_homogeneous_ideal, krull_dimension, resource_limits, saturation,
                       vector_space_degree)
from .poly import PolynomialError
from .specfile import (AmbientDecl, BlowupDecl, FamilyDecl, IdealDecl, PairsDecl, SectionDecl, SpecDocument,
                       build_ring)

SCHEMA = "relcluster-report/1"


class QueryError(Exception):
    pass


def _strs(polys) -> list:
    return [str(p) for p in polys]


class Workspace:
    """Lazily built engine objects for the declarations of a document."""

    def __init__(self, doc: SpecDocument, seed: int = 0):
        self.doc = doc
        self.seed = seed
        self.decls = doc.declarations()
        self._cache: dict = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def ambient(self, name: str) -> AmbientSpace:
        return self._memo(("ambient", name), lambda: AmbientSpace(build_ring(self.decls[name], self.doc.field)))

    def ideal(self, name: str) -> Ideal:
        d: IdealDecl = self.decls[name]
        ring = self.ambient(d.ambient).ring
        return self._memo(("ideal", name), lambda: Ideal(ring, [ring(g) for g in d.generators]))

    def subscheme(self, name: str) -> Subscheme:
        d = self.decls[name]
        if isinstance(d, AmbientDecl):
            return self.ambient(name).whole()
        if isinstance(d, FamilyDecl):
            return self.family(name).total
        return Subscheme(self.ambient(d.ambient), self.ideal(name))

    def family(self, name: str) -> Family:
        d: FamilyDecl = self.decls[name]

        def make():
            tot = self.ambient(d.total)
            X = Subscheme(tot, self.ideal(d.ideal)) if d.ideal else tot.whole()
            return Family(X, self.ambient(d.base), {v: tot.ring(p) for v, p in d.projection}, d.assume)
        return self._memo(("family", name), make)

    def section_coords(self, name: str) -> dict:
        d: SectionDecl = self.decls[name]
        ring = self.ambient(self.decls[d.family].base).ring
        return {v: ring(p) for v, p in d.coordinates}

    def section(self, name: str) -> Section:
        d: SectionDecl = self.decls[name]
        return self._memo(("section", name), lambda: Section(self.family(d.family), self.section_coords(name), name))

    def blowup(self, name: str):
        d: BlowupDecl = self.decls[name]
        return self._memo(("blowup", name),
                          lambda: rees_ideal(self.subscheme(d.source), self.ideal(d.centre).generators, d.names))

    def pair_list(self, name: str) -> list:
        d: PairsDecl = self.decls[name]
        fam = self.family(d.family)
        if d.points is not None:
            points = d.points
        else:
            rng = random.Random(self.seed)
            n, bound = d.random
            points = [tuple(Fraction(rng.randint(-bound, bound)) for _ in d.params) for _ in range(n)]
        return parametrized_pairs(fam, dict(d.sigma), dict(d.tau), d.params, points)


# ---------------------------------------------------------------------------
# queries


def _q_gb(ws, a):
    I = ws.ideal(a["ideal"])
    order = MonomialOrder.lex() if a["order"] == "lex" else MonomialOrder.grevlex()
    return {"order": a["order"], "basis": _strs(I.groebner(order))}


def _q_eliminate(ws, a):
    return {"ideal": _strs(ws.ideal(a["ideal"]).eliminate(a["variables"]).groebner())}


def _q_saturate(ws, a):
    J, k = saturation(ws.ideal(a["ideal"]), ws.ideal(a["by"]))
    return {"ideal": _strs(J.groebner()), "exponent": k}


def _q_hilbert(ws, a):
    I = ws.ideal(a["ideal"])
    if is_homogeneous_ideal(I):
        h = hilbert(I)
        return {"graded": True, "hilbert_polynomial": h.format_polynomial("n"), "dimension": h.dimension,
                "degree": h.degree, "numerator": [str(c) for c in h.numerator],
                "krull_dimension": h.krull_dimension}
    k = krull_dimension(I)
    out = {"graded": False, "krull_dimension": k}
    if k == 0:
        out["vector_space_dimension"] = vector_space_degree(I)
    return out


def _q_image(ws, a):
    s = ws.section(a["section"])
    return {"ideal": _strs(s.image().ideal.groebner())}


def _q_singular(ws, a):
    d = ws.decls[a["ideal"]]
    Z = Subscheme(ws.ambient(d.ambient), ws.ideal(a["ideal"]))
    S = singular_locus(Z)
    return {"ideal": _strs(S.ideal.groebner()), "dimension": S.dimension()}


def _q_cartier(ws, a):
    d = ws.decls[a["ideal"]]
    amb = ws.ambient(d.ambient)
    Z = Subscheme(amb, ws.ideal(a["ideal"]))
    X = Subscheme(amb, ws.ideal(a["within"])) if a.get("within") else None
    return is_effective_cartier_divisor(Z, X).as_dict()


def _blowup_dict(b):
    return {
        "centre": _strs(b.centre),
        "fibre_coordinates": list(b.names),
        "rees": b.display_generators(),
        "saturation_exponent": b.saturation_exponent,
        "charts": [{"chart": ch.variable, "ideal": _strs(ch.ideal.groebner()),
                    "exceptional": str(ch.exceptional_generator)} for ch in b.charts],
    }


def _q_blowup(ws, a):
    return _blowup_dict(ws.blowup(a["blowup"]))


def _q_strict(ws, a):
    b = ws.blowup(a["blowup"])
    d = ws.decls[a["ideal"]]
    Z = Subscheme(ws.ambient(d.ambient), ws.ideal(a["ideal"]))
    return {"charts": [{"chart": c.variable, "ideal": _strs(c.ideal.groebner()), "exponent": c.exponent}
                       for c in strict_transform(b, Z)]}


def _q_lift(ws, a):
    b = ws.blowup(a["blowup"])
    s = ws.section(a["section"])
    return lift_section(b, s.coordinates, s.family.base.whole()).as_dict()


def _q_commute(ws, a):
    bd = ws.decls[a["blowup"]]
    X = ws.subscheme(bd.source)
    values = {v: Fraction(x) for v, x in a["values"]}
    res = base_change_commutation_check(X, ws.ideal(bd.centre).generators, list(values), values, bd.names)
    return {"verdict": res.verdict, "reason": res.reason, "charts": res.charts,
            "flatness_proxy": res.flatness_proxy}


def _q_pair(ws, a):
    return analyze_pair(ws.section(a["sigma"]), ws.section(a["tau"])).as_dict()


def _q_cluster(ws, a):
    fam = ws.family(a["family"])
    specs, names, centres = [], [], []
    for st in a["steps"]:
        coords = ws.section_coords(st["section"])
        specs.append(Lift(coords, st["section"]) if st["lift"] else (st["section"], coords))
        names.append(st.get("names"))
        centres.append(ws.ideal(st["centre"]).generators if st.get("centre") else None)
    return build_cluster(fam, specs, names, centres).as_dict()


def _q_stratify(ws, a):
    if a.get("pairs"):
        pairs = ws.pair_list(a["pairs"])
    else:
        pairs = [(lambda s=s, t=t: (f"{s} {t}", ws.section(s), ws.section(t))) for s, t in a["list"]]
    return stratify_pairs(pairs).as_dict()


def _q_hirzebruch(ws, a):
    e = a["e"]
    cls = a["classes"]
    return {
        "e": e,
        "classes": [list(c) for c in cls],
        "intersection_matrix": [[hirzebruch_intersection(e, c, d) for d in cls] for c in cls],
        "section_class": [hirzebruch_is_section_class(e, c) for c in cls],
        "fibre_degree": [hirzebruch_intersection(e, c, (0, 1)) for c in cls],
    }


QUERIES = {
    "gb": _q_gb, "eliminate": _q_eliminate, "saturate": _q_saturate, "hilbert": _q_hilbert,
    "image": _q_image, "singular": _q_singular, "cartier": _q_cartier, "blowup": _q_blowup,
    "strict": _q_strict, "lift": _q_lift, "commute": _q_commute, "pair": _q_pair, "cluster": _q_cluster,
    "stratify": _q_stratify, "hirzebruch": _q_hirzebruch,
}

ENGINE_ERRORS = (QueryError, GroebnerLimitError, NotHomogeneousError, PolynomialError, ArithmeticError,
                 ValueError, KeyError)


def run_document(doc: SpecDocument, source_text: str, seed: int = 0, max_degree: int | None = None,
                 max_pairs: int | None = None, timings: bool = False) -> tuple:
    """Run every query; returns (report dict, number of failed queries)."""
    ws = Workspace(doc, seed)
    results = []
    failed = 0
    families = {}
    for name, d in doc.declarations(FamilyDecl).items():
        families[name] = {k: d.assume.get(k, True) for k in ("flat", "separated", "surjective",
                                                             "generic_fibre_integral")}
    with resource_limits(max_degree=max_degree, max_pairs=max_pairs):
        limits = current_limits()
        for i, q in enumerate(doc.queries):
            entry = {"index": i, "query": q.render(), "kind": q.kind}
            t0 = time.perf_counter()
            try:
                entry["result"] = QUERIES[q.kind](ws, q.args)
                entry["status"] = "ok"
            except ENGINE_ERRORS as exc:
                entry["status"] = "error"
                entry["error"] = f"{type(exc).__name__}: {exc}"
                failed += 1
            if timings:
                entry["seconds"] = round(time.perf_counter() - t0, 6)
            results.append(entry)
    fld = doc.field
    report = {
        "schema": SCHEMA,
        "tool": "relcluster",
        "version": __version__,
        "input_sha256": hashlib.sha256(source_text.encode("utf-8")).hexdigest(),
        "field": {"name": fld.label, "characteristic": fld.p or 0,
                  "note": ("exact; field of definition Q, verdicts over its algebraic closure may differ"
                           if fld.p is None else "heuristic over F_p: results certify only the reduction mod p")},
        "seed": seed,
        "limits": {"max_degree": limits.max_degree, "max_pairs": limits.max_pairs},
        "assumptions": families,
        "results": results,
    }
    return report, failed
