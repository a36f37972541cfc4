"""Families, sections, section pairs and ordered clusters of sections.

A family is a morphism pi: S -> B given by polynomials; a section is a map
B -> S given by polynomials in the base coordinates.  A cluster is built by
repeatedly blowing up the total space along a section's image and choosing
a section of the new family.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .blowup import BlowupResult, lift_section, rees_ideal
from .geom import (AmbientSpace, GeometryError, Subscheme, is_effective_cartier_divisor,
                   saturate_irrelevant, scheme_image)
from .groebner import Ideal
from .poly import Polynomial, PolyRing


class FamilyError(GeometryError):
    pass


class SectionError(GeometryError):
    pass


DEFAULT_ASSUMPTIONS = {"flat": True, "separated": True, "surjective": True, "generic_fibre_integral": True}


def _coerce(ring: PolyRing, f) -> Polynomial:
    if isinstance(f, Polynomial):
        if f.ring == ring:
            return f
        return ring.convert(f)
    return ring(f)


def _nowhere_vanishing(polys: Sequence[Polynomial], ambient: AmbientSpace, extra: Iterable = ()) -> bool:
    I = Ideal(ambient.ring, list(extra) + [p for p in polys])
    return saturate_irrelevant(I, ambient).is_unit()


class Family:
    """pi: total -> base, one polynomial per base coordinate."""

    def __init__(self, total: Subscheme, base: AmbientSpace, projection: Mapping[str, object],
                 assumptions: Mapping[str, bool] | None = None, check: bool = True):
        self.total = total
        self.base = base
        ring = total.ring
        missing = [v for v in base.ring.variables if v not in projection]
        if missing:
            raise FamilyError(f"projection gives no component for base coordinates {missing}")
        self.projection = {v: _coerce(ring, projection[v]) for v in base.ring.variables}
        self.assumptions = dict(DEFAULT_ASSUMPTIONS)
        if assumptions:
            self.assumptions.update(assumptions)
        if check:
            self._check()

    def _check(self):
        amb = self.total.ambient
        for block in self.base.projective_blocks:
            comps = [self.projection[v] for v in block]
            degs = set()
            for c in comps:
                if not c:
                    continue
                for b in amb.projective_blocks:
                    if not c.is_homogeneous(b):
                        raise FamilyError(f"projection component {c} is not homogeneous in {b}")
                degs.add(tuple(sorted(c.block_degrees(b)) for b in amb.projective_blocks).__repr__())
            if len(degs) > 1:
                raise FamilyError(f"projection components for {block} have different multidegrees")
            if not _nowhere_vanishing(comps, amb, self.total.ideal.generators):
                raise FamilyError(f"projection to {block} has a base locus on the total space")
        for block in self.base.affine_blocks:
            for v in block:
                c = self.projection[v]
                if amb.projective_blocks and not all(c.block_degrees(b) <= {0} for b in amb.projective_blocks):
                    raise FamilyError(f"affine component {v} must not involve projective coordinates")

    @property
    def base_ring(self) -> PolyRing:
        return self.base.ring

    def section(self, coordinates: Mapping[str, object], name: str = "") -> "Section":
        return Section(self, coordinates, name)

    def header(self) -> dict:
        return {
            "total": self.total.ambient.describe(),
            "total_ideal": str(self.total.ideal),
            "base": self.base.describe(),
            "projection": {k: str(v) for k, v in self.projection.items()},
            "assumptions": dict(self.assumptions),
        }


class Section:
    """sigma: B -> S with pi o sigma = id, checked on construction."""

    def __init__(self, family: Family, coordinates: Mapping[str, object], name: str = "", check: bool = True):
        self.family = family
        self.name = name
        bring = family.base_ring
        tring = family.total.ring
        missing = [v for v in tring.variables if v not in coordinates]
        if missing:
            raise SectionError(f"section {name or '?'} gives no coordinate for {missing}")
        extra = [v for v in coordinates if v not in tring]
        if extra:
            raise SectionError(f"section {name or '?'} names unknown total-space coordinates {extra}")
        self.coordinates = {v: _coerce(bring, coordinates[v]) for v in tring.variables}
        if check:
            self._check()

    def _check(self):
        fam = self.family
        base = fam.base
        label = self.name or "section"
        for block in fam.total.ambient.projective_blocks:
            comps = [self.coordinates[v] for v in block]
            if not all(all(c.is_homogeneous(b) for b in base.projective_blocks) for c in comps if c):
                raise SectionError(f"{label}: coordinates of {block} are not homogeneous on the base")
            degs = {tuple(tuple(sorted(c.block_degrees(b))) for b in base.projective_blocks) for c in comps if c}
            if len(degs) > 1:
                raise SectionError(f"{label}: coordinates of {block} have different degrees")
            if not _nowhere_vanishing(comps, base):
                raise SectionError(f"{label}: coordinates of {block} vanish simultaneously somewhere on the base")
        for g in fam.total.ideal.generators:
            if g.substitute(self.coordinates, fam.base_ring):
                raise SectionError(f"{label}: does not land in the total space ({g} does not vanish)")
        composed = {v: p.substitute(self.coordinates, fam.base_ring) for v, p in fam.projection.items()}
        bring = fam.base_ring
        for block in base.projective_blocks:
            for i, v in enumerate(block):
                for w in block[i + 1:]:
                    if composed[v] * bring.gen(w) - composed[w] * bring.gen(v):
                        raise SectionError(f"{label}: pi o sigma is not the identity on {block}")
            if not _nowhere_vanishing([composed[v] for v in block], base):
                raise SectionError(f"{label}: pi o sigma scales {block} by a non-unit")
        for block in base.affine_blocks:
            for v in block:
                if composed[v] != bring.gen(v):
                    raise SectionError(f"{label}: pi o sigma moves the affine coordinate {v}")

    def image(self) -> Subscheme:
        return scheme_image(self.coordinates, self.family.base.whole(), self.family.total.ambient)

    def as_dict(self) -> dict:
        return {k: str(v) for k, v in self.coordinates.items()}

    def __repr__(self):
        return f"Section({self.name or ''}: {self.as_dict()})"


def intersection_scheme(sigma: Section, tau: Section) -> Subscheme:
    """Points of the base where the two sections agree, as a saturated subscheme."""
    if sigma.family is not tau.family:
        raise SectionError("sections belong to different families")
    fam = sigma.family
    ring = fam.base_ring
    gens = []
    for b in fam.total.ring.blocks:
        names = b.variables
        if b.kind == "projective":
            for i, v in enumerate(names):
                for w in names[i + 1:]:
                    m = sigma.coordinates[v] * tau.coordinates[w] - sigma.coordinates[w] * tau.coordinates[v]
                    if m:
                        gens.append(m)
        else:
            for v in names:
                d = sigma.coordinates[v] - tau.coordinates[v]
                if d:
                    gens.append(d)
    I = saturate_irrelevant(Ideal(ring, gens), fam.base)
    return Subscheme(fam.base, I, saturated=True)


# ---------------------------------------------------------------------------
# pairs


@dataclass
class PairAnalysis:
    labels: tuple
    intersection: Subscheme
    dimension: int
    degree: int | None
    verdict: str                # "admissible" | "not_admissible" | "diagonal" | "unsupported"
    certificate: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.dimension, self.degree if self.degree is not None else -1, self.verdict)

    def as_dict(self) -> dict:
        return {
            "pair": list(self.labels),
            "intersection": str(self.intersection.ideal),
            "dimension": self.dimension,
            "degree": self.degree,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "notes": list(self.notes),
        }


def _is_curve_base(base: AmbientSpace) -> bool:
    return base.dimension == 1 and len(base.projective_blocks) + len(base.affine_blocks) == 1


def analyze_pair(sigma: Section, tau: Section) -> PairAnalysis:
    """Intersection scheme of a pair and whether it is an effective Cartier divisor on the base."""
    Z = intersection_scheme(sigma, tau)
    labels = (sigma.name, tau.name)
    notes = ["admissibility is decided at these explicit sections only, not at generic points"]
    if Z.ideal.is_zero():
        return PairAnalysis(labels, Z, Z.ambient.dimension, None, "diagonal",
                            {"reason": "the sections agree everywhere"}, notes)
    dim = Z.dimension()
    if dim < 0:
        return PairAnalysis(labels, Z, -1, 0, "admissible",
                            {"reason": "empty intersection, the zero divisor"}, notes)
    try:
        deg = Z.degree()
    except GeometryError:
        deg = None
    base = Z.ambient
    if _is_curve_base(base) and base.projective_blocks:
        return PairAnalysis(labels, Z, dim, deg, "admissible",
                            {"reason": "proper closed subscheme of a smooth curve is a Cartier divisor"}, notes)
    v = is_effective_cartier_divisor(Z)
    verdict = {"cartier": "admissible", "not_cartier": "not_admissible"}.get(v.verdict, "unsupported")
    return PairAnalysis(labels, Z, dim, deg, verdict, v.as_dict(), notes)


# ---------------------------------------------------------------------------
# clusters


@dataclass
class Lift:
    """Cluster step given as the lift of a section of the previous stage."""
    section: object             # Section of the previous stage, or its coordinates
    name: str = ""


@dataclass
class ClusterStep:
    index: int
    family: Family
    section: Section
    infinitely_near: bool
    blowup: BlowupResult | None = None
    exceptional: Subscheme | None = None
    lift: object = None

    def as_dict(self) -> dict:
        d = {
            "step": self.index,
            "section": self.section.name,
            "coordinates": self.section.as_dict(),
            "infinitely_near": self.infinitely_near,
        }
        if self.blowup is not None:
            d["centre"] = [str(f) for f in self.blowup.centre]
            d["fibre_coordinates"] = list(self.blowup.names)
            d["rees"] = self.blowup.display_generators()
            d["exceptional_charts"] = [{"chart": ch.variable, "generator": str(ch.exceptional_generator)}
                                       for ch in self.blowup.charts]
        if self.lift is not None:
            d["lift"] = self.lift.as_dict()
        return d


@dataclass
class ClusterSpec:
    family: Family
    steps: list

    @property
    def order(self) -> int:
        return len(self.steps) - 1

    def as_dict(self) -> dict:
        return {"order": self.order, "steps": [s.as_dict() for s in self.steps]}


def minimal_centre(X: Subscheme, gens: Sequence[Polynomial]) -> list:
    """Drop generators that are redundant modulo X, greedily from the end."""
    keep = [g for g in gens if not X.ideal.contains(g)]
    i = len(keep) - 1
    while i >= 0 and len(keep) > 1:
        others = keep[:i] + keep[i + 1:]
        if (X.ideal + Ideal(X.ring, others)).contains(keep[i]):
            keep = others
        i -= 1
    return keep


def _blow_up_family(fam: Family, section: Section, names: Sequence[str], centre=None) -> tuple:
    image = section.image()
    X = fam.total
    if centre is None:
        centre = minimal_centre(X, image.ideal.generators)
    else:
        centre = [_coerce(X.ring, f) for f in centre]
        given = Subscheme(X.ambient, X.ideal + Ideal(X.ring, centre))
        if not given.equals(image.intersect(X)):
            raise SectionError(f"centre {[str(f) for f in centre]} does not cut out the image of {section.name}")
    b = rees_ideal(fam.total, centre, names[:len(centre)] if names else None)
    R = b.ambient.ring
    exceptional = Subscheme(b.ambient, Ideal(R, b.rees_ideal.generators + tuple(R.convert(f) for f in b.centre)))
    new_family = Family(b.total_space(), fam.base, {v: R.convert(p) for v, p in fam.projection.items()},
                        fam.assumptions, check=False)
    return b, exceptional, new_family


def build_cluster(family: Family, specs: Sequence, names: Sequence[Sequence[str]] | None = None,
                  centres: Sequence | None = None, blow_up_last: bool = False) -> ClusterSpec:
    """Build an ordered cluster from explicit sections and lifts.

    ``specs[n]`` is a coordinate mapping (optionally as a ``(name, mapping)``
    pair) for a section of the n-th stage, a Section of it, or a Lift of a
    section of the previous stage.  Fibre
    coordinates of the n-th blow-up default to ``E{n}_{j}``.  ``centres[n]``
    optionally fixes the generators used for the n-th blow-up; they must cut
    out the section's image on the total space.
    """
    steps = []
    fam = family
    prev = None
    for n, spec in enumerate(specs):
        lifted = None
        if isinstance(spec, Lift):
            if prev is None or prev.blowup is None:
                raise SectionError("the first cluster step cannot be a lift")
            src = spec.section
            if not isinstance(src, Section):
                src = Section(prev.family, src, spec.name)
            elif src.family is not prev.family:
                raise SectionError("a lift must start from a section of the previous stage")
            lifted = lift_section(prev.blowup, src.coordinates, fam.base.whole())
            if lifted.graph_certified is False:
                raise SectionError(f"lift of {src.name or 'section'} is not certified: {lifted.notes}")
            section = Section(fam, lifted.coordinates, spec.name or src.name)
        elif isinstance(spec, Section):
            if spec.family is not fam:
                section = Section(fam, spec.coordinates, spec.name)
            else:
                section = spec
        elif isinstance(spec, tuple):
            section = Section(fam, spec[1], spec[0])
        else:
            section = Section(fam, spec, f"s{n}")
        near = False
        if prev is not None:
            near = prev.exceptional.contains(section.image())
        step = ClusterStep(n, fam, section, near, lift=lifted)
        if n < len(specs) - 1 or blow_up_last:
            step_names = list(names[n]) if names and n < len(names) and names[n] else None
            if step_names is None:
                step_names = [f"E{n}_{j}" for j in range(len(fam.total.ring.variables))]
            given = centres[n] if centres and n < len(centres) else None
            b, exc, fam = _blow_up_family(fam, section, step_names, given)
            step.blowup = b
            step.exceptional = exc
        steps.append(step)
        prev = step
    return ClusterSpec(family, steps)


# ---------------------------------------------------------------------------
# stratification


@dataclass
class StratumGroup:
    key: tuple
    kind: str                   # "II" for the diagonal, "I" otherwise
    members: list
    representative: dict

    def as_dict(self) -> dict:
        dim, deg, verdict = self.key
        return {"type": self.kind, "dimension": dim, "degree": None if deg < 0 else deg, "verdict": verdict,
                "count": len(self.members), "members": list(self.members), "representative": self.representative}


@dataclass
class StratumReport:
    groups: list
    errors: list
    analyses: list

    def as_dict(self) -> dict:
        return {"groups": [g.as_dict() for g in self.groups], "errors": list(self.errors)}

    def group(self, verdict: str | None = None, dimension: int | None = None, degree: int | None = None) -> list:
        out = []
        for g in self.groups:
            d, k, v = g.key
            if verdict is not None and v != verdict:
                continue
            if dimension is not None and d != dimension:
                continue
            if degree is not None and k != degree:
                continue
            out.append(g)
        return out


def stratify_pairs(pairs: Sequence) -> StratumReport:
    """Group explicit pairs by intersection dimension, degree and verdict.

    Each item is ``(sigma, tau)`` or ``(label, sigma, tau)``; items may also be
    callables returning such a tuple, so that construction errors are
    collected per pair rather than aborting the run.
    """
    buckets: dict = {}
    errors = []
    analyses = []
    for idx, item in enumerate(pairs):
        label = getattr(item, "label", str(idx))
        try:
            if callable(item):
                item = item()
            if len(item) == 3:
                label, sigma, tau = item
            else:
                sigma, tau = item
            pa = analyze_pair(sigma, tau)
        except (GeometryError, ArithmeticError, ValueError) as exc:
            errors.append({"index": idx, "label": label, "error": f"{type(exc).__name__}: {exc}"})
            analyses.append(None)
            continue
        analyses.append(pa)
        buckets.setdefault(pa.key, []).append((idx, label, pa))
    groups = []
    for key in sorted(buckets, key=lambda k: (k[2] != "diagonal", k)):
        members = buckets[key]
        rep = members[0][2].as_dict()
        rep["label"] = members[0][1]
        kind = "II" if key[2] == "diagonal" else "I"
        groups.append(StratumGroup(key, kind, [m[1] for m in members], rep))
    return StratumReport(groups, errors, analyses)


def parametrized_pairs(family: Family, sigma: Mapping[str, object], tau: Mapping[str, object],
                       parameters: Sequence[str], points: Iterable[Sequence]) -> list:
    """Instantiate a pair template at rational parameter points.

    The templates are coordinate mappings whose polynomials may use the
    parameters as extra variables; they are parsed in the base ring extended
    by those parameters and specialized point by point.
    """
    bring = family.base_ring
    pring = bring.extend(list(parameters), front=True)
    st = {v: _coerce(pring, p) for v, p in sigma.items()}
    tt = {v: _coerce(pring, p) for v, p in tau.items()}
    out = []
    for pt in points:
        pt = tuple(pt)
        if len(pt) != len(parameters):
            raise ValueError(f"parameter point {pt} has the wrong length")
        mp = {v: bring.gen(v) for v in bring.variables}
        mp.update({p: bring.field(x) for p, x in zip(parameters, pt)})
        label = "(" + ", ".join(str(x) for x in pt) + ")"

        def make(st=st, tt=tt, mp=mp, label=label):
            s = Section(family, {v: p.substitute(mp, bring) for v, p in st.items()}, "sigma" + label)
            t = Section(family, {v: p.substitute(mp, bring) for v, p in tt.items()}, "tau" + label)
            return label, s, t
        make.label = label
        out.append(make)
    return out


# ---------------------------------------------------------------------------
# Hirzebruch surfaces


def hirzebruch_intersection(e: int, D1: Sequence[int], D2: Sequence[int]) -> int:
    """(n1*C + m1*F).(n2*C + m2*F) on F_e, with C^2 = -e, F^2 = 0, C.F = 1."""
    if e < 0:
        raise ValueError("e must be non-negative")
    n1, m1 = D1
    n2, m2 = D2
    return -e * n1 * n2 + n1 * m2 + n2 * m1


def hirzebruch_is_section_class(e: int, D: Sequence[int]) -> bool:
    """Whether n*C + m*F is the class of a section of F_e -> P^1."""
    if e < 0:
        raise ValueError("e must be non-negative")
    n, m = D
    return n == 1 and (m == 0 or m >= e)
