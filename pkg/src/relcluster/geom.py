"""Subschemes of products of projective and affine spaces.

An :class:`AmbientSpace` is a polynomial ring whose variables are grouped
into blocks, each block a factor P^n (n+1 homogeneous coordinates) or A^n.
Subschemes are block-homogeneous ideals; projective questions are answered
on saturated ideals or on the standard affine charts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .groebner import (
    Ideal,
    NotZeroDimensionalError,
    hilbert,
    krull_dimension,
    saturate_by_blocks,
    saturation,
    vector_space_degree,
)
from .poly import QQ, Block, CoefficientField, Polynomial, PolyRing, RingMismatchError, gcd


class GeometryError(ValueError):
    pass


class NotCompleteIntersectionError(GeometryError):
    pass


class AmbientSpace:
    """A product of projective and affine factors."""

    def __init__(self, ring: PolyRing):
        for b in ring.blocks:
            if b.kind == "projective" and not b.variables:
                raise GeometryError("empty projective block")
        self.ring = ring

    @classmethod
    def product(cls, *factors, field: CoefficientField = QQ) -> "AmbientSpace":
        """``AmbientSpace.product(("P", "x y z"), ("A", ["a", "b"]))``."""
        blocks = []
        for kind, names in factors:
            if isinstance(names, str):
                names = names.replace(",", " ").split()
            kind = {"P": "projective", "A": "affine"}.get(kind, kind)
            blocks.append(Block(kind, tuple(names)))
        variables = [v for b in blocks for v in b.variables]
        return cls(PolyRing(variables, field, blocks))

    @classmethod
    def projective(cls, names, field: CoefficientField = QQ) -> "AmbientSpace":
        return cls.product(("P", names), field=field)

    @classmethod
    def affine(cls, names, field: CoefficientField = QQ) -> "AmbientSpace":
        return cls.product(("A", names), field=field)

    @property
    def projective_blocks(self) -> tuple:
        return tuple(b.variables for b in self.ring.blocks if b.kind == "projective")

    @property
    def affine_blocks(self) -> tuple:
        return tuple(b.variables for b in self.ring.blocks if b.kind == "affine")

    @property
    def dimension(self) -> int:
        return sum(len(b.variables) - 1 if b.kind == "projective" else len(b.variables)
                   for b in self.ring.blocks)

    def irrelevant_ideals(self) -> list:
        return [Ideal(self.ring, [self.ring.gen(v) for v in b]) for b in self.projective_blocks]

    def whole(self) -> "Subscheme":
        return Subscheme(self, Ideal(self.ring), saturated=True)

    def subscheme(self, generators: Iterable) -> "Subscheme":
        return Subscheme(self, Ideal(self.ring, list(generators)))

    def describe(self) -> str:
        parts = []
        for b in self.ring.blocks:
            tag = "P" if b.kind == "projective" else "A"
            parts.append(f"{tag}({', '.join(b.variables)})")
        return " * ".join(parts) if parts else "point"

    def __eq__(self, other):
        return isinstance(other, AmbientSpace) and self.ring == other.ring

    def __hash__(self):
        return hash(self.ring)

    def __repr__(self):
        return f"AmbientSpace({self.describe()})"


def is_block_homogeneous(f: Polynomial, ambient: AmbientSpace) -> bool:
    return all(f.is_homogeneous(b) for b in ambient.projective_blocks)


def saturate_irrelevant(I: Ideal, ambient: AmbientSpace) -> Ideal:
    if not ambient.projective_blocks or I.is_zero():
        return I
    return saturate_by_blocks(I, ambient.projective_blocks)


class Subscheme:
    """A closed subscheme V(I) of an ambient space."""

    def __init__(self, ambient: AmbientSpace, ideal: Ideal, saturated: bool = False):
        if ideal.ring != ambient.ring:
            raise RingMismatchError("ideal and ambient space use different rings")
        for g in ideal.generators:
            if not is_block_homogeneous(g, ambient):
                raise GeometryError(f"generator {g} is not homogeneous in every projective block")
        self.ambient = ambient
        self.ideal = ideal
        self.saturated_flag = saturated or not ambient.projective_blocks

    @property
    def ring(self) -> PolyRing:
        return self.ambient.ring

    def saturate(self) -> "Subscheme":
        if self.saturated_flag:
            return self
        return Subscheme(self.ambient, saturate_irrelevant(self.ideal, self.ambient), saturated=True)

    def is_empty(self) -> bool:
        return self.saturate().ideal.is_unit()

    def contains(self, other: "Subscheme") -> bool:
        """other ⊆ self as subschemes."""
        return self.ideal.generators == () or other.saturate().ideal.contains_ideal(self.ideal)

    def equals(self, other: "Subscheme") -> bool:
        return self.saturate().ideal.equals(other.saturate().ideal)

    def intersect(self, other: "Subscheme") -> "Subscheme":
        return Subscheme(self.ambient, self.ideal + other.ideal)

    def dimension(self) -> int:
        return subscheme_dimension(self)

    def degree(self) -> int:
        return subscheme_degree(self)

    def charts(self) -> list:
        return charts(self)

    def __repr__(self):
        return f"Subscheme({self.ideal} in {self.ambient.describe()})"


# ---------------------------------------------------------------------------
# charts


@dataclass
class Chart:
    parent: AmbientSpace
    dehomogenized: tuple    # one variable per projective block, set to 1
    ring: PolyRing
    ideal: Ideal

    def closure(self) -> Ideal:
        """Re-homogenize into the parent ring and saturate by the chart variables."""
        P = self.parent.ring
        gens = []
        for g in self.ideal.generators:
            h = P.convert(g)
            for var, block in zip(self.dehomogenized, self.parent.projective_blocks):
                h = h.homogenize(block, var)
            gens.append(h)
        I = Ideal(P, gens)
        for var in self.dehomogenized:
            I = saturation(I, Ideal(P, [P.gen(var)]))[0]
        return I

    @property
    def label(self) -> str:
        return ",".join(f"{v}=1" for v in self.dehomogenized) or "affine"


def dehomogenize_ideal(I: Ideal, names: Sequence[str], ring: PolyRing | None = None) -> Ideal:
    ring = ring or I.ring.without(names)
    gens = []
    for g in I.generators:
        for v in names:
            g = g.dehomogenize(v)
        gens.append(ring.convert(g))
    return Ideal(ring, gens)


def charts(Z: Subscheme) -> list:
    """Standard affine atlas of Z: one chart per choice of coordinate per projective block."""
    Zs = Z.saturate()
    blocks = Z.ambient.projective_blocks
    out = []
    for choice in product(*blocks) if blocks else [()]:
        ring = Z.ring.without(choice)
        out.append(Chart(Z.ambient, tuple(choice), ring, dehomogenize_ideal(Zs.ideal, choice, ring)))
    return out


# ---------------------------------------------------------------------------
# dimension and degree


def subscheme_dimension(Z: Subscheme) -> int:
    """Dimension of Z (-1 when empty)."""
    Zs = Z.saturate()
    if Zs.ideal.is_unit():
        return -1
    k = krull_dimension(Zs.ideal)
    return k - len(Z.ambient.projective_blocks)


def projective_closure(Z: Subscheme) -> Subscheme:
    """Close every affine block A^n into P^n with a fresh homogenizing coordinate."""
    amb = Z.ambient
    if not amb.affine_blocks:
        return Z.saturate()
    ring = Z.ring
    blocks = []
    homog = []
    for b in ring.blocks:
        if b.kind == "affine":
            h = ring.fresh_name("H")
            while h in [x for hb in homog for x in hb[1]]:
                h = h + "x"
            names = (h,) + b.variables
            blocks.append(Block("projective", names))
            homog.append((h, names))
        else:
            blocks.append(b)
    variables = [v for b in blocks for v in b.variables]
    big = PolyRing(variables, ring.field, blocks)
    gens = []
    for g in Z.saturate().ideal.generators:
        g = big.convert(g)
        for h, names in homog:
            g = g.homogenize(names, h)
        gens.append(g)
    I = Ideal(big, gens)
    for h, _ in homog:
        I = saturation(I, Ideal(big, [big.gen(h)]))[0]
    new_amb = AmbientSpace(big)
    return Subscheme(new_amb, saturate_irrelevant(I, new_amb), saturated=True)


def subscheme_degree(Z: Subscheme) -> int:
    """Degree of Z: the length when Z is zero-dimensional.

    Computed as h(1) for the total-degree Hilbert series of the saturated
    (projectively closed) ideal; for a single projective factor this is the
    normalized leading coefficient of the Hilbert polynomial.
    """
    Zs = Z.saturate()
    if Zs.ideal.is_unit():
        raise GeometryError("degree of the empty scheme is undefined")
    amb = Z.ambient
    if not amb.projective_blocks:
        if krull_dimension(Zs.ideal) == 0:
            return vector_space_degree(Zs.ideal)
    closed = projective_closure(Zs)
    return hilbert(closed.ideal).degree


# ---------------------------------------------------------------------------
# images and singular loci


def _rename_clashing(source_ring: PolyRing, target_ring: PolyRing):
    taken = set(target_ring.variables) | set(source_ring.variables)
    renames = {}
    for v in source_ring.variables:
        if v in target_ring:
            new = f"{v}_s"
            while new in taken:
                new += "s"
            taken.add(new)
            renames[v] = new
    return renames


def scheme_image(mapping: Mapping[str, Polynomial], source: Subscheme, target: AmbientSpace) -> Subscheme:
    """Closure of the image of ``source`` under ``mapping`` (target variable -> polynomial).

    The graph ideal (2x2 minors per projective target block, differences for
    affine blocks) plus the source ideal is saturated by the irrelevant ideals
    and by each block's base locus, and the source variables are eliminated.
    """
    src_ring = source.ring
    missing = [v for v in target.ring.variables if v not in mapping]
    if missing:
        raise GeometryError(f"map gives no image for target variables {missing}")
    imgs = {}
    for v, f in mapping.items():
        if isinstance(f, Polynomial):
            if f.ring != src_ring:
                f = src_ring.convert(f)
        else:
            f = src_ring(f)
        imgs[v] = f
    renames = _rename_clashing(src_ring, target.ring)
    src_blocks = []
    for b in src_ring.blocks:
        src_blocks.append(Block(b.kind, tuple(renames.get(v, v) for v in b.variables)))
    big_vars = [v for b in src_blocks for v in b.variables] + list(target.ring.variables)
    big = PolyRing(big_vars, src_ring.field, tuple(src_blocks) + target.ring.blocks)
    to_big = {v: big.gen(renames.get(v, v)) for v in src_ring.variables}

    def lift(f: Polynomial) -> Polynomial:
        return f.substitute(to_big, big)

    gens = [lift(g) for g in source.ideal.generators]
    base_loci = []
    for b in target.ring.blocks:
        F = [lift(imgs[v]) for v in b.variables]
        Z = [big.gen(v) for v in b.variables]
        if b.kind == "projective":
            degs = {f.total_degree() for f in F if f}
            if not degs:
                raise GeometryError("map is undefined everywhere (all components vanish)")
            for i, j in combinations(range(len(F)), 2):
                m = Z[i] * F[j] - Z[j] * F[i]
                if m:
                    gens.append(m)
            base_loci.append([f for f in F if f])
        else:
            gens.extend(z - f for z, f in zip(Z, F))
    I = Ideal(big, gens)
    src_proj = [tuple(renames.get(v, v) for v in blk) for blk in source.ambient.projective_blocks]
    for locus in base_loci:
        if not any(f.is_constant() for f in locus):
            I = saturation(I, Ideal(big, locus))[0]
    I = saturate_by_blocks(I, src_proj + list(target.projective_blocks)) if (src_proj or target.projective_blocks) else I
    if I.is_unit():
        if not source.is_empty():
            raise GeometryError("map is undefined on all of the source (base locus = source)")
    elim = I.eliminate([renames.get(v, v) for v in src_ring.variables])
    res = Ideal(target.ring, [target.ring.convert(g) for g in elim.generators])
    return Subscheme(target, saturate_irrelevant(res, target), saturated=True)


def _det(M: list) -> Polynomial:
    n = len(M)
    if n == 1:
        return M[0][0]
    total = None
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else M[0][0].ring.zero()


def jacobian_minors(gens: Sequence[Polynomial], size: int) -> list:
    ring = gens[0].ring
    J = [[g.derivative(v) for v in ring.variables] for g in gens]
    out = []
    for rows in combinations(range(len(gens)), size):
        for cols in combinations(range(ring.nvars), size):
            d = _det([[J[r][c] for c in cols] for r in rows])
            if d:
                out.append(d)
    return out


def singular_locus(X: Subscheme) -> Subscheme:
    """Jacobian criterion for a complete-intersection presentation.

    The generators of X's ideal must number exactly its codimension
    (hypersurfaces always qualify).
    """
    gens = list(X.ideal.generators)
    if not gens:
        return Subscheme(X.ambient, Ideal(X.ring, [X.ring.one()]), saturated=True)
    c = len(gens)
    if c > 1:
        codim = X.ring.nvars - krull_dimension(X.ideal)
        if codim != c:
            raise NotCompleteIntersectionError(
                f"{c} generators for a subscheme of codimension {codim}; "
                "the Jacobian criterion needs a complete-intersection presentation")
    I = Ideal(X.ring, gens + jacobian_minors(gens, c))
    return Subscheme(X.ambient, I).saturate()


# ---------------------------------------------------------------------------
# Cartier test


@dataclass
class CartierVerdict:
    verdict: str            # "cartier" | "not_cartier" | "unsupported"
    reason: str
    charts: list = field(default_factory=list)   # per-chart certificates

    def __bool__(self):
        return self.verdict == "cartier"

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason, "charts": self.charts}


def is_effective_cartier_divisor(Z: Subscheme, X: Subscheme | None = None) -> CartierVerdict:
    """Decide whether Z is an effective Cartier divisor on X.

    X must be the whole ambient space (or an open of it), so that each chart
    is a polynomial ring and hence a UFD: there an ideal is locally principal
    iff it is principal, iff it equals the ideal of the gcd of its generators.
    Other X give ``unsupported`` rather than a guess.
    """
    amb = Z.ambient
    if X is None:
        X = amb.whole()
    if X.ambient != amb:
        raise GeometryError("Z and X live in different ambient spaces")
    if not X.saturate().ideal.is_zero():
        return CartierVerdict("unsupported",
                              "X is not an open subscheme of its ambient; chart rings are not polynomial rings")
    if not X.contains(Z):
        raise GeometryError("Z is not contained in X")
    Zs = Z.saturate()
    if Zs.ideal.is_zero():
        return CartierVerdict("not_cartier", "Z = X, which is not a divisor")
    certs = []
    ok = True
    for ch in charts(Zs):
        I = ch.ideal
        if I.is_unit():
            certs.append({"chart": ch.label, "principal": True, "generator": "1"})
            continue
        g = None
        for h in I.groebner():
            g = h if g is None else gcd(g, h)
        if g is None or not g:
            certs.append({"chart": ch.label, "principal": False, "generator": "0",
                          "reason": "Z contains this chart"})
            ok = False
            continue
        principal = I.contains(g)
        cert = {"chart": ch.label, "principal": principal, "generator": str(g)}
        if not principal:
            cert["witness"] = f"gcd {g} of the generators is not in the ideal ({I})"
            ok = False
        certs.append(cert)
    if ok:
        return CartierVerdict("cartier", "locally principal on every chart, generated by a nonzero element", certs)
    return CartierVerdict("not_cartier", "ideal is not principal on some chart", certs)
