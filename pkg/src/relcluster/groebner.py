"""Buchberger's algorithm and the ideal operations built on it.

Everything here is a pure function of its inputs.  :class:`Ideal` caches
reduced Gröbner bases per monomial order, but the cache is invisible to
callers: a basis is a function of (generators, order).
"""
from __future__ import annotations

import contextvars
import heapq
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

from .poly import (
    MonomialOrder,
    Polynomial,
    PolyRing,
    PolynomialError,
    RingMismatchError,
    divide_exact,
    format_polynomial,
)


class GroebnerLimitError(RuntimeError):
    """A resource cap was hit; ``partial`` holds the basis built so far."""

    def __init__(self, message: str, partial: Sequence[Polynomial] = (), pairs_done: int = 0):
        super().__init__(message)
        self.partial = tuple(partial)
        self.pairs_done = pairs_done


class NotHomogeneousError(ValueError):
    pass


class NotZeroDimensionalError(ValueError):
    pass


@dataclass(frozen=True)
class Limits:
    max_degree: int = 60
    max_pairs: int = 200_000


_LIMITS: contextvars.ContextVar[Limits] = contextvars.ContextVar("relcluster_limits", default=Limits())


def current_limits() -> Limits:
    return _LIMITS.get()


@contextmanager
def resource_limits(max_degree: int | None = None, max_pairs: int | None = None):
    """Temporarily change the degree / pair caps used by :func:`groebner_basis`."""
    old = _LIMITS.get()
    token = _LIMITS.set(Limits(max_degree if max_degree is not None else old.max_degree,
                               max_pairs if max_pairs is not None else old.max_pairs))
    try:
        yield
    finally:
        _LIMITS.reset(token)


# ---------------------------------------------------------------------------
# core algorithm on raw term dicts


def _divides(a, b) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm(a, b):
    return tuple(x if x > y else y for x, y in zip(a, b))


def _reduce(p: dict, reducers: list, key, full: bool = True) -> dict:
    """Remainder of ``p`` on division by monic ``reducers`` [(lm, deg, tail)]."""
    p = dict(p)
    r: dict = {}
    while p:
        m = max(p, key=key)
        c = p.pop(m)
        dm = sum(m)
        for lm, dl, tail in reducers:
            if dl <= dm and _divides(lm, m):
                shift = tuple(x - y for x, y in zip(m, lm))
                get = p.get
                for e, a in tail:
                    ee = tuple(x + y for x, y in zip(e, shift))
                    v = get(ee)
                    v = -c * a if v is None else v - c * a
                    if v:
                        p[ee] = v
                    else:
                        del p[ee]
                break
        else:
            r[m] = c
            if not full:
                r.update(p)
                return r
    return r


def _monic(p: dict, key):
    lm = max(p, key=key)
    lc = p[lm]
    if lc != 1:
        p = {e: c / lc for e, c in p.items()}
    return lm, p


def _as_reducer(lm, p):
    return (lm, sum(lm), [(e, c) for e, c in p.items() if e != lm])


def _spoly(lm_f, f: dict, lm_g, g: dict):
    L = _lcm(lm_f, lm_g)
    sf = tuple(x - y for x, y in zip(L, lm_f))
    sg = tuple(x - y for x, y in zip(L, lm_g))
    out: dict = {}
    for e, c in f.items():
        out[tuple(x + y for x, y in zip(e, sf))] = c
    for e, c in g.items():
        ee = tuple(x + y for x, y in zip(e, sg))
        v = out.get(ee)
        v = -c if v is None else v - c
        if v:
            out[ee] = v
        else:
            out.pop(ee, None)
    return out


def buchberger(polys: Iterable[dict], order: MonomialOrder, limits: Limits | None = None,
               ring: PolyRing | None = None) -> list:
    """Reduced Gröbner basis of raw term dicts, sorted by decreasing leading monomial.

    Uses the normal selection strategy (smallest lcm first) with the
    Gebauer-Moeller installation of Buchberger's product and chain criteria.
    """
    limits = limits or current_limits()
    key = order.key
    G: list = []       # (lm, poly dict)
    reducers: list = []
    alive: set = set()
    heap: list = []
    pairs_done = 0

    def partial():
        if ring is None:
            return ()
        return [Polynomial(ring, g) for _, g in G]

    def install(lm, p):
        nonlocal alive
        k = len(G)
        # Gebauer-Moeller: drop old pairs made redundant by the new lead term
        kept = set()
        for (i, j) in alive:
            L = _lcm(G[i][0], G[j][0])
            if (not _divides(lm, L)) or L == _lcm(G[i][0], lm) or L == _lcm(G[j][0], lm):
                kept.add((i, j))
        alive = kept
        by_lcm: dict = {}
        for i, (lmi, _) in enumerate(G):
            by_lcm.setdefault(_lcm(lmi, lm), []).append(i)
        minimal = []
        for L in sorted(by_lcm, key=key):
            if all(not _divides(M, L) for M in minimal):
                minimal.append(L)
        for L in minimal:
            idx = by_lcm[L]
            # product criterion: coprime leading monomials reduce to zero
            if any(_lcm(G[i][0], lm) == tuple(a + b for a, b in zip(G[i][0], lm)) for i in idx):
                continue
            i = min(idx)
            alive.add((i, k))
            heapq.heappush(heap, (key(L), i, k))
        G.append((lm, p))
        reducers[:] = [r for r in reducers if not _divides(lm, r[0])]
        reducers.append(_as_reducer(lm, p))

    for p in polys:
        if not p:
            continue
        h = _reduce(p, reducers, key) if reducers else dict(p)
        if not h:
            continue
        lm, h = _monic(h, key)
        if sum(lm) > limits.max_degree:
            raise GroebnerLimitError(f"degree cap {limits.max_degree} exceeded", partial(), pairs_done)
        install(lm, h)
        if sum(lm) == 0:
            break

    while heap:
        if any(sum(lm) == 0 for lm, _ in G[-1:]):
            break
        _, i, j = heapq.heappop(heap)
        if (i, j) not in alive:
            continue
        alive.discard((i, j))
        pairs_done += 1
        if pairs_done > limits.max_pairs:
            raise GroebnerLimitError(f"pair cap {limits.max_pairs} exceeded", partial(), pairs_done)
        s = _spoly(G[i][0], G[i][1], G[j][0], G[j][1])
        h = _reduce(s, reducers, key)
        if h:
            lm, h = _monic(h, key)
            if sum(lm) > limits.max_degree:
                raise GroebnerLimitError(f"degree cap {limits.max_degree} exceeded", partial(), pairs_done)
            install(lm, h)

    return _interreduce(G, key)


def _interreduce(G: list, key) -> list:
    for lm, p in G:
        if sum(lm) == 0:
            return [p]
    minimal = []
    for lm, p in sorted(G, key=lambda t: key(t[0])):
        if all(not _divides(m, lm) for m, _ in minimal):
            minimal.append((lm, p))
    out = []
    for idx, (lm, p) in enumerate(minimal):
        others = [_as_reducer(m, q) for j, (m, q) in enumerate(minimal) if j != idx]
        tail = {e: c for e, c in p.items() if e != lm}
        red = _reduce(tail, others, key) if others else tail
        red[lm] = p[lm]
        out.append((lm, red))
    out.sort(key=lambda t: key(t[0]), reverse=True)
    return [p for _, p in out]


# ---------------------------------------------------------------------------
# ideals


def _as_poly(ring: PolyRing, g) -> Polynomial:
    if isinstance(g, Polynomial):
        if g.ring != ring:
            try:
                return ring.convert(g)
            except PolynomialError:
                raise RingMismatchError("generator does not belong to the ideal's ring") from None
        return g
    return ring(g)


class Ideal:
    """An ideal given by generators, with cached reduced Gröbner bases."""

    def __init__(self, ring: PolyRing, generators: Iterable = ()):
        self.ring = ring
        gens = []
        for g in generators:
            g = _as_poly(ring, g)
            if g:
                gens.append(g)
        self.generators = tuple(gens)
        self._gb: dict = {}

    # -- Gröbner data --------------------------------------------------------

    def groebner(self, order: MonomialOrder | None = None) -> tuple:
        order = order or self.ring.order
        gb = self._gb.get(order)
        if gb is None:
            raw = buchberger([g.as_dict() for g in self.generators], order, ring=self.ring)
            gb = tuple(Polynomial(self.ring, p) for p in raw)
            self._gb[order] = gb
        return gb

    def reduce(self, f, order: MonomialOrder | None = None) -> Polynomial:
        """Normal form of ``f`` modulo the reduced basis for ``order``."""
        order = order or self.ring.order
        f = _as_poly(self.ring, f)
        gb = self.groebner(order)
        reducers = []
        for g in gb:
            lm = g.leading_monomial(order)
            reducers.append(_as_reducer(lm, g.as_dict()))
        return Polynomial(self.ring, _reduce(f.as_dict(), reducers, order.key))

    def contains(self, f) -> bool:
        return not self.reduce(f)

    def __contains__(self, f) -> bool:
        return self.contains(f)

    def contains_ideal(self, other: "Ideal") -> bool:
        self._check(other)
        return all(self.contains(g) for g in other.generators)

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        gb = self.groebner()
        return len(gb) == 1 and gb[0].is_constant()

    def leading_monomials(self, order: MonomialOrder | None = None) -> list:
        order = order or self.ring.order
        return [g.leading_monomial(order) for g in self.groebner(order)]

    def equals(self, other: "Ideal") -> bool:
        self._check(other)
        return self.groebner() == other.groebner()

    def __eq__(self, other):
        if not isinstance(other, Ideal) or other.ring != self.ring:
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def _check(self, other: "Ideal"):
        if other.ring != self.ring:
            raise RingMismatchError("ideals live in different rings")

    # -- constructions --------------------------------------------------------

    def __add__(self, other: "Ideal") -> "Ideal":
        return ideal_sum(self, other)

    def __mul__(self, other: "Ideal") -> "Ideal":
        return ideal_product(self, other)

    def intersect(self, other: "Ideal") -> "Ideal":
        return ideal_intersection(self, other)

    def quotient(self, other) -> "Ideal":
        return ideal_quotient(self, other)

    def saturate(self, other) -> "Ideal":
        return saturation(self, other)[0]

    def eliminate(self, names: Iterable[str]) -> "Ideal":
        return eliminate(self, names)

    def map(self, fn) -> "Ideal":
        gens = [fn(g) for g in self.generators]
        ring = gens[0].ring if gens else self.ring
        return Ideal(ring, gens)

    def to_ring(self, ring: PolyRing) -> "Ideal":
        return Ideal(ring, [ring.convert(g) for g in self.generators])

    def __repr__(self):
        return f"Ideal({format_ideal(self, reduce=False)})"

    def __str__(self):
        return format_ideal(self)


def _ideal(ring, gens) -> Ideal:
    return gens if isinstance(gens, Ideal) else Ideal(ring, gens)


def groebner_basis(I: Ideal, order: MonomialOrder | None = None) -> tuple:
    return I.groebner(order)


def normal_form(f, I: Ideal, order: MonomialOrder | None = None) -> Polynomial:
    return I.reduce(f, order)


def ideal_membership(f, I: Ideal) -> bool:
    return I.contains(f)


def ideal_sum(I: Ideal, J: Ideal) -> Ideal:
    I._check(J)
    return Ideal(I.ring, I.generators + J.generators)


def ideal_product(I: Ideal, J: Ideal) -> Ideal:
    I._check(J)
    return Ideal(I.ring, [f * g for f in I.generators for g in J.generators])


def elimination_order(ring: PolyRing, names: Iterable[str]) -> MonomialOrder:
    return MonomialOrder.block(ring, [list(names)])


def eliminate(I: Ideal, names: Iterable[str]) -> Ideal:
    """I ∩ K[remaining variables], as an ideal of the smaller ring."""
    names = set(names)
    for v in names:
        I.ring.index(v)
    names = [v for v in I.ring.variables if v in names]
    sub = I.ring.without(names)
    if not names:
        return Ideal(sub, [sub.convert(g) for g in I.generators])
    order = elimination_order(I.ring, names)
    ix = [I.ring.index(v) for v in names]
    keep = []
    for g in I.groebner(order):
        if all(all(e[i] == 0 for i in ix) for e in g.as_dict()):
            keep.append(sub.convert(g))
    return Ideal(sub, keep)


def ideal_intersection(I: Ideal, J: Ideal) -> Ideal:
    """I ∩ J via t·I + (1 − t)·J with t eliminated."""
    I._check(J)
    if I.is_zero() or J.is_zero():
        return Ideal(I.ring)
    ring = I.ring
    t = ring.fresh_name("T")
    big = ring.extend([t], front=True)
    T = big.gen(t)
    gens = [T * big.convert(f) for f in I.generators] + [(1 - T) * big.convert(g) for g in J.generators]
    res = eliminate(Ideal(big, gens), [t])
    return Ideal(ring, [ring.convert(g) for g in res.generators])


def _quotient_principal(I: Ideal, g: Polynomial) -> Ideal:
    if g.is_constant():
        return Ideal(I.ring, I.generators)
    if I.contains(g):
        return Ideal(I.ring, [I.ring.one()])
    inter = ideal_intersection(I, Ideal(I.ring, [g]))
    return Ideal(I.ring, [divide_exact(h, g) for h in inter.groebner()])


def ideal_quotient(I: Ideal, J) -> Ideal:
    """(I : J) = {f : f·J ⊆ I}."""
    J = _ideal(I.ring, J)
    I._check(J)
    if J.is_zero():
        raise ValueError("quotient by the zero ideal")
    result = None
    for g in J.groebner():
        q = _quotient_principal(I, g)
        result = q if result is None else ideal_intersection(result, q)
        if result.is_zero():
            break
    return result


def saturation(I: Ideal, J) -> tuple:
    """(I : J^∞) and the first k with I : J^k = I : J^(k+1)."""
    J = _ideal(I.ring, J)
    current = I
    k = 0
    while True:
        nxt = ideal_quotient(current, J)
        if nxt.equals(current):
            return current, k
        current = nxt
        k += 1


def saturate_by_blocks(I: Ideal, blocks: Iterable[Iterable[str]]) -> Ideal:
    """Saturate by each block's irrelevant ideal in turn until nothing changes."""
    blocks = [tuple(b) for b in blocks]
    current = I
    while True:
        before = current
        for b in blocks:
            current = saturation(current, Ideal(I.ring, [I.ring.gen(v) for v in b]))[0]
        if current.equals(before):
            return current


def radical_contains(I: Ideal, f) -> bool:
    """f ∈ rad(I), by the Rabinowitsch trick: 1 ∈ I + (1 − s·f)."""
    f = _as_poly(I.ring, f)
    s = I.ring.fresh_name("S")
    big = I.ring.extend([s])
    gens = [big.convert(g) for g in I.generators] + [1 - big.gen(s) * big.convert(f)]
    return Ideal(big, gens).is_unit()


def s_pair_certificate(basis: Sequence[Polynomial], order: MonomialOrder) -> bool:
    """True iff every S-polynomial of ``basis`` reduces to zero against it."""
    if not basis:
        return True
    key = order.key
    items = []
    for g in basis:
        lm, p = _monic(g.as_dict(), key)
        items.append((lm, p))
    reducers = [_as_reducer(lm, p) for lm, p in items]
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            s = _spoly(items[i][0], items[i][1], items[j][0], items[j][1])
            if _reduce(s, reducers, key):
                return False
    return True


def is_reduced_basis(basis: Sequence[Polynomial], order: MonomialOrder) -> bool:
    """Monic, and no term of any element divisible by another element's lead."""
    lms = [g.leading_monomial(order) for g in basis]
    for i, g in enumerate(basis):
        if g.leading_coefficient(order) != 1:
            return False
        for e in g.as_dict():
            for j, lm in enumerate(lms):
                if i != j and _divides(lm, e):
                    return False
    return True


# ---------------------------------------------------------------------------
# Hilbert series and dimension


def _minimalize(mons) -> list:
    mons = sorted(set(mons), key=sum)
    out = []
    for m in mons:
        if all(not _divides(o, m) for o in out):
            out.append(m)
    return out


def _upoly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _upoly_add(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _trim(a: list) -> list:
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def hilbert_numerator(mons: Iterable[tuple]) -> list:
    """Numerator N(t) of the Hilbert series N(t)/(1-t)^n of K[x]/(mons).

    Coefficients low degree first.  Standard recursion
    N(M + m) = N(M) - t^deg(m) N(M : m), with a coprime base case.
    """
    memo: dict = {}

    def rec(ms: tuple) -> list:
        if not ms:
            return [1]
        hit = memo.get(ms)
        if hit is not None:
            return hit
        if any(sum(m) == 0 for m in ms):
            return [0]
        support = [set(i for i, x in enumerate(m) if x) for m in ms]
        coprime = all(not (support[i] & support[j]) for i in range(len(ms)) for j in range(i + 1, len(ms)))
        if coprime:
            res = [1]
            for m in ms:
                d = sum(m)
                res = _upoly_mul(res, [1] + [0] * (d - 1) + [-1])
        else:
            m = ms[-1]
            rest = ms[:-1]
            colon = tuple(_minimalize(tuple(max(a - b, 0) for a, b in zip(r, m)) for r in rest))
            a = rec(rest)
            b = rec(colon)
            d = sum(m)
            res = _upoly_add(a, [0] * d + [-x for x in b])
        res = _trim(res)
        memo[ms] = res
        return res

    return rec(tuple(_minimalize(mons)))


def _binomial_poly(a: int, k: int) -> list:
    """Coefficients (low first) of C(s + a, k) as a polynomial in s."""
    poly = [Fraction(1)]
    for j in range(k):
        # multiply by (s + a - j)
        c = a - j
        new = [Fraction(0)] * (len(poly) + 1)
        for i, x in enumerate(poly):
            new[i] += x * c
            new[i + 1] += x
        poly = new
    f = factorial(k)
    return [x / f for x in poly]


@dataclass(frozen=True)
class HilbertData:
    numerator: tuple            # N(t) over (1-t)^nvars, low degree first
    reduced_numerator: tuple    # h(t) over (1-t)^krull_dimension
    hilbert_polynomial: tuple   # Fractions, low degree first; () for the zero polynomial
    dimension: int              # projective dimension = deg HP (-1 when empty)
    degree: int                 # h(1); 0 when empty
    regularity_bound: int       # HP(s) = HF(s) for all s >= this
    nvars: int
    krull_dimension: int        # of K[x]/I; -1 for the unit ideal

    def polynomial_value(self, s: int) -> Fraction:
        return sum((c * s ** i for i, c in enumerate(self.hilbert_polynomial)), Fraction(0))

    def hilbert_function(self, s: int) -> int:
        d = self.dimension + 1
        h = self.reduced_numerator
        if d <= 0:
            return h[s] if 0 <= s < len(h) else 0
        return sum(c * comb(s - i + d - 1, d - 1) for i, c in enumerate(h) if s - i >= 0)

    def format_polynomial(self, var: str = "n") -> str:
        if not self.hilbert_polynomial:
            return "0"
        parts = []
        for i in range(len(self.hilbert_polynomial) - 1, -1, -1):
            c = self.hilbert_polynomial[i]
            if not c:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            a = abs(c)
            body = str(a) if not mono else (mono if a == 1 else f"{a}*{mono}")
            if not parts:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(parts)


def _series_data(mons, nvars: int) -> HilbertData:
    num = hilbert_numerator(mons)
    if num == [0]:
        return HilbertData((0,), (0,), (), -1, 0, 0, nvars, -1)
    h = list(num)
    k = 0
    while sum(h) == 0 and k < nvars:
        # divide by (1 - t)
        q = []
        acc = 0
        for c in h[:-1]:
            acc += c
            q.append(acc)
        h = _trim(q) if q else [0]
        k += 1
    d = nvars - k
    if d == 0:
        hp: tuple = ()
    else:
        coeffs = [Fraction(0)] * d
        for i, c in enumerate(h):
            if c:
                for j, x in enumerate(_binomial_poly(d - 1 - i, d - 1)):
                    coeffs[j] += c * x
        hp = tuple(_trim(coeffs)) if any(coeffs) else ()
    reg = max(len(h) - 1 - d + 1, 0)
    return HilbertData(tuple(num), tuple(h), hp, d - 1, sum(h), reg, nvars, d)


def is_homogeneous_ideal(I: Ideal) -> bool:
    return all(g.is_homogeneous() for g in I.groebner())


def hilbert(I: Ideal) -> HilbertData:
    """Hilbert series/polynomial of K[x]/I for a homogeneous ideal (standard grading)."""
    if not is_homogeneous_ideal(I):
        raise NotHomogeneousError("hilbert() needs a homogeneous ideal")
    return _series_data(I.leading_monomials(MonomialOrder.grevlex()), I.ring.nvars)


def krull_dimension(I: Ideal) -> int:
    """Krull dimension of K[x]/I (-1 for the unit ideal)."""
    return _series_data(I.leading_monomials(MonomialOrder.grevlex()), I.ring.nvars).krull_dimension


def standard_monomials(I: Ideal, order: MonomialOrder | None = None, limit: int = 1_000_000) -> list:
    """Monomials outside the initial ideal; I must be zero-dimensional."""
    order = order or I.ring.order
    lms = I.leading_monomials(order)
    n = I.ring.nvars
    if lms and all(sum(m) == 0 for m in lms):
        return []
    for i in range(n):
        if not any(m[i] > 0 and sum(m) == m[i] for m in lms):
            raise NotZeroDimensionalError("ideal is not zero-dimensional")
    out = []
    stack = [(0,) * n]
    seen = {stack[0]}
    while stack:
        m = stack.pop()
        if any(_divides(l, m) for l in lms):
            continue
        out.append(m)
        if len(out) > limit:
            raise GroebnerLimitError("too many standard monomials")
        for i in range(n):
            mm = m[:i] + (m[i] + 1,) + m[i + 1:]
            if mm not in seen:
                seen.add(mm)
                stack.append(mm)
    return sorted(out, key=order.key, reverse=True)


def vector_space_degree(I: Ideal) -> int:
    """dim_K K[x]/I for a zero-dimensional ideal."""
    return len(standard_monomials(I))


# ---------------------------------------------------------------------------
# printing


def format_ideal(I: Ideal, order: MonomialOrder | None = None, reduce: bool = True) -> str:
    """Canonical text of the reduced basis: "0" for the zero ideal, "1" for the unit ideal."""
    gens = I.groebner(order) if reduce else I.generators
    if not gens:
        return "0"
    return ", ".join(format_polynomial(g) for g in gens)


print_ideal = format_ideal


def print_gb(I: Ideal, order: MonomialOrder | None = None) -> str:
    return format_ideal(I, order)
