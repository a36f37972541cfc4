"""Exact multivariate polynomials over Q or a prime field.

Polynomials are immutable values bound to a :class:`PolyRing`.  Internally a
polynomial is a dict mapping exponent tuples to nonzero coefficients; the
canonical term list is produced on demand by sorting under a
:class:`MonomialOrder` (grevlex unless the ring says otherwise).

Text grammar accepted by :func:`parse_polynomial`::

    expr    = [sign] term { ("+" | "-") term } ;
    term    = factor { ("*" | "/") factor | implicit } ;
    implicit= "(" expr ")"            (* after any factor *)
            | name | number ;         (* only after a ")" *)
    factor  = sign factor | atom [ ("^" | "**") integer ] ;
    atom    = number | name | "(" expr ")" ;
    number  = digit { digit } ;
    name    = letter { letter | digit | "_" } ;

Division is only allowed by nonzero constants, so ``1/2*x`` and ``x/3`` are
fine but ``x/y`` is a syntax error.
"""
from __future__ import annotations

import random as _random

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

try:  # gmpy2 is an order of magnitude faster than Fraction
    from gmpy2 import mpq as _rational
except ImportError:  # pragma: no cover
    _rational = Fraction

MAX_EXPONENT = 2**16 - 1
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class PolynomialError(ValueError):
    """Base class for errors raised by the polynomial layer."""


class ParseError(PolynomialError):
    def __init__(self, message: str, text: str = "", position: int = 0):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position}")


class ExponentOverflowError(PolynomialError):
    pass


class RingMismatchError(PolynomialError):
    pass


# ---------------------------------------------------------------------------
# coefficient fields


class ModP:
    """An element of the prime field F_p."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.value = value % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, ModP):
            return other.value
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction) or hasattr(other, "denominator"):
            return other.numerator * pow(other.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else ModP(self.value * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o % self.p == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return ModP(self.value * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        return ModP(self._coerce(other), self.p) / self

    def __neg__(self):
        return ModP(-self.value, self.p)

    def __pow__(self, n: int):
        return ModP(pow(self.value, n, self.p), self.p)

    def __bool__(self):
        return self.value != 0

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return (self.value - o) % self.p == 0

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"ModP({self.value}, {self.p})"

    def __str__(self):
        return str(self.value)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):  # deterministic below 3.4e14
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class CoefficientField:
    """Q when ``p`` is None, otherwise F_p for a prime p < 2^31."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, int) or not _is_prime(self.p):
                raise ValueError(f"{self.p!r} is not a prime")
            if self.p >= 2**31:
                raise ValueError("prime field characteristic must be < 2^31")

    @property
    def is_rational(self) -> bool:
        return self.p is None

    @property
    def label(self) -> str:
        return "Q" if self.p is None else f"F_{self.p}"

    def __call__(self, x):
        if self.p is None:
            if isinstance(x, ModP):
                raise TypeError("cannot coerce an F_p element into Q")
            return _rational(x)
        if isinstance(x, ModP):
            if x.p != self.p:
                raise TypeError("mixing different prime fields")
            return x
        if isinstance(x, int):
            return ModP(x, self.p)
        x = Fraction(x)
        return ModP(x.numerator * pow(x.denominator, -1, self.p), self.p)

    def __str__(self):
        return self.label


QQ = CoefficientField()


def GF(p: int) -> CoefficientField:
    return CoefficientField(p)


def _coeff_str(c) -> str:
    return str(c)


def _is_negative(c) -> bool:
    return not isinstance(c, ModP) and c < 0


# ---------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """A monomial order, used through :meth:`key`.

    ``key(e1) > key(e2)`` iff the monomial with exponents ``e1`` is larger.
    Block orders compare blocks left to right, each with its own inner
    order (lex or grevlex).
    """

    __slots__ = ("kind", "blocks", "_key", "_cache")

    def __init__(self, kind: str, blocks: tuple = ()):
        if kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown monomial order {kind!r}")
        self.kind = kind
        self.blocks = tuple((tuple(ix), inner) for ix, inner in blocks)
        for _, inner in self.blocks:
            if inner not in ("lex", "grevlex"):
                raise ValueError(f"unknown inner order {inner!r}")
        self._cache = {}
        if kind == "lex":
            self._key = _lex_key
        elif kind == "grevlex":
            self._key = _grevlex_key
        else:
            parts = [(ix, _lex_key if inner == "lex" else _grevlex_key) for ix, inner in self.blocks]

            def _block_key(exp, parts=parts):
                return tuple(f(tuple(exp[i] for i in ix)) for ix, f in parts)

            self._key = _block_key

    @classmethod
    def lex(cls) -> "MonomialOrder":
        return cls("lex")

    @classmethod
    def grevlex(cls) -> "MonomialOrder":
        return cls("grevlex")

    @classmethod
    def block(cls, ring: "PolyRing", groups: Iterable[Iterable[str]], inner: str = "grevlex") -> "MonomialOrder":
        """Elimination-style order: earlier groups dominate later ones.

        Variables not mentioned in ``groups`` form a trailing group.
        """
        seen: list[int] = []
        blocks = []
        for group in groups:
            ix = tuple(ring.index(v) for v in group)
            if ix:
                blocks.append((ix, inner))
                seen.extend(ix)
        rest = tuple(i for i in range(ring.nvars) if i not in seen)
        if rest:
            blocks.append((rest, inner))
        if len(set(seen)) != len(seen):
            raise ValueError("block order groups overlap")
        return cls("block", tuple(blocks))

    def key(self, exp):
        k = self._cache.get(exp)
        if k is None:
            if len(self._cache) > 500_000:
                self._cache.clear()
            k = self._cache[exp] = self._key(exp)
        return k

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.blocks) == (other.kind, other.blocks)

    def __hash__(self):
        return hash((self.kind, self.blocks))

    def __repr__(self):
        if self.kind == "block":
            return f"MonomialOrder.block({[list(ix) for ix, _ in self.blocks]})"
        return f"MonomialOrder.{self.kind}()"


def _lex_key(exp):
    return tuple(exp)


def _grevlex_key(exp):
    return (sum(exp), tuple(-e for e in reversed(exp)))


# ---------------------------------------------------------------------------
# rings


@dataclass(frozen=True)
class Block:
    kind: str  # "projective" or "affine"
    variables: tuple

    def __post_init__(self):
        if self.kind not in ("projective", "affine"):
            raise ValueError(f"block kind must be projective or affine, got {self.kind!r}")
        object.__setattr__(self, "variables", tuple(self.variables))


class PolyRing:
    """K[x_1..x_n] with a partition of the variables into grading blocks."""

    def __init__(self, variables: Iterable[str], field: CoefficientField = QQ,
                 blocks: Iterable[Block] | None = None, order: MonomialOrder | None = None):
        variables = tuple(variables)
        for v in variables:
            if not isinstance(v, str) or not _NAME_RE.match(v):
                raise ValueError(f"invalid variable name {v!r}")
        if len(set(variables)) != len(variables):
            raise ValueError("variable names must be unique")
        if blocks is None:
            blocks = (Block("affine", variables),) if variables else ()
        blocks = tuple(blocks)
        flat = [v for b in blocks for v in b.variables]
        if sorted(flat) != sorted(variables):
            raise ValueError("every variable must belong to exactly one grading block")
        self.variables = variables
        self.field = field
        self.blocks = blocks
        self.order = order if order is not None else MonomialOrder.grevlex()
        self._index = {v: i for i, v in enumerate(variables)}
        self._hash = hash((variables, field, blocks, self.order))

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PolynomialError(f"unknown variable {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, PolyRing) and self._hash == other._hash
                and (self.variables, self.field, self.blocks, self.order)
                == (other.variables, other.field, other.blocks, other.order))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"PolyRing({list(self.variables)}, field={self.field.label})"

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.constant(1)

    def constant(self, c) -> "Polynomial":
        c = self.field(c)
        return Polynomial(self, {(0,) * self.nvars: c} if c else {})

    def gen(self, name: str) -> "Polynomial":
        exp = [0] * self.nvars
        exp[self.index(name)] = 1
        return Polynomial(self, {tuple(exp): self.field(1)})

    def gens(self) -> tuple:
        return tuple(self.gen(v) for v in self.variables)

    def __getitem__(self, name: str) -> "Polynomial":
        return self.gen(name)

    def monomial(self, exp, coeff=1) -> "Polynomial":
        c = self.field(coeff)
        return Polynomial(self, {tuple(exp): c} if c else {})

    def parse(self, text: str) -> "Polynomial":
        return parse_polynomial(text, self)

    def __call__(self, value) -> "Polynomial":
        """Coerce a string, scalar or polynomial of a subring into this ring."""
        if isinstance(value, Polynomial):
            return self.convert(value)
        if isinstance(value, str):
            return self.parse(value)
        return self.constant(value)

    def with_order(self, order: MonomialOrder) -> "PolyRing":
        return PolyRing(self.variables, self.field, self.blocks, order)

    def with_field(self, field: CoefficientField) -> "PolyRing":
        return PolyRing(self.variables, field, self.blocks, self.order)

    def block_of(self, name: str) -> Block:
        for b in self.blocks:
            if name in b.variables:
                return b
        raise PolynomialError(f"unknown variable {name!r}")

    def projective_blocks(self) -> tuple:
        return tuple(b for b in self.blocks if b.kind == "projective")

    def extend(self, names: Iterable[str], kind: str = "affine", front: bool = False) -> "PolyRing":
        names = tuple(names)
        clash = [n for n in names if n in self._index]
        if clash:
            raise ValueError(f"variables already present: {clash}")
        new_block = Block(kind, names)
        if front:
            return PolyRing(names + self.variables, self.field, (new_block,) + self.blocks)
        return PolyRing(self.variables + names, self.field, self.blocks + (new_block,))

    def without(self, names: Iterable[str]) -> "PolyRing":
        drop = set(names)
        for n in drop:
            self.index(n)
        blocks = []
        for b in self.blocks:
            kept = tuple(v for v in b.variables if v not in drop)
            if kept:
                blocks.append(Block(b.kind, kept))
        return PolyRing([v for v in self.variables if v not in drop], self.field, blocks)

    def fresh_name(self, stem: str = "T") -> str:
        name, i = stem, 0
        while name in self._index:
            i += 1
            name = f"{stem}{i}"
        return name

    def convert(self, f: "Polynomial") -> "Polynomial":
        """Move ``f`` into this ring, matching variables by name."""
        if f.ring == self:
            return f
        src = f.ring
        perm = []
        for i, v in enumerate(src.variables):
            if v in self._index:
                perm.append((i, self._index[v]))
        used = f.variables()
        missing = [v for v in used if v not in self._index]
        if missing:
            raise RingMismatchError(f"variables {missing} are not in {self!r}")
        terms = {}
        n = self.nvars
        for exp, c in f._terms.items():
            e = [0] * n
            for i, j in perm:
                e[j] = exp[i]
            terms[tuple(e)] = self.field(c) if src.field != self.field else c
        return Polynomial(self, {k: v for k, v in terms.items() if v})


# ---------------------------------------------------------------------------
# polynomials


def _mono_str(ring: PolyRing, exp) -> str:
    parts = []
    for v, e in zip(ring.variables, exp):
        if e == 1:
            parts.append(v)
        elif e:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


class Polynomial:
    __slots__ = ("ring", "_terms", "_hash", "__weakref__")

    def __init__(self, ring: PolyRing, terms: Mapping | None = None):
        self.ring = ring
        self._terms = dict(terms) if terms else {}
        self._hash = None

    # -- basic access ------------------------------------------------------

    def terms(self, order: MonomialOrder | None = None) -> list:
        """(coefficient, exponent) pairs, strictly decreasing under ``order``."""
        key = (order or self.ring.order).key
        return [(self._terms[e], e) for e in sorted(self._terms, key=key, reverse=True)]

    def as_dict(self) -> dict:
        return dict(self._terms)

    def leading_monomial(self, order: MonomialOrder | None = None):
        if not self._terms:
            raise PolynomialError("zero polynomial has no leading monomial")
        return max(self._terms, key=(order or self.ring.order).key)

    def leading_coefficient(self, order: MonomialOrder | None = None):
        return self._terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder | None = None) -> "Polynomial":
        if not self._terms:
            return self
        lc = self.leading_coefficient(order)
        if lc == 1:
            return self
        return Polynomial(self.ring, {e: c / lc for e, c in self._terms.items()})

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self):
        if not self.is_constant():
            raise PolynomialError("polynomial is not constant")
        return next(iter(self._terms.values())) if self._terms else self.ring.field(0)

    def coefficient(self, exp):
        return self._terms.get(tuple(exp), self.ring.field(0))

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree(self, var: str) -> int:
        i = self.ring.index(var)
        if not self._terms:
            return -1
        return max(e[i] for e in self._terms)

    def block_degrees(self, names: Iterable[str]) -> set:
        ix = [self.ring.index(v) for v in names]
        return {sum(e[i] for i in ix) for e in self._terms}

    def is_homogeneous(self, names: Iterable[str] | None = None) -> bool:
        if names is None:
            names = self.ring.variables
        return len(self.block_degrees(names)) <= 1

    def variables(self) -> tuple:
        used = [False] * self.ring.nvars
        for e in self._terms:
            for i, x in enumerate(e):
                if x:
                    used[i] = True
        return tuple(v for v, u in zip(self.ring.variables, used) if u)

    # -- arithmetic --------------------------------------------------------

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"{other.ring!r} != {self.ring!r}")
            return other
        if isinstance(other, (int, Fraction, ModP)) or type(other) is type(_rational(0)):
            return self.ring.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for e, c in small.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def _max_exp(self) -> int:
        return max((max(e) for e in self._terms), default=0) if self.ring.nvars else 0

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return self.ring.zero()
        if self._max_exp() + other._max_exp() > MAX_EXPONENT:
            out = _mul_terms(self._terms, other._terms)
            for e in out:
                if any(x > MAX_EXPONENT for x in e):
                    raise ExponentOverflowError(f"exponent exceeds {MAX_EXPONENT}")
            return Polynomial(self.ring, out)
        return Polynomial(self.ring, _mul_terms(self._terms, other._terms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a nonzero scalar or constant polynomial."""
        if isinstance(other, Polynomial):
            other = other.constant_value()
        c = self.ring.field(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return Polynomial(self.ring, {e: v / c for e, v in self._terms.items()})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise PolynomialError("exponent must be a nonnegative integer")
        if n and self._max_exp() * n > MAX_EXPONENT:
            raise ExponentOverflowError(f"exponent exceeds {MAX_EXPONENT}")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self._terms == other._terms
        try:
            other = self._lift(other)
        except (TypeError, ValueError):
            return False
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    def scale_monomial(self, exp, coeff=1) -> "Polynomial":
        c = self.ring.field(coeff)
        return Polynomial(self.ring, {tuple(a + b for a, b in zip(e, exp)): v * c
                                     for e, v in self._terms.items()})

    # -- calculus and substitution -----------------------------------------

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a point given as {variable: scalar}."""
        field = self.ring.field
        pt = []
        for v in self.ring.variables:
            pt.append(field(values[v]) if v in values else None)
        total = field(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    if x is None:
                        raise PolynomialError("missing value for a variable of the polynomial")
                    term = term * x ** k
            total = total + term
        return total

    def substitute(self, mapping: Mapping[str, object], ring: PolyRing | None = None) -> "Polynomial":
        return substitute(self, mapping, ring)

    def derivative(self, var: str) -> "Polynomial":
        return partial_derivative(self, var)

    def homogenize(self, block: Iterable[str], aux: str) -> "Polynomial":
        return homogenize(self, block, aux)

    def dehomogenize(self, var: str, value=1) -> "Polynomial":
        return dehomogenize(self, var, value)

    def coefficients_in(self, names: Iterable[str]) -> dict:
        """Split as sum of monomials in ``names`` times coefficients free of them.

        Returns {exponent tuple over ``names``: Polynomial}.
        """
        ix = [self.ring.index(v) for v in names]
        ixset = set(ix)
        out: dict = {}
        for e, c in self._terms.items():
            key = tuple(e[i] for i in ix)
            rest = tuple(0 if i in ixset else x for i, x in enumerate(e))
            out.setdefault(key, {})[rest] = c
        return {k: Polynomial(self.ring, v) for k, v in out.items()}

    # -- printing ----------------------------------------------------------

    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"


def _mul_terms(a: dict, b: dict) -> dict:
    out: dict = {}
    get = out.get
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            s = get(e)
            out[e] = ca * cb if s is None else s + ca * cb
    return {e: c for e, c in out.items() if c}


def format_polynomial(f: Polynomial, order: MonomialOrder | None = None) -> str:
    """Canonical text: descending terms, explicit ``*`` and ``^``."""
    if not f._terms:
        return "0"
    out = []
    for c, e in f.terms(order):
        neg = _is_negative(c)
        a = -c if neg else c
        mono = _mono_str(f.ring, e)
        if not mono:
            body = _coeff_str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_coeff_str(a)}*{mono}"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def format_grouped(f: Polynomial, names: Iterable[str], order: MonomialOrder | None = None) -> str:
    """Print ``f`` collected by monomials in ``names``.

    Groups appear in the order of their leading terms in ``f``; each group's
    coefficient is made sign-positive, e.g. ``E1*(a - a2) - E0*(b - b2)``.
    """
    names = tuple(names)
    if not f._terms:
        return "0"
    groups = f.coefficients_in(names)
    sub = PolyRing(names, f.ring.field) if names else None
    position = {e: i for i, (_, e) in enumerate(f.terms(order))}
    ix = [f.ring.index(v) for v in names]

    ordered = []
    for key, coef in groups.items():
        full = []
        for e in coef._terms:
            ee = list(e)
            for j, i in enumerate(ix):
                ee[i] = key[j]
            full.append(position[tuple(ee)])
        ordered.append((min(full), key, coef))
    ordered.sort()
    out = []
    for _, key, coef in ordered:
        lc = coef.terms(order)[0][0]
        neg = _is_negative(lc)
        if neg:
            coef = -coef
        mono = _mono_str(sub, key) if sub is not None else ""
        cstr = format_polynomial(coef, order)
        if not mono:
            body = cstr if len(coef) == 1 or not out else f"({cstr})"
        elif coef.is_constant():
            c = coef.constant_value()
            body = mono if c == 1 else f"{_coeff_str(c)}*{mono}"
        elif len(coef) == 1:
            body = f"{mono}*{cstr}"
        else:
            body = f"{mono}*({cstr})"
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# operations


def substitute(f: Polynomial, mapping: Mapping[str, object], ring: PolyRing | None = None) -> Polynomial:
    """Ring homomorphism sending each variable of ``f`` to its image.

    Images are polynomials of one common target ring (or scalars).  Variables
    of ``f`` missing from ``mapping`` are an error unless ``ring`` is None,
    in which case they map to themselves.
    """
    images = {}
    target = ring
    for v, img in mapping.items():
        if isinstance(img, Polynomial):
            if target is None:
                target = img.ring
            elif img.ring != target:
                raise RingMismatchError("substitution images live in different rings")
        images[v] = img
    if target is None:
        target = f.ring
    used = f.variables()
    imgs = []
    for v in f.ring.variables:
        if v in images:
            img = images[v]
            imgs.append(img if isinstance(img, Polynomial) else target.constant(img))
        elif v not in used:
            imgs.append(None)
        elif ring is None and target == f.ring:
            imgs.append(f.ring.gen(v))
        elif v in target:
            imgs.append(target.gen(v))
        else:
            raise PolynomialError(f"no image given for variable {v!r}")
    powers: list[dict] = [dict() for _ in imgs]
    out: dict = {}
    tf = target.field
    same_field = tf == f.ring.field
    for e, c in f._terms.items():
        term = {(0,) * target.nvars: c if same_field else tf(c)}
        for i, k in enumerate(e):
            if not k:
                continue
            p = powers[i].get(k)
            if p is None:
                p = powers[i][k] = imgs[i] ** k
            term = _mul_terms(term, p._terms)
            if not term:
                break
        for te, tc in term.items():
            s = out.get(te)
            out[te] = tc if s is None else s + tc
    return Polynomial(target, {e: c for e, c in out.items() if c})


def partial_derivative(f: Polynomial, var: str) -> Polynomial:
    i = f.ring.index(var)
    out = {}
    for e, c in f._terms.items():
        k = e[i]
        if k:
            d = c * k
            if d:
                out[e[:i] + (k - 1,) + e[i + 1:]] = d
    return Polynomial(f.ring, out)


def homogenize(f: Polynomial, block: Iterable[str], aux: str) -> Polynomial:
    """Homogenize ``f`` in the variables of ``block`` using ``aux`` (a member of the block)."""
    block = tuple(block)
    if aux not in block:
        raise PolynomialError(f"{aux!r} is not in the block {block}")
    ix = [f.ring.index(v) for v in block]
    a = f.ring.index(aux)
    if not f._terms:
        return f
    degs = {e: sum(e[i] for i in ix) for e in f._terms}
    top = max(degs.values())
    out = {}
    for e, c in f._terms.items():
        ee = list(e)
        ee[a] += top - degs[e]
        out[tuple(ee)] = c
    if top > MAX_EXPONENT:
        raise ExponentOverflowError(f"exponent exceeds {MAX_EXPONENT}")
    return Polynomial(f.ring, out)


def dehomogenize(f: Polynomial, var: str, value=1) -> Polynomial:
    i = f.ring.index(var)
    val = f.ring.field(value)
    out: dict = {}
    for e, c in f._terms.items():
        k = e[i]
        ee = e[:i] + (0,) + e[i + 1:]
        cc = c * val ** k if k else c
        s = out.get(ee)
        out[ee] = cc if s is None else s + cc
    return Polynomial(f.ring, {e: c for e, c in out.items() if c})


def divide_exact(f: Polynomial, g: Polynomial) -> Polynomial:
    """Return q with f = q*g, raising PolynomialError if g does not divide f."""
    q, r = divmod_poly(f, g)
    if r:
        raise PolynomialError("polynomial does not divide exactly")
    return q


def divmod_poly(f: Polynomial, g: Polynomial, order: MonomialOrder | None = None):
    """Multivariate division of f by a single g."""
    if not g._terms:
        raise ZeroDivisionError("division by the zero polynomial")
    order = order or MonomialOrder.lex()
    key = order.key
    lm = max(g._terms, key=key)
    lc = g._terms[lm]
    gt = list(g._terms.items())
    p = dict(f._terms)
    q: dict = {}
    r: dict = {}
    while p:
        m = max(p, key=key)
        c = p[m]
        if all(a >= b for a, b in zip(m, lm)):
            shift = tuple(a - b for a, b in zip(m, lm))
            t = c / lc
            q[shift] = t
            for e, a in gt:
                ee = tuple(x + y for x, y in zip(e, shift))
                v = p.get(ee, 0) - t * a
                if v:
                    p[ee] = v
                else:
                    p.pop(ee, None)
        else:
            r[m] = p.pop(m)
    return Polynomial(f.ring, q), Polynomial(f.ring, r)


# ---------------------------------------------------------------------------
# parser


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, ring: PolyRing):
        self.text = text
        self.ring = ring
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            self.error("empty expression")
        f = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return f

    def expr(self) -> Polynomial:
        tok = self.peek()
        neg = False
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            neg = tok[1] == "-"
        f = self.term()
        if neg:
            f = -f
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                g = self.term()
                f = f + g if tok[1] == "+" else f - g
            else:
                return f

    def term(self) -> Polynomial:
        f, closed = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                g, closed = self.factor()
                f = f * g
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                g, closed = self.factor()
                if not g.is_constant():
                    self.error("division by a non-constant expression", tok)
                if g.is_zero():
                    self.error("division by zero", tok)
                f = f / g.constant_value()
            elif tok[0] == "op" and tok[1] == "(":
                g, closed = self.factor()
                f = f * g
            elif closed and tok[0] in ("name", "num"):
                g, closed = self.factor()
                f = f * g
            else:
                return f

    def factor(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            f, closed = self.factor()
            return (-f if tok[1] == "-" else f), closed
        f, closed = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            etok = self.take()
            if etok[0] != "num":
                self.error("exponent must be a nonnegative integer literal", etok)
            n = int(etok[1])
            if n > MAX_EXPONENT:
                raise ParseError(f"exponent overflow: {n} > {MAX_EXPONENT}", self.text, etok[2])
            try:
                f = f ** n
            except ExponentOverflowError as exc:
                raise ParseError(f"exponent overflow: {exc}", self.text, etok[2]) from None
            closed = False
        return f, closed

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return self.ring.constant(int(val)), False
        if kind == "name":
            if val not in self.ring:
                raise ParseError(f"unknown variable {val!r}", self.text, pos)
            return self.ring.gen(val), False
        if kind == "op" and val == "(":
            f = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                raise ParseError("expected ')'", self.text, close[2])
            return f, True
        if kind == "end":
            raise ParseError("unexpected end of input", self.text, pos)
        raise ParseError(f"unexpected token {val!r}", self.text, pos)


def parse_polynomial(text: str, ring: PolyRing) -> Polynomial:
    """Parse ``text`` into a canonical polynomial of ``ring``."""
    return _Parser(text, ring).parse()


def make_ring(spec: str | Iterable[str], field: CoefficientField = QQ) -> PolyRing:
    """Convenience: ``make_ring("x, y, z")`` -> single affine block."""
    if isinstance(spec, str):
        spec = [s.strip() for s in spec.replace(" ", ",").split(",") if s.strip()]
    return PolyRing(spec, field)


def random_polynomial(ring: PolyRing, rng, degree: int = 2, terms: int = 4, coeff_range: int = 5,
                      names: Iterable[str] | None = None) -> Polynomial:
    """A random polynomial for property tests and sampled checks."""
    names = tuple(names) if names is not None else ring.variables
    ix = [ring.index(v) for v in names]
    out: dict = {}
    for _ in range(terms):
        e = [0] * ring.nvars
        d = rng.randint(0, degree)
        for _ in range(d):
            e[ix[rng.randrange(len(ix))]] += 1
        c = rng.randint(-coeff_range, coeff_range)
        if c:
            out[tuple(e)] = out.get(tuple(e), 0) + c
    return Polynomial(ring, {e: ring.field(c) for e, c in out.items() if c})


def monomials_of_degree(n: int, d: int):
    """All exponent tuples of length n and total degree d."""
    if n == 0:
        if d == 0:
            yield ()
        return
    if n == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in monomials_of_degree(n - 1, d - k):
            yield (k,) + rest


# ---------------------------------------------------------------------------
# gcd over Q (or F_p) by content / primitive-part recursion


def _split(f: Polynomial, var: str) -> dict:
    """{degree in var: coefficient polynomial free of var}."""
    i = f.ring.index(var)
    out: dict = {}
    for e, c in f._terms.items():
        out.setdefault(e[i], {})[e[:i] + (0,) + e[i + 1:]] = c
    return {k: Polynomial(f.ring, v) for k, v in out.items()}


def _content(f: Polynomial, var: str) -> Polynomial:
    g = None
    for c in _split(f, var).values():
        g = c if g is None else gcd(g, c)
        if g.is_constant():
            return f.ring.one()
    return g if g is not None else f.ring.zero()


def _prem(a: Polynomial, b: Polynomial, var: str) -> Polynomial:
    parts_b = _split(b, var)
    db = max(parts_b)
    lcb = parts_b[db]
    i = a.ring.index(var)
    r = a
    while r:
        parts_r = _split(r, var)
        dr = max(parts_r)
        if dr < db:
            break
        e = [0] * a.ring.nvars
        e[i] = dr - db
        r = lcb * r - parts_r[dr] * b.scale_monomial(tuple(e))
    return r


def _normalize(f: Polynomial) -> Polynomial:
    return f.monic() if f else f


def _univariate_image(f: Polynomial, i: int, point: list) -> list:
    """Coefficients (low degree first) of f with every variable but x_i set to point."""
    field = f.ring.field
    out: dict = {}
    for e, c in f._terms.items():
        val = c
        for j, k in enumerate(e):
            if k and j != i:
                val = val * point[j] ** k
        out[e[i]] = out.get(e[i], field(0)) + val
    n = max(out) + 1 if out else 0
    return [out.get(k, field(0)) for k in range(n)]


def _univariate_gcd_degree(a: list, b: list) -> int:
    def trim(p):
        while p and not p[-1]:
            p.pop()
        return p

    a, b = trim(list(a)), trim(list(b))
    while b:
        while len(a) >= len(b) and a:
            q = a[-1] / b[-1]
            shift = len(a) - len(b)
            for k in range(len(b)):
                a[shift + k] = a[shift + k] - q * b[k]
            trim(a)
        a, b = b, a
    return len(a) - 1


def _coprime_by_specialization(f: Polynomial, g: Polynomial, tries: int = 3) -> bool:
    """Exact test that may say "don't know" (False).

    If x keeps both leading coefficients nonzero under a specialization of
    the other variables, deg_x gcd(f, g) is at most the degree of the gcd of
    the specialized univariate polynomials.  When that is 0 for every
    variable, the gcd is a constant.
    """
    ring = f.ring
    rng = _random.Random(0x5EED)
    for var in set(f.variables()) & set(g.variables()):
        i = ring.index(var)
        df, dg = f.degree(var), g.degree(var)
        for _ in range(tries):
            point = [ring.field(rng.randint(-97, 97)) for _ in range(ring.nvars)]
            a, b = _univariate_image(f, i, point), _univariate_image(g, i, point)
            if len(a) - 1 == df and len(b) - 1 == dg and a[-1] and b[-1]:
                if _univariate_gcd_degree(a, b) == 0:
                    break
        else:
            return False
    return True


def gcd(f: Polynomial, g: Polynomial) -> Polynomial:
    """Greatest common divisor, normalized to be monic in the ring's order."""
    if f.ring != g.ring:
        raise RingMismatchError("gcd of polynomials from different rings")
    if not f:
        return _normalize(g)
    if not g:
        return _normalize(f)
    if f.is_constant() or g.is_constant():
        return f.ring.one()
    if _coprime_by_specialization(f, g):
        return f.ring.one()
    used = set(f.variables()) | set(g.variables())
    var = [v for v in f.ring.variables if v in used][-1]
    if f.degree(var) <= 0:
        return gcd(f, _content(g, var))
    if g.degree(var) <= 0:
        return gcd(_content(f, var), g)
    cf, cg = _content(f, var), _content(g, var)
    c = gcd(cf, cg)
    a, b = divide_exact(f, cf), divide_exact(g, cg)
    if a.degree(var) < b.degree(var):
        a, b = b, a
    while True:
        r = _prem(a, b, var)
        if not r or r.degree(var) <= 0:
            break
        a, b = b, divide_exact(r, _content(r, var))
    if r:
        return _normalize(c)
    pp = divide_exact(b, _content(b, var))
    return _normalize(c * pp)
