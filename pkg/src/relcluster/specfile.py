"""Line-oriented spec documents: declarations plus an ordered query list.

One statement per line; a trailing backslash continues a line and ``#``
starts a comment.  Names must be declared before they are used.  Every
polynomial is parsed in the ring it belongs to and stored in canonical form,
so ``serialize(parse(text))`` is a fixpoint of parse-then-serialize.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .poly import GF, QQ, Block, CoefficientField, ParseError, PolynomialError, PolyRing, format_polynomial

NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_NAME_RE = re.compile(rf"^{NAME}$")

QUERY_KINDS = ("gb", "eliminate", "saturate", "hilbert", "image", "singular", "cartier", "blowup", "strict",
               "lift", "commute", "pair", "cluster", "stratify", "hirzebruch")
FLAGS = ("flat", "separated", "surjective", "generic_fibre_integral")


class SpecError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


# ---------------------------------------------------------------------------
# declarations


@dataclass
class AmbientDecl:
    name: str
    factors: list               # [(kind "P"/"A", (names...))]

    def render(self) -> str:
        body = " * ".join(f"{k}({', '.join(n)})" for k, n in self.factors)
        return f"ambient {self.name} = {body}"


@dataclass
class IdealDecl:
    name: str
    ambient: str
    generators: list            # canonical strings

    def render(self) -> str:
        return f"ideal {self.name} in {self.ambient} = {', '.join(self.generators) or '0'}"


@dataclass
class FamilyDecl:
    name: str
    total: str                  # ambient name
    ideal: str | None
    base: str
    projection: list            # [(var, canonical poly)]
    assume: dict = dc_field(default_factory=dict)

    def render(self) -> str:
        tot = self.total + (f" / {self.ideal}" if self.ideal else "")
        s = f"family {self.name} = {tot} -> {self.base} : {_render_assign(self.projection)}"
        if self.assume:
            s += " assume " + ", ".join(f"{k}={'true' if v else 'false'}" for k, v in sorted(self.assume.items()))
        return s


@dataclass
class SectionDecl:
    name: str
    family: str
    coordinates: list           # [(var, canonical poly in base ring)]

    def render(self) -> str:
        return f"section {self.name} of {self.family} : {_render_assign(self.coordinates)}"


@dataclass
class BlowupDecl:
    name: str
    source: str                 # ambient, ideal or family name
    centre: str                 # ideal name
    names: list | None

    def render(self) -> str:
        s = f"blowup {self.name} = {self.source} at {self.centre}"
        if self.names:
            s += " as " + ", ".join(self.names)
        return s


@dataclass
class PairsDecl:
    name: str
    family: str
    params: list
    sigma: list
    tau: list
    points: list | None         # list of tuples of Fractions
    random: tuple | None        # (count, bound)

    def render(self) -> str:
        s = (f"pairs {self.name} of {self.family} params {', '.join(self.params)} : "
             f"sigma ({_render_assign(self.sigma)}) tau ({_render_assign(self.tau)})")
        if self.points is not None:
            s += " points " + ", ".join("(" + ", ".join(str(x) for x in p) + ")" for p in self.points)
        else:
            s += f" random {self.random[0]} range {self.random[1]}"
        return s


@dataclass
class QueryDecl:
    kind: str
    args: dict
    line: int = 0

    def render(self) -> str:
        a = self.args
        k = self.kind
        if k in ("gb",):
            return f"query gb {a['ideal']}" + (f" {a['order']}" if a.get("order") != "grevlex" else "")
        if k in ("hilbert", "singular"):
            return f"query {k} {a['ideal']}"
        if k == "eliminate":
            return f"query eliminate {a['ideal']} : {', '.join(a['variables'])}"
        if k == "saturate":
            return f"query saturate {a['ideal']} : {a['by']}"
        if k == "image":
            return f"query image {a['section']}"
        if k == "cartier":
            return f"query cartier {a['ideal']}" + (f" in {a['within']}" if a.get("within") else "")
        if k == "blowup":
            return f"query blowup {a['blowup']}"
        if k == "strict":
            return f"query strict {a['blowup']} : {a['ideal']}"
        if k == "lift":
            return f"query lift {a['blowup']} : {a['section']}"
        if k == "commute":
            return f"query commute {a['blowup']} : {_render_values(a['values'])}"
        if k == "pair":
            return f"query pair {a['sigma']} {a['tau']}"
        if k == "cluster":
            steps = []
            for st in a["steps"]:
                s = ("lift " if st["lift"] else "") + st["section"]
                if st.get("names"):
                    s += " [" + ", ".join(st["names"]) + "]"
                if st.get("centre"):
                    s += " at " + st["centre"]
                steps.append(s)
            return f"query cluster {a['family']} : {', '.join(steps)}"
        if k == "stratify":
            if a.get("pairs"):
                return f"query stratify {a['pairs']}"
            return f"query stratify {a['family']} : " + ", ".join(f"{s} {t}" for s, t in a["list"])
        if k == "hirzebruch":
            return f"query hirzebruch {a['e']} : " + ", ".join(f"{n} {m}" for n, m in a["classes"])
        raise AssertionError(k)


def _render_assign(pairs) -> str:
    return ", ".join(f"{v} = {p}" for v, p in pairs)


def _render_values(pairs) -> str:
    return ", ".join(f"{v} = {x}" for v, x in pairs)


@dataclass
class SpecDocument:
    field: CoefficientField = QQ
    statements: list = dc_field(default_factory=list)

    @property
    def queries(self) -> list:
        return [s for s in self.statements if isinstance(s, QueryDecl)]

    def declarations(self, cls=None) -> dict:
        return {s.name: s for s in self.statements
                if not isinstance(s, QueryDecl) and (cls is None or isinstance(s, cls))}

    def serialize(self) -> str:
        lines = []
        if self.field.p is not None:
            lines.append(f"field Fp:{self.field.p}")
        lines += [s.render() for s in self.statements]
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        return isinstance(other, SpecDocument) and self.serialize() == other.serialize()


# ---------------------------------------------------------------------------
# parsing helpers


def parse_field(text: str) -> CoefficientField:
    t = text.strip()
    if t in ("Q", "QQ"):
        return QQ
    m = re.fullmatch(r"(?:Fp|GF|F):?(\d+)", t)
    if not m:
        raise ValueError(f"unknown field {text!r}; use Q or Fp:<prime>")
    return GF(int(m.group(1)))


def split_top(text: str, sep: str = ",") -> list:
    """Split on ``sep`` outside parentheses and brackets."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [p.strip() for p in out]


def logical_lines(text: str) -> list:
    """(line number, content) pairs with comments removed and continuations joined."""
    out = []
    buf, start = "", 0
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not buf:
            start = no
        if line.endswith("\\"):
            buf += line[:-1] + " "
            continue
        buf += line
        if buf.strip():
            out.append((start, buf))
        buf = ""
    if buf.strip():
        out.append((start, buf))
    return out


class _Parser:
    def __init__(self, text: str, field_override: CoefficientField | None = None):
        self.text = text
        self.field_override = field_override
        self.doc = SpecDocument(field_override or QQ)
        self.rings: dict = {}         # ambient name -> PolyRing
        self.kinds: dict = {}         # name -> declaration kind
        self.decls: dict = {}
        self.line = 0
        self.raw = ""

    # -- errors and small helpers
    def fail(self, msg: str, fragment: str | None = None, offset: int = 0):
        col = 1
        if fragment is not None:
            i = self.raw.find(fragment)
            if i >= 0:
                col = i + 1 + offset
        raise SpecError(msg, self.line, col)

    def check_name(self, name: str):
        if not _NAME_RE.match(name):
            self.fail(f"invalid name {name!r}", name)
        if name in self.kinds:
            self.fail(f"{name!r} is already declared", name)

    def need(self, name: str, *kinds: str):
        if name not in self.kinds:
            self.fail(f"undeclared name {name!r}", name)
        if kinds and self.kinds[name] not in kinds:
            have = self.kinds[name]
            article = "an" if have[0] in "aeiou" else "a"
            self.fail(f"{name!r} is {article} {have}, expected {' or '.join(kinds)}", name)
        return self.decls[name]

    def names(self, text: str) -> list:
        parts = [p for p in split_top(text)]
        for p in parts:
            if not _NAME_RE.match(p):
                self.fail(f"invalid name {p!r}", p)
        if len(set(parts)) != len(parts):
            self.fail("repeated name in list", text)
        return parts

    def poly(self, text: str, ring: PolyRing) -> str:
        try:
            return format_polynomial(ring.parse(text))
        except ParseError as exc:
            self.fail(f"{exc.message} in {text!r}", text, exc.position)
        except (PolynomialError, ValueError, ZeroDivisionError) as exc:
            self.fail(f"{exc} in {text!r}", text)

    def assignments(self, text: str, ring: PolyRing, allowed=None) -> list:
        out = []
        seen = set()
        for part in split_top(text):
            if "=" not in part:
                self.fail(f"expected 'name = polynomial', got {part!r}", part)
            var, val = (s.strip() for s in part.split("=", 1))
            if not _NAME_RE.match(var):
                self.fail(f"invalid coordinate name {var!r}", part)
            if var in seen:
                self.fail(f"coordinate {var!r} assigned twice", part)
            if allowed is not None and var not in allowed:
                self.fail(f"{var!r} is not a coordinate here", part)
            seen.add(var)
            out.append((var, self.poly(val, ring)))
        return out

    def ring_of(self, ambient: str) -> PolyRing:
        return self.rings[ambient]

    def add(self, decl, kind: str):
        self.check_name(decl.name)
        self.kinds[decl.name] = kind
        self.decls[decl.name] = decl
        self.doc.statements.append(decl)

    # -- statements
    def run(self) -> SpecDocument:
        for no, line in logical_lines(self.text):
            self.line, self.raw = no, line
            stmt = line.strip()
            kw = stmt.split(None, 1)[0]
            rest = stmt[len(kw):].strip()
            handler = getattr(self, f"st_{kw}", None)
            if handler is None:
                self.fail(f"unknown statement {kw!r}", kw)
            handler(rest)
        return self.doc

    def st_field(self, rest: str):
        if self.doc.statements:
            self.fail("field must come before any declaration", rest)
        try:
            f = parse_field(rest)
        except ValueError as exc:
            self.fail(str(exc), rest)
        if self.field_override is None:
            self.doc.field = f

    def st_ambient(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s*=\s*(.+)", rest)
        if not m:
            self.fail("expected 'ambient NAME = P(...) * A(...)'", rest)
        name, body = m.groups()
        factors = []
        for part in split_top(body, "*"):
            fm = re.fullmatch(r"([PA])\s*\((.*)\)", part)
            if not fm:
                self.fail(f"expected P(...) or A(...), got {part!r}", part)
            factors.append((fm.group(1), tuple(self.names(fm.group(2)))))
        allv = [v for _, n in factors for v in n]
        if len(set(allv)) != len(allv):
            self.fail("a coordinate appears in two factors", body)
        blocks = [Block("projective" if k == "P" else "affine", n) for k, n in factors]
        self.rings[name] = PolyRing(allv, self.doc.field, blocks)
        self.add(AmbientDecl(name, factors), "ambient")

    def st_ideal(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s+in\s+({NAME})\s*=\s*(.*)", rest)
        if not m:
            self.fail("expected 'ideal NAME in AMBIENT = f, g, ...'", rest)
        name, amb, body = m.groups()
        self.need(amb, "ambient")
        ring = self.ring_of(amb)
        gens = [self.poly(p, ring) for p in split_top(body)] if body.strip() else []
        gens = [g for g in gens if g != "0"]
        self.add(IdealDecl(name, amb, gens), "ideal")

    def st_family(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s*=\s*({NAME})(?:\s*/\s*({NAME}))?\s*->\s*({NAME})\s*:\s*(.+?)"
                         rf"(?:\s+assume\s+(.*))?", rest)
        if not m:
            self.fail("expected 'family NAME = TOTAL [/ IDEAL] -> BASE : u = ..., ...'", rest)
        name, tot, ideal, base, proj, assume = m.groups()
        self.need(tot, "ambient")
        self.need(base, "ambient")
        if ideal:
            d = self.need(ideal, "ideal")
            if d.ambient != tot:
                self.fail(f"ideal {ideal} does not live in {tot}", ideal)
        projection = self.assignments(proj, self.ring_of(tot), allowed=self.ring_of(base).variables)
        if {v for v, _ in projection} != set(self.ring_of(base).variables):
            self.fail("projection must assign every base coordinate", proj)
        flags = {}
        if assume:
            for part in split_top(assume):
                fm = re.fullmatch(r"(\w+)\s*=\s*(true|false)", part)
                if not fm or fm.group(1) not in FLAGS:
                    self.fail(f"expected one of {FLAGS} = true|false, got {part!r}", part)
                flags[fm.group(1)] = fm.group(2) == "true"
        self.add(FamilyDecl(name, tot, ideal, base, projection, flags), "family")

    def st_section(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s+of\s+({NAME})\s*:\s*(.+)", rest)
        if not m:
            self.fail("expected 'section NAME of FAMILY : x = ..., ...'", rest)
        name, fam, body = m.groups()
        f = self.need(fam, "family")
        coords = self.assignments(body, self.ring_of(f.base))
        self.add(SectionDecl(name, fam, coords), "section")

    def st_blowup(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s*=\s*({NAME})\s+at\s+({NAME})(?:\s+as\s+(.+))?", rest)
        if not m:
            self.fail("expected 'blowup NAME = SOURCE at IDEAL [as y0, y1, ...]'", rest)
        name, src, centre, names = m.groups()
        sd = self.need(src, "ambient", "ideal", "family")
        cd = self.need(centre, "ideal")
        amb = {"ambient": lambda d: d.name, "ideal": lambda d: d.ambient, "family": lambda d: d.total}[
            self.kinds[src]](sd)
        if cd.ambient != amb:
            self.fail(f"centre {centre} does not live in the ambient of {src}", centre)
        nl = self.names(names) if names else None
        if nl is not None and len(nl) != len(cd.generators):
            self.fail(f"{len(nl)} fibre names for {len(cd.generators)} centre generators", names)
        self.add(BlowupDecl(name, src, centre, nl), "blowup")

    def st_pairs(self, rest: str):
        m = re.fullmatch(rf"({NAME})\s+of\s+({NAME})\s+params\s+(.+?)\s*:\s*sigma\s*\((.*?)\)\s*tau\s*\((.*?)\)"
                         rf"\s*(points\s+.+|random\s+\d+(?:\s+range\s+\d+)?)", rest)
        if not m:
            self.fail("expected 'pairs NAME of FAMILY params p, q : sigma (...) tau (...) points (..), ..'"
                      " or '... random N [range R]'", rest)
        name, fam, params, sig, tau, src = m.groups()
        f = self.need(fam, "family")
        pl = self.names(params)
        bring = self.ring_of(f.base)
        clash = [p for p in pl if p in bring]
        if clash:
            self.fail(f"parameters clash with base coordinates: {clash}", params)
        pring = bring.extend(pl, front=True)
        sigma = self.assignments(sig, pring)
        taul = self.assignments(tau, pring)
        points, rnd = None, None
        if src.startswith("points"):
            points = []
            for tup in split_top(src[len("points"):].strip()):
                tm = re.fullmatch(r"\((.*)\)", tup)
                if not tm:
                    self.fail(f"expected a parenthesized point, got {tup!r}", tup)
                try:
                    pt = tuple(Fraction(x.strip()) for x in tm.group(1).split(","))
                except (ValueError, ZeroDivisionError):
                    self.fail(f"bad rational point {tup!r}", tup)
                if len(pt) != len(pl):
                    self.fail(f"point {tup} has {len(pt)} entries for {len(pl)} parameters", tup)
                points.append(pt)
        else:
            rm = re.fullmatch(r"random\s+(\d+)(?:\s+range\s+(\d+))?", src)
            rnd = (int(rm.group(1)), int(rm.group(2) or 5))
        self.add(PairsDecl(name, fam, pl, sigma, taul, points, rnd), "pairs")

    def st_query(self, rest: str):
        parts = rest.split(None, 1)
        if not parts:
            self.fail("empty query", rest)
        kind = parts[0]
        if kind not in QUERY_KINDS:
            self.fail(f"unknown query {kind!r}; expected one of {', '.join(QUERY_KINDS)}", kind)
        body = parts[1].strip() if len(parts) > 1 else ""
        args = getattr(self, f"q_{kind}")(body)
        self.doc.statements.append(QueryDecl(kind, args, self.line))

    def _head(self, body: str):
        if ":" in body:
            a, b = body.split(":", 1)
            return a.strip(), b.strip()
        return body.strip(), None

    def q_gb(self, body):
        parts = body.split()
        if not parts or len(parts) > 2:
            self.fail("expected 'query gb IDEAL [lex|grevlex]'", body)
        self.need(parts[0], "ideal")
        order = parts[1] if len(parts) == 2 else "grevlex"
        if order not in ("lex", "grevlex"):
            self.fail(f"unknown order {order!r}", order)
        return {"ideal": parts[0], "order": order}

    def _one_ideal(self, body, kind):
        if not _NAME_RE.match(body):
            self.fail(f"expected 'query {kind} IDEAL'", body)
        self.need(body, "ideal")
        return {"ideal": body}

    def q_hilbert(self, body):
        return self._one_ideal(body, "hilbert")

    def q_singular(self, body):
        return self._one_ideal(body, "singular")

    def q_eliminate(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query eliminate IDEAL : v1, v2'", body)
        d = self.need(head, "ideal")
        vs = self.names(tail)
        ring = self.ring_of(d.ambient)
        for v in vs:
            if v not in ring:
                self.fail(f"{v!r} is not a coordinate of {d.ambient}", v)
        return {"ideal": head, "variables": vs}

    def q_saturate(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query saturate IDEAL : IDEAL'", body)
        a = self.need(head, "ideal")
        b = self.need(tail, "ideal")
        if a.ambient != b.ambient:
            self.fail("ideals live in different ambients", tail)
        return {"ideal": head, "by": tail}

    def q_image(self, body):
        self.need(body, "section")
        return {"section": body}

    def q_cartier(self, body):
        m = re.fullmatch(rf"({NAME})(?:\s+in\s+({NAME}))?", body)
        if not m:
            self.fail("expected 'query cartier IDEAL [in IDEAL]'", body)
        a = self.need(m.group(1), "ideal")
        if m.group(2):
            b = self.need(m.group(2), "ideal")
            if a.ambient != b.ambient:
                self.fail("ideals live in different ambients", m.group(2))
        return {"ideal": m.group(1), "within": m.group(2)}

    def q_blowup(self, body):
        self.need(body, "blowup")
        return {"blowup": body}

    def _blowup_ambient(self, bname):
        bd = self.need(bname, "blowup")
        return self.decls[bd.centre].ambient

    def q_strict(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query strict BLOWUP : IDEAL'", body)
        amb = self._blowup_ambient(head)
        d = self.need(tail, "ideal")
        if d.ambient != amb:
            self.fail(f"{tail} does not live in the blown-up ambient", tail)
        return {"blowup": head, "ideal": tail}

    def q_lift(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query lift BLOWUP : SECTION'", body)
        bd = self.need(head, "blowup")
        if self.kinds[bd.source] != "family":
            self.fail(f"blow-up {head} is not of a family total space", head)
        sd = self.need(tail, "section")
        if sd.family != bd.source:
            self.fail(f"section {tail} is not a section of {bd.source}", tail)
        return {"blowup": head, "section": tail}

    def q_commute(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query commute BLOWUP : p = value, ...'", body)
        self._blowup_ambient(head)
        ring = self.ring_of(self._blowup_ambient(head))
        values = []
        for part in split_top(tail):
            m = re.fullmatch(rf"({NAME})\s*=\s*(-?[0-9]+(?:/[0-9]+)?)", part)
            if not m:
                self.fail(f"expected 'parameter = rational', got {part!r}", part)
            if m.group(1) not in ring:
                self.fail(f"{m.group(1)!r} is not a coordinate", part)
            values.append((m.group(1), str(Fraction(m.group(2)))))
        return {"blowup": head, "values": values}

    def q_pair(self, body):
        parts = body.split()
        if len(parts) != 2:
            self.fail("expected 'query pair SECTION SECTION'", body)
        a = self.need(parts[0], "section")
        b = self.need(parts[1], "section")
        if a.family != b.family:
            self.fail("sections belong to different families", parts[1])
        return {"sigma": parts[0], "tau": parts[1]}

    def q_cluster(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.fail("expected 'query cluster FAMILY : step, step, ...'", body)
        self.need(head, "family")
        steps = []
        for part in split_top(tail):
            m = re.fullmatch(rf"(lift\s+)?({NAME})(?:\s*\[(.*?)\])?(?:\s+at\s+({NAME}))?", part)
            if not m:
                self.fail(f"expected '[lift] SECTION [[y0, y1]] [at IDEAL]', got {part!r}", part)
            lift, sec, names, centre = m.groups()
            self.need(sec, "section")
            if centre:
                self.need(centre, "ideal")
            steps.append({"lift": bool(lift), "section": sec,
                          "names": self.names(names) if names else None, "centre": centre})
        if steps and steps[0]["lift"]:
            self.fail("the first cluster step cannot be a lift", tail)
        return {"family": head, "steps": steps}

    def q_stratify(self, body):
        head, tail = self._head(body)
        if tail is None:
            self.need(head, "pairs")
            return {"pairs": head}
        self.need(head, "family")
        lst = []
        for part in split_top(tail):
            ps = part.split()
            if len(ps) != 2:
                self.fail(f"expected 'SECTION SECTION', got {part!r}", part)
            for p in ps:
                sd = self.need(p, "section")
                if sd.family != head:
                    self.fail(f"section {p} is not a section of {head}", p)
            lst.append(tuple(ps))
        return {"family": head, "list": lst}

    def q_hirzebruch(self, body):
        head, tail = self._head(body)
        if tail is None or not re.fullmatch(r"\d+", head):
            self.fail("expected 'query hirzebruch E : n m, n m, ...'", body)
        classes = []
        for part in split_top(tail):
            m = re.fullmatch(r"(-?\d+)\s+(-?\d+)", part)
            if not m:
                self.fail(f"expected a class 'n m', got {part!r}", part)
            classes.append((int(m.group(1)), int(m.group(2))))
        return {"e": int(head), "classes": classes}


def parse_spec(text: str, field: CoefficientField | None = None) -> SpecDocument:
    """Parse a spec document; ``field`` overrides any ``field`` statement."""
    return _Parser(text, field).run()


def build_ring(decl: AmbientDecl, fld: CoefficientField) -> PolyRing:
    variables = [v for _, n in decl.factors for v in n]
    blocks = [Block("projective" if k == "P" else "affine", n) for k, n in decl.factors]
    return PolyRing(variables, fld, blocks)
