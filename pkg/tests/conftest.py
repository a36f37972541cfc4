import sympy
from hypothesis import HealthCheck, settings

from relcluster.poly import Polynomial, PolyRing

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def to_sympy(f: Polynomial):
    """Independent translation through the printed form."""
    syms = {v: sympy.Symbol(v) for v in f.ring.variables}
    return sympy.sympify(str(f).replace("^", "**"), locals=syms)


def from_sympy(expr, ring: PolyRing) -> Polynomial:
    return ring.parse(str(sympy.expand(expr)))


def sympy_gens(ring: PolyRing):
    return [sympy.Symbol(v) for v in ring.variables]
