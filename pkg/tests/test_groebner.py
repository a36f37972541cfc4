import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from relcluster.groebner import (GroebnerLimitError, Ideal, eliminate, hilbert, ideal_intersection,
                                 ideal_quotient, is_reduced_basis, krull_dimension, print_gb, print_ideal,
                                 radical_contains, resource_limits, s_pair_certificate, saturation,
                                 standard_monomials, vector_space_degree)
from relcluster.poly import MonomialOrder, make_ring, monomials_of_degree, random_polynomial

from conftest import sympy_gens, to_sympy

R = make_ring("x, y, z")


def random_ideal(seed, ring=R, n=3, degree=2, terms=3):
    rng = random.Random(seed)
    return Ideal(ring, [random_polynomial(ring, rng, degree, terms) for _ in range(n)])


def sympy_reduced_basis(I, order):
    gens = [to_sympy(g) for g in I.generators if g]
    if not gens:
        return []
    G = sympy.groebner(gens, *sympy_gens(I.ring), order=order)
    gens = sympy_gens(I.ring)
    out = []
    for g in G.exprs:
        P = sympy.Poly(g, *gens)
        out.append(str(sympy.expand(g / P.LC(order=order))))
    return sorted(out)


def ours_as_sympy(basis):
    return sorted(str(sympy.expand(to_sympy(g))) for g in basis)


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("order", ["grevlex", "lex"])
def test_reduced_basis_matches_sympy(seed, order):
    I = random_ideal(seed)
    mo = MonomialOrder.lex() if order == "lex" else MonomialOrder.grevlex()
    ours = I.groebner(mo)
    assert ours_as_sympy(ours) == sympy_reduced_basis(I, order)
    assert is_reduced_basis(ours, mo)
    assert s_pair_certificate(ours, mo)


@given(st.integers(0, 10**6), st.randoms(use_true_random=False))
def test_reduced_basis_independent_of_generator_order(seed, rnd):
    I = random_ideal(seed)
    gens = list(I.generators)
    rnd.shuffle(gens)
    J = Ideal(R, gens + [gens[0] * R("x") + gens[-1]])
    assert I.groebner() == J.groebner()


@given(st.integers(0, 10**6))
def test_membership_of_combinations(seed):
    rng = random.Random(seed)
    I = random_ideal(seed)
    f = sum((random_polynomial(R, rng, 1, 2) * g for g in I.generators), R.zero())
    assert I.contains(f)
    assert not I.reduce(f)


def test_small_examples():
    I = Ideal(R, [R("x^2 - 1"), R("x*y - 1")])
    assert print_gb(I, MonomialOrder.lex()) == "x - y, y^2 - 1"
    assert print_ideal(Ideal(R)) == "0"
    assert print_ideal(Ideal(R, [R("x"), R("x + 1")])) == "1"
    assert print_gb(Ideal(R, [R("y - x^2"), R("x")]), MonomialOrder.lex()) == "x, y"


def test_intersection_quotient_saturation():
    X, Y = Ideal(R, [R("x")]), Ideal(R, [R("y")])
    assert ideal_intersection(X, Y).equals(Ideal(R, [R("x*y")]))
    assert ideal_quotient(Ideal(R, [R("x*y")]), X).equals(Y)
    J, k = saturation(Ideal(R, [R("x^2*y"), R("x*y^2")]), X)
    assert J.equals(Y) and k == 2


@given(st.integers(0, 10**6))
def test_saturation_idempotent(seed):
    I = random_ideal(seed, n=2)
    J = Ideal(R, [R("x"), R("y")])
    S1, _ = saturation(I, J)
    S2, k = saturation(S1, J)
    assert S1.equals(S2) and k == 0


def test_elimination():
    S = make_ring("t, x, y")
    I = Ideal(S, [S("x - t"), S("y - t^2")])
    assert [str(g) for g in eliminate(I, ["t"]).groebner()] == ["x^2 - y"]


def test_radical_membership():
    I = Ideal(R, [R("x^3"), R("y^2")])
    assert radical_contains(I, R("x + y"))
    assert not radical_contains(I, R("z"))


def _rank(rows):
    rows = [list(r) for r in rows]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                q = Fraction(rows[i][col]) / rows[rank][col]
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def hilbert_function_by_linear_algebra(gens, ring, s):
    """dim (K[x]/I)_s as #monomials minus the rank of the degree-s part of I."""
    monos = list(monomials_of_degree(ring.nvars, s))
    index = {m: i for i, m in enumerate(monos)}
    rows = []
    for g in gens:
        d = g.total_degree()
        if d > s:
            continue
        for m in monomials_of_degree(ring.nvars, s - d):
            h = g.scale_monomial(m)
            row = [0] * len(monos)
            for e, c in h.as_dict().items():
                row[index[e]] = Fraction(c)
            rows.append(row)
    return len(monos) - (_rank(rows) if rows else 0)


@pytest.mark.parametrize("gens", [
    ["x*y - z^2"],
    ["x^2", "y^2"],
    ["x*y", "x*z", "y*z"],
    ["x^2 - y*z", "x*y - z^2"],
    ["x", "y"],
])
def test_hilbert_function_against_linear_algebra(gens):
    I = Ideal(R, [R(g) for g in gens])
    h = hilbert(I)
    for s in range(7):
        assert h.hilbert_function(s) == hilbert_function_by_linear_algebra(I.generators, R, s)
    for s in range(h.regularity_bound, h.regularity_bound + 4):
        assert h.polynomial_value(s) == h.hilbert_function(s)


def test_hilbert_polynomials():
    assert hilbert(Ideal(R)).format_polynomial() == "1/2*n^2 + 3/2*n + 1"
    assert hilbert(Ideal(R, [R("x")])).format_polynomial() == "n + 1"
    twisted = hilbert(Ideal(R, [R("x*y - z^2")]))
    assert twisted.format_polynomial() == "2*n + 1" and twisted.degree == 2 and twisted.dimension == 1


def test_zero_dimensional_counts():
    I = Ideal(R, [R("x^2 - 1"), R("y - x"), R("z^3")])
    assert krull_dimension(I) == 0
    assert vector_space_degree(I) == 6
    assert len(standard_monomials(I)) == 6


def test_resource_limits():
    I = random_ideal(7, n=3, degree=3, terms=4)
    with resource_limits(max_pairs=2):
        with pytest.raises(GroebnerLimitError) as err:
            Ideal(R, I.generators).groebner()
    assert err.value.partial is not None
