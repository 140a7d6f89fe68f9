import mpmath
import pytest

from apnum import PrecisionContext, wrap
from errors import AssumptionFailure, DomainError
from json_manager import load_fixture
from polybuild import (
    IntPoly,
    g_minimal_polynomial,
    hilbert_poly,
    invariant_polys,
    minimal_polynomial,
    poly_from_roots,
    poly_height,
    poly_index,
    real_roots,
    weber_poly,
)


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(60)


def test_intpoly_basics():
    p = IntPoly.from_descending([1, -3, 2])
    assert p.coefficients == (2, -3, 1)
    assert p.degree == 2
    assert p.is_monic
    assert p(1) == 0
    assert IntPoly((5, 0, 0)).degree == 0
    with pytest.raises(DomainError):
        IntPoly((0, 0))


def test_poly_height():
    assert poly_height(IntPoly((-7, 3))) == (7, 1)
    assert poly_height(IntPoly.from_descending([1, 0, -123456])).digits == 6


def test_poly_from_roots(ctx):
    poly, certificate = poly_from_roots([wrap(1, ctx), wrap(2, ctx)], ctx)
    assert poly == IntPoly((2, -3, 1))
    assert certificate.max_distance < 1e-30


def test_hilbert_poly_23(ctx):
    H = hilbert_poly(23, ctx)
    assert H == IntPoly.from_descending([1, 3491750, -5151296875, 12771880859375])
    assert H.certificate.reverified


def test_hilbert_poly_163(ctx):
    assert hilbert_poly(163, ctx) == IntPoly((262537412640768000, 1))
    with pytest.raises(DomainError):
        hilbert_poly(20, ctx)


def test_invariant_polys_class_number_one(ctx):
    F, G = invariant_polys(163, ctx)
    assert F == IntPoly((-3, 1))
    assert G == IntPoly((2, 1))


def test_weber_poly_degree(ctx):
    # r^3 = 2(f r^2 + g r + 1) with [f, g] = [1, -1]
    W = weber_poly(11, ctx)
    assert W == IntPoly.from_descending([1, -2, 2, -2])
    assert len(real_roots(W, ctx)) == 1
    assert weber_poly(163, ctx) == IntPoly.from_descending([1, -6, 4, -2])


def test_g_polynomial_of_1571(ctx):
    fixture = load_fixture("g_1571")
    _, G = invariant_polys(1571, ctx)
    assert G == IntPoly.from_descending([int(c) for c in fixture["G"]])
    assert G.degree == fixture["h"]
    assert poly_index(G, 1571) == int(fixture["index"])


def test_poly_index_rejects_even_degree():
    with pytest.raises(DomainError):
        poly_index(IntPoly.from_descending([1, 0, 1]), 3)
    with pytest.raises(AssumptionFailure):
        poly_index(IntPoly.from_descending([1, 0, 0, -2]), 23)


def test_minimal_polynomial(ctx):
    p = IntPoly.from_descending([1, -1, -1, 1])
    assert minimal_polynomial(p, wrap(1, ctx), ctx) == IntPoly((-1, 1))
    assert minimal_polynomial(p, wrap(-1, ctx), ctx) == IntPoly((1, 1))


@pytest.mark.parametrize("N", ["715", "1099"])
def test_g_generates_a_subfield_at_the_exceptions(N, ctx):
    expected = load_fixture("conjecture2")["minimal_polynomials"][N]
    poly, h = g_minimal_polynomial(int(N), ctx)
    assert h == expected["h"]
    assert poly == IntPoly.from_descending([int(c) for c in expected["poly"]])
    assert poly.degree < h


def test_real_roots(ctx):
    roots = real_roots(IntPoly.from_descending([1, 0, -2]), ctx)
    with ctx.workprec():
        assert len(roots) == 2
        assert abs(roots[1] - mpmath.sqrt(2)) < mpmath.mpf(10) ** -50


@pytest.mark.slow
def test_g_polynomial_of_the_large_example():
    paper = load_fixture("paper_2317723")
    _, G = invariant_polys(2317723, PrecisionContext.from_digits(60))
    assert G.degree == paper["h"]
    assert poly_height(G).digits == paper["G_height_digits"]
