import mpmath
import pytest
from mpmath import mp

from apnum import PrecisionContext, RealAP, wrap
from errors import DomainError, NotFoundError
from invariants import weber_f
from json_manager import load_fixture
from latrel import algdep, is_unit_polynomial, lindep, lll_reduce, unit_test_lambda
from polybuild import IntPoly


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(100)


def test_lll_reduce_small_basis():
    reduced = lll_reduce([[1, 0, 0], [0, 1, 0], [1, 1, 1000]])
    assert sorted(sum(v * v for v in row) for row in reduced)[0] == 1
    with pytest.raises(DomainError):
        lll_reduce([[1, 2], [2, 4]])


def test_lindep_finds_golden_ratio_relation(ctx):
    with ctx.workprec():
        phi = (1 + mp.sqrt(5)) / 2
        values = [wrap(phi**2, ctx), wrap(phi, ctx), wrap(1, ctx)]
    result = lindep(values, ctx)
    assert result.coefficients == (1, -1, -1)


def test_lindep_refuses_unrelated_values(ctx):
    with ctx.workprec():
        values = [wrap(mp.pi, ctx), wrap(mp.e, ctx), wrap(mp.euler, ctx)]
    with pytest.raises(NotFoundError):
        lindep(values, ctx)


def test_algdep_cube_root(ctx):
    with ctx.workprec():
        x = wrap(mp.cbrt(2) + 1, ctx)
    assert algdep(x, 3, ctx) == IntPoly.from_descending([1, -3, 3, -3])


def test_algdep_weber_quintic(ctx):
    fixture = load_fixture("quintic_47")
    with ctx.workprec():
        x = weber_f(47, ctx) / wrap(mp.sqrt(2), ctx)
        assert abs(x.value - mpmath.mpf("1.7349")) < 1e-3
    assert algdep(x, 5, ctx) == IntPoly.from_descending([int(c) for c in fixture["poly"]])


def test_algdep_degree_must_be_positive(ctx):
    with pytest.raises(DomainError):
        algdep(RealAP(value=mpmath.mpf(2), error_bound=ctx.tolerance, ctx=ctx), 0, ctx)


def test_unit_polynomial():
    assert is_unit_polynomial(IntPoly.from_descending([1, 0, -1]))
    assert not is_unit_polynomial(IntPoly.from_descending([1, 0, -2]))
    assert not is_unit_polynomial(IntPoly.from_descending([2, 0, -1]))


def test_lambda_for_class_number_one(ctx):
    report = unit_test_lambda(163, ctx)
    assert report.is_unit
    assert report.degree == 1


@pytest.mark.parametrize("N", [23, 31, 47])
def test_lambda_is_a_unit(N):
    report = unit_test_lambda(N, PrecisionContext.from_digits(60))
    assert report.is_unit
    assert report.L.coefficients[0] in (1, -1)


@pytest.mark.slow
def test_lambda_needs_its_square_at_1771():
    report = unit_test_lambda(1771, PrecisionContext.from_digits(60))
    assert report.used_square
    assert report.is_unit


@pytest.mark.slow
def test_lambda_is_a_unit_at_19019():
    report = unit_test_lambda(19019, PrecisionContext.from_digits(60))
    assert not report.used_square
    assert report.is_unit
