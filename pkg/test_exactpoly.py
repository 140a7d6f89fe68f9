from fractions import Fraction

import mpmath
import pytest
import sympy

from apnum import PrecisionContext
from errors import DerivationError, DomainError, UnsupportedCaseError
from exactpoly import (
    MultiPoly,
    ResolventData,
    cubic_radicals,
    derive_modular_relation,
    derive_resolvents,
    discriminant,
    radical_description,
    radical_eval,
    resolvent_value,
    resultant,
    roots_of_unity,
    sylvester_resultant,
    vanishes_at_points,
    zero_relation,
)
from json_manager import load_fixture
from polybuild import IntPoly

x, y = sympy.symbols("x y")


def _poly(expr, *variables):
    return MultiPoly.from_expr(expr, variables or ("x",))


def _fixture_poly(name):
    fixture = load_fixture(name)
    return fixture, IntPoly.from_descending([int(c) for c in fixture["poly"]])


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(38)


def test_resultant_convention():
    assert resultant(_poly(x - 1), _poly(x + 1), "x").as_integer() == 2
    assert resultant(_poly(x + 1), _poly(x - 1), "x").as_integer() == -2
    assert resultant(_poly(x**2 - 2), _poly(x**2 - 2), "x").as_integer() == 0


def test_resultant_is_multiplicative():
    p, q, r = x**2 + 3 * x - 1, x**3 - 2, 2 * x + 5
    left = resultant(_poly(sympy.expand(p * q)), _poly(r), "x").as_integer()
    right = resultant(_poly(p), _poly(r), "x").as_integer() * resultant(_poly(q), _poly(r), "x").as_integer()
    assert left == right


def test_resultant_in_two_variables():
    p = _poly(x**2 + y, "x", "y")
    q = _poly(x - y, "x", "y")
    R = resultant(p, q, "x")
    assert R.variables == ("y",)
    assert R.to_expr() == sympy.expand(y**2 + y)
    assert sylvester_resultant(p, q, "x").terms == R.terms


def test_resultant_needs_the_variable():
    with pytest.raises(DomainError):
        resultant(_poly(y, "y"), _poly(x), "x")


def test_discriminants():
    assert discriminant(IntPoly.from_descending([1, -6, 4, -2])) == -652
    assert discriminant(IntPoly.from_descending([1, 0, -2])) == 8
    with pytest.raises(DomainError):
        discriminant(IntPoly((1, 1)))


@pytest.mark.parametrize("name, factors", [("radical_q3", {}), ("radical_q5", {2: 4, 3: 1, 5: 2, 11: 1, 17: 1, 47: 1})])
def test_subfield_discriminants(name, factors):
    fixture, q = _fixture_poly(name)
    index = 1
    for prime, e in factors.items():
        index *= prime**e
    N = fixture["N"]
    assert discriminant(q) == index**2 * (-N) ** ((q.degree - 1) // 2)


def test_multipoly_exact_evaluation():
    p = zero_relation()
    assert p.evaluate(f=3, g=-2) == 0
    assert p.evaluate(f=Fraction(1, 2), g=0) == Fraction(1, 8) - 1
    with pytest.raises(DomainError):
        p.evaluate(f=1)


def test_cardano_paper_cubic(ctx):
    _, q = _fixture_poly("radical_q3")
    radical = cubic_radicals(q, ctx)
    assert radical.u == Fraction(1, 3)
    assert radical.A == Fraction(9227, 54)
    assert radical.B == Fraction(2317723, 108)
    assert "sqrt(2317723/108)" in radical.description
    residual, scale = q.evaluate(radical.value, ctx)
    with ctx.workprec():
        assert abs(residual) / scale < mpmath.mpf(10) ** -30


def test_cardano_small_cubics(ctx):
    radical = cubic_radicals(IntPoly.from_descending([1, 0, 0, -2]), ctx)
    assert (radical.A, radical.B) == (1, 1)
    assert radical.description == "(2)^(1/3)"
    radical = cubic_radicals(IntPoly.from_descending([1, 0, 3, -4]), ctx)
    assert (radical.A, radical.B) == (2, 5)
    assert radical.value.nearest_integer() == 1


def test_cardano_refuses_three_real_roots(ctx):
    with pytest.raises(UnsupportedCaseError):
        cubic_radicals(IntPoly.from_descending([1, 0, -3, 1]), ctx)
    with pytest.raises(DomainError):
        cubic_radicals(IntPoly.from_descending([2, 0, 0, -2]), ctx)


def test_resolvent_data_validation():
    with pytest.raises(DomainError):
        ResolventData(N=23, p=3, pairs=((0, 0),))
    with pytest.raises(DomainError):
        ResolventData(N=23, p=5, pairs=((0, 0),))
    data = ResolventData(N=23, p=7, pairs=((1, 0), (0, 1), (2, 3)))
    assert data.root_of_unity_order == 7


def test_resolvent_value_is_the_mean_for_zero_resolvents(ctx):
    data = ResolventData(N=23, p=5, pairs=((0, 0), (0, 0)))
    q = IntPoly.from_descending([1, -1, 0, 0, 0, 0])
    value = resolvent_value(data, q, ctx)
    with ctx.workprec():
        assert abs(value.value - mpmath.mpf(1) / 5) < mpmath.mpf(10) ** -30
    with pytest.raises(DerivationError):
        radical_eval(data, q, ctx)


@pytest.mark.parametrize("p", [5, 7])
def test_roots_of_unity(p, ctx):
    unit = roots_of_unity(p, ctx)
    with ctx.workprec():
        for m, z in enumerate(unit):
            assert abs(z - mpmath.expjpi(mpmath.mpf(2 * m) / p)) < mpmath.mpf(10) ** -55


@pytest.mark.parametrize("name", ["radical_q5", "radical_q7"])
def test_paper_resolvents(name, ctx):
    fixture, q = _fixture_poly(name)
    data = ResolventData.from_json(fixture["resolvent"])
    value = radical_eval(data, q, ctx)
    residual, scale = q.evaluate(value, ctx)
    with ctx.workprec():
        assert abs(residual) / scale < mpmath.mpf(10) ** -30
    description = radical_description(data, q, fixture["variable"])
    assert description.startswith("u_n = Re[")
    assert f"sqrt(-{fixture['N']})" in description


def test_resolvent_sign_pattern_is_enforced(ctx):
    fixture, q = _fixture_poly("radical_q5")
    data = ResolventData.from_json(fixture["resolvent"] | {"negated_terms": [1]})
    with pytest.raises(DerivationError):
        radical_eval(data, q, ctx)


@pytest.mark.slow
def test_derive_resolvents_of_the_weber_quintic():
    fixture, q = _fixture_poly("quintic_47")
    ctx = PrecisionContext.from_digits(60)
    data = derive_resolvents(q, 47, ctx)
    assert data.p == 5
    value = radical_eval(data, q, ctx)
    with ctx.workprec():
        assert abs(value.value - mpmath.mpf("1.7349")) < 1e-3


@pytest.mark.slow
def test_modular_relation():
    fixture = load_fixture("modular_relation")
    phi = derive_modular_relation()
    assert phi.variables == ("J", "g")
    assert phi.degree("J") == 4
    assert vanishes_at_points(phi)
    for point in fixture["points"]:
        assert phi.evaluate(J=int(point["J"]), g=int(point["g"])) == 0
    for power, c in fixture["g_head"].items():
        assert phi.coefficient((0, int(power))) == int(c)
    for power, c in fixture["g_free"].items():
        assert phi.coefficient((int(power), 0)) == int(c)
