import mpmath
import pytest
from mpmath import mp

from apnum import PrecisionContext, RealAP
from chowla import (
    chowla_lambda,
    chowla_result,
    elliptic_K,
    eq_w_check,
    gn_direct,
    gn_eta,
    k_relation_residual,
    singular_k,
)
from errors import DomainError, RefusalError


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(60)


@pytest.mark.parametrize("N", [7, 11, 19, 23, 31])
def test_gamma_product_two_ways(N):
    ctx = PrecisionContext.from_digits(230)
    direct = gn_direct(N, ctx)
    by_eta = gn_eta(N, ctx)
    with ctx.workprec():
        assert abs(direct.value - by_eta.value) / by_eta.value < mpmath.mpf(10) ** -200


def test_gamma_product_limits(ctx):
    with pytest.raises(RefusalError):
        gn_direct(211, ctx)
    with pytest.raises(DomainError):
        gn_eta(3, ctx)
    with pytest.raises(DomainError):
        gn_eta(5, ctx)


def test_lambda_is_one_for_class_number_one(ctx):
    assert chowla_lambda(163, ctx).value == 1
    assert chowla_lambda(23, ctx).value != 1


def test_singular_value_relation(ctx):
    k = singular_k(11, ctx)
    assert 0 < k.value < 1
    assert k_relation_residual(k, 11, ctx) < mpmath.mpf(10) ** -50


def test_k3(ctx):
    k = singular_k(3, ctx)
    with ctx.workprec():
        # k_3 = (sqrt(6) - sqrt(2)) / 4
        assert abs(k.value - (mp.sqrt(6) - mp.sqrt(2)) / 4) < mpmath.mpf(10) ** -50


def test_K1_is_the_lemniscate_value():
    ctx = PrecisionContext.from_digits(60)
    with ctx.workprec():
        k1 = mp.sqrt(2) / 2
    K = elliptic_K(1, ctx, k=RealAP(value=k1, error_bound=ctx.tolerance, ctx=ctx))
    with ctx.workprec():
        expected = mp.gamma(mpmath.mpf(1) / 4) ** 2 / (4 * mp.sqrt(mp.pi))
        assert abs(K.value - expected) < mpmath.mpf(10) ** -50


@pytest.mark.parametrize("N", [11, 19, 43, 59, 67, 83, 163, 1571])
def test_gamma_reduction_of_K(N, ctx):
    assert eq_w_check(N, ctx) < mpmath.mpf(10) ** -40


def test_chowla_result_envelope(ctx):
    result = chowla_result(83, ctx)
    data = result.to_json()
    assert data["h"] == 3
    assert set(data) >= {"G_N", "lambda", "k_N", "K_N", "eq_w_residual"}


def test_eq_w_refuses_small_N(ctx):
    with pytest.raises(DomainError):
        eq_w_check(3, ctx)
