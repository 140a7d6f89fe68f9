"""Chowla-Selberg products, the lambda unit candidate, singular values k_N and elliptic integrals K_N."""

from dataclasses import dataclass

import mpmath
from mpmath import mp
from structlog import get_logger

import quadforms
from apnum import PrecisionContext, RealAP, agm, eta, raw
from errors import DomainError, PrecisionError, RefusalError
from invariants import check_level48, weber_r

logger = get_logger()

GAMMA_PRODUCT_LIMIT = 200


def _check_admissible(N: int) -> None:
    if N % 4 != 3 or not quadforms.is_squarefree(N):
        raise DomainError("N must be squarefree and congruent to 3 mod 4", N=N)


def _form_point(f: quadforms.Form, N: int) -> mpmath.mpc:
    return mpmath.mpc(mpmath.mpf(f.b) / (2 * f.a), mp.sqrt(N) / (2 * f.a))


def gn_direct(N: int, ctx: PrecisionContext) -> RealAP:
    """prod_k Gamma(k/N)^(-N/k), evaluated term by term."""
    _check_admissible(N)
    if N > GAMMA_PRODUCT_LIMIT:
        raise RefusalError("direct Gamma product is limited to small N", N=N, limit=GAMMA_PRODUCT_LIMIT)
    with ctx.workprec():
        exponent = mp.fsum(
            quadforms.kronecker(-N, k) * mp.loggamma(mpmath.mpf(k) / N) for k in range(1, N)
        )
        value = mp.exp(exponent)
    return RealAP(value=value, error_bound=ctx.tolerance * N, ctx=ctx)


def gn_eta(N: int, ctx: PrecisionContext) -> RealAP:
    """(2 pi N)^h prod (1/a) |eta((b + sqrt(-N))/(2a))|^4 over the reduced classes of -N."""
    _check_admissible(N)
    if N == 3:
        raise DomainError("the eta form of the Gamma product needs N > 3", N=N)
    group = quadforms.enumerate(-N)
    with ctx.workprec():
        total = (2 * mp.pi * N) ** group.h
        for f in group.classes:
            total *= abs(raw(eta(_form_point(f, N), ctx))) ** 4 / f.a
    logger.debug("Evaluated Chowla-Selberg product", N=N, h=group.h)
    return RealAP(value=total, error_bound=ctx.tolerance * (4 * group.h + 2), ctx=ctx)


def chowla_lambda(N: int, ctx: PrecisionContext) -> RealAP:
    """prod a^(1/4) |eta((1+sqrt(-N))/2) / eta((b+sqrt(-N))/(2a))|; exactly 1 when h = 1."""
    _check_admissible(N)
    group = quadforms.enumerate(-N)
    if group.h == 1:
        with ctx.workprec():
            return RealAP(value=mpmath.mpf(1), error_bound=mpmath.mpf(0), ctx=ctx)
    with ctx.workprec():
        principal = abs(raw(eta(_form_point(group.identity, N), ctx)))
        total = mpmath.mpf(1)
        for f in group.classes:
            total *= mp.root(f.a, 4) * principal / abs(raw(eta(_form_point(f, N), ctx)))
    return RealAP(value=total, error_bound=ctx.tolerance * (2 * group.h + 1), ctx=ctx)


def singular_k(N: int, ctx: PrecisionContext) -> RealAP:
    """k_N from k^2 = 1/2 - sqrt(1/4 - 16/r^24), checked against the AGM defining relation."""
    check_level48(N)
    r = weber_r(N, ctx)
    with ctx.workprec():
        e = 16 / raw(r) ** 24
        # 1/2 - sqrt(1/4 - e) without cancellation
        k2 = e / (mpmath.mpf(1) / 2 + mp.sqrt(mpmath.mpf(1) / 4 - e))
        k = mp.sqrt(k2)
    value = RealAP(value=k, error_bound=r.error_bound * 12 + ctx.tolerance, ctx=ctx)
    residual = k_relation_residual(value, N, ctx)
    if residual > ctx.tolerance:
        raise PrecisionError("singular value fails the AGM relation", N=N, residual=mpmath.nstr(residual, 5))
    logger.info("Computed singular value", N=N, bits=ctx.bits, residual=mpmath.nstr(residual, 5))
    return value


def k_relation_residual(k: RealAP, N: int, ctx: PrecisionContext) -> mpmath.mpf:
    """|AGM(1, sqrt(1-k^2)) - sqrt(N) AGM(1, k)|, relative to the left side."""
    with ctx.workprec():
        kv = raw(k)
        complement = mp.sqrt(1 - kv * kv)
    left = agm(1, complement, ctx)
    right = agm(1, kv, ctx)
    with ctx.workprec():
        return abs(left.value - mp.sqrt(N) * right.value) / left.value


def elliptic_K(N: int, ctx: PrecisionContext, k: RealAP | None = None) -> RealAP:
    """K_N = (pi/2) / AGM(1, sqrt(1 - k_N^2))."""
    k = k if k is not None else singular_k(N, ctx)
    with ctx.workprec():
        complement = mp.sqrt(1 - raw(k) ** 2)
    mean = agm(1, complement, ctx)
    with ctx.workprec():
        value = mp.pi / 2 / mean.value
    return RealAP(value=value, error_bound=mean.error_bound + ctx.tolerance, ctx=ctx)


def eq_w_check(N: int, ctx: PrecisionContext) -> mpmath.mpf:
    """Relative gap between K_N from the AGM and (r/2)^2 sqrt((2 pi/N)(lambda^4 G_N)^(1/h))."""
    if N <= 3:
        raise DomainError("the Gamma-value reduction of K_N needs N > 3", N=N)
    check_level48(N)
    result = chowla_result(N, ctx)
    return result.eq_w_residual


@dataclass(frozen=True)
class ChowlaResult:
    N: int
    h: int
    G_N: RealAP
    lam: RealAP
    k_N: RealAP
    K_N: RealAP
    eq_w_residual: mpmath.mpf

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "h": self.h,
            "G_N": self.G_N.to_json(),
            "lambda": self.lam.to_json(),
            "k_N": self.k_N.to_json(),
            "K_N": self.K_N.to_json(),
            "eq_w_residual": mpmath.nstr(self.eq_w_residual, 5),
        }


def chowla_result(N: int, ctx: PrecisionContext) -> ChowlaResult:
    h = quadforms.enumerate(-N).h
    G_N = gn_eta(N, ctx)
    lam = chowla_lambda(N, ctx)
    k = singular_k(N, ctx)
    K = elliptic_K(N, ctx, k=k)
    r = weber_r(N, ctx)
    with ctx.workprec():
        # positive real h-th root
        scaled = mp.root(raw(lam) ** 4 * raw(G_N), h)
        predicted = (raw(r) / 2) ** 2 * mp.sqrt(2 * mp.pi / N * scaled)
        residual = abs(K.value - predicted) / K.value
    logger.info("Compared K_N with its Gamma-value reduction", N=N, h=h, residual=mpmath.nstr(residual, 5))
    return ChowlaResult(N=N, h=h, G_N=G_N, lam=lam, k_N=k, K_N=K, eq_w_residual=residual)
