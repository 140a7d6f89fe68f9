"""Weber values r, the mod-64 signature, the level-48 pair [f, g], gamma_2, j and Broker roots."""

import itertools
from dataclasses import dataclass, field

import mpmath
from mpmath import mp
from structlog import get_logger

from apnum import ComplexAP, PrecisionContext, RealAP, eta, raw, real_part, with_escalation, wrap
from errors import DomainError, PrecisionError
from quadforms import Form, is_squarefree

logger = get_logger()

# 2f^4 - 16f^3g^2 + 20f^2g^4 - 12f^2g - 8fg^6 + 16fg^3 - 2f + g^8 - 4g^5 + 3g^2, keyed (deg f, deg g)
ZERO_RELATION = {
    (4, 0): 2,
    (3, 2): -16,
    (2, 4): 20,
    (2, 1): -12,
    (1, 6): -8,
    (1, 3): 16,
    (1, 0): -2,
    (0, 8): 1,
    (0, 5): -4,
    (0, 2): 3,
}

# -gamma_2 / 32 as a polynomial in f and g
GAMMA2_RELATION = {
    (8, 0): 8,
    (6, 1): 32,
    (5, 0): 16,
    (4, 2): 40,
    (3, 1): 32,
    (2, 3): 16,
    (2, 0): 6,
    (1, 2): 12,
    (0, 4): 1,
    (0, 1): 2,
}

SIGNATURES = {
    35: (-1, -1, -1),
    11: (-1, -1, 1),
    51: (-1, 1, -1),
    59: (-1, 1, 1),
    3: (1, -1, -1),
    43: (1, -1, 1),
    19: (1, 1, -1),
    27: (1, 1, 1),
}

# alpha(N) = sqrt(2) cos(k pi / 16)
ALPHA_ANGLES = {35: 11, 11: 9, 51: 13, 59: 15, 3: 5, 43: 7, 19: 3, 27: 1}

# f(3) = g(3) = 0 and f(27) = 0; both N lie outside the squarefree, coprime-to-3 range of the conjecture
OUTSIDE_CONJECTURE = {3, 27}


@dataclass(frozen=True)
class Signature:
    S1: int
    S2: int
    S3: int

    def as_list(self) -> list[int]:
        return [self.S1, self.S2, self.S3]

    def __str__(self) -> str:
        return "[" + ",".join(f"{s:+d}" for s in self.as_list()) + "]"


@dataclass(frozen=True)
class InvariantBundle:
    N: int
    r: RealAP
    s: RealAP
    f: RealAP
    g: RealAP
    gamma2: RealAP
    j: RealAP
    signature: Signature
    outside_conjecture: bool = False
    residuals: dict = field(default_factory=dict)

    def integer_pair(self) -> tuple[int | None, int | None]:
        """f and g as integers where they are integers to working precision."""
        return _as_integer(self.f), _as_integer(self.g)

    def to_json(self) -> dict:
        f_int, g_int = self.integer_pair()
        return {
            "N": self.N,
            "signature": self.signature.as_list(),
            "r": self.r.to_json(),
            "s": self.s.to_json(),
            "f": self.f.to_json(),
            "g": self.g.to_json(),
            "gamma2": self.gamma2.to_json(),
            "j": self.j.to_json(),
            "f_integer": None if f_int is None else str(f_int),
            "g_integer": None if g_int is None else str(g_int),
            "outside_conjecture": self.outside_conjecture,
            "residuals": {k: mpmath.nstr(v, 5) for k, v in self.residuals.items()},
        }


def _as_integer(x: RealAP) -> int | None:
    with x.ctx.workprec():
        nearest = mpmath.nint(x.value)
        if abs(x.value - nearest) < x.ctx.loose_tolerance * max(1, abs(nearest)):
            return int(nearest)
    return None


def evaluate_fg(coefficients: dict, f, g):
    """Evaluate a {(i, j): c} polynomial at (f, g); exact for int and Fraction inputs."""
    return sum(c * f**i * g**j for (i, j), c in coefficients.items())


def _relation_residual(coefficients: dict, f: RealAP, g: RealAP, ctx: PrecisionContext):
    """Residual and the absolute scale of its terms, for tolerance checks at high precision."""
    with ctx.workprec():
        fv, gv = raw(f), raw(g)
        terms = [c * fv**i * gv**j for (i, j), c in coefficients.items()]
        return mp.fsum(terms), mp.fsum(abs(t) for t in terms)


def constraint_zero(f, g):
    """The quartic-in-f constraint tying f and g together; zero exactly at valid pairs."""
    return evaluate_fg(ZERO_RELATION, f, g)


def gamma2_from_fg(f, g):
    return -32 * evaluate_fg(GAMMA2_RELATION, f, g)


def gamma2_from_r(r):
    return 256 / r**16 - r**8


def check_level48(N: int) -> None:
    if N in OUTSIDE_CONJECTURE:
        return
    if N % 8 != 3:
        raise DomainError("N must be congruent to 3 mod 8", N=N)
    if N % 3 == 0 or not is_squarefree(N):
        raise DomainError("N must be squarefree and coprime to 3", N=N)


def _weber_quotient(N: int, ctx: PrecisionContext) -> ComplexAP:
    """exp(-pi i/24) eta((1+sqrt(-N))/2) / eta(sqrt(-N))."""
    with ctx.workprec():
        root = mp.sqrt(N)
        upper = eta(mpmath.mpc(mpmath.mpf(1) / 2, root / 2), ctx)
        lower = eta(mpmath.mpc(0, root), ctx)
        phase = wrap(mp.expjpi(mpmath.mpf(-1) / 24), ctx)
    return phase * upper / lower


def weber_r(N: int, ctx: PrecisionContext) -> RealAP:
    """The real Weber value r > 2^(1/4) for N = 3 mod 8."""
    check_level48(N)
    r = real_part(_weber_quotient(N, ctx), ctx, what="Weber r")
    with ctx.workprec():
        if r.value <= mp.root(2, 4):
            raise PrecisionError("Weber r is not above 2^(1/4)", N=N, r=mpmath.nstr(r.value, 10))
    logger.debug("Computed Weber r", N=N, bits=ctx.bits)
    return r


def weber_f(N: int, ctx: PrecisionContext) -> RealAP:
    """The same eta quotient for squarefree N = 7 mod 8, where it generates a degree-h extension."""
    if N % 8 != 7 or not is_squarefree(N):
        raise DomainError("N must be squarefree and congruent to 7 mod 8", N=N)
    return real_part(_weber_quotient(N, ctx), ctx, what="Weber f")


def signature(N: int) -> Signature:
    if N % 8 != 3:
        raise DomainError("the signature is defined for N = 3 mod 8 only", N=N)
    return Signature(*SIGNATURES[N % 64])


def _nested_s(r: RealAP, signs: tuple[int, int, int], ctx: PrecisionContext) -> RealAP:
    S1, S2, S3 = signs
    with ctx.workprec():
        rv = raw(r)
        inner = mpmath.mpf(1) / 8 - 1 / rv**12
        if inner < 0:
            raise PrecisionError("r too small for the nested square roots", r=mpmath.nstr(rv, 10))
        value = S1 * mp.sqrt(1 + S2 * mp.sqrt(mpmath.mpf(1) / 2 + S3 * mp.sqrt(inner)))
    return RealAP(value=value, error_bound=r.error_bound * 12 + ctx.tolerance, ctx=ctx)


def _pair_from_s(r: RealAP, s: RealAP, ctx: PrecisionContext) -> tuple[RealAP, RealAP]:
    with ctx.workprec():
        root = mp.sqrt(raw(r))
    sqrt_r = RealAP(value=root, error_bound=r.error_bound / 2 + ctx.tolerance, ctx=ctx)
    return r / 2 - s / sqrt_r, -1 / r + s * sqrt_r


def _fg_pair(N: int, ctx: PrecisionContext) -> InvariantBundle:
    r = weber_r(N, ctx)
    sig = signature(N)
    s = _nested_s(r, sig.as_list(), ctx)
    f, g = _pair_from_s(r, s, ctx)

    with ctx.workprec():
        rv, fv, gv = raw(r), raw(f), raw(g)
        cubic = rv**3 - 2 * (fv * rv**2 + gv * rv + 1)
        cubic_scale = abs(rv) ** 3
        zero, zero_scale = _relation_residual(ZERO_RELATION, f, g, ctx)
        gamma2 = gamma2_from_r(r)
        from_fg, fg_scale = _relation_residual(GAMMA2_RELATION, f, g, ctx)
        elimination = raw(gamma2) + 32 * from_fg
        residuals = {
            "cubic": abs(cubic) / cubic_scale,
            "zero": abs(zero) / max(zero_scale, 1),
            "elimination": abs(elimination) / max(32 * fg_scale, 1),
        }
        limits = {"cubic": ctx.tolerance, "zero": ctx.loose_tolerance, "elimination": ctx.loose_tolerance}
        for name, residual in residuals.items():
            if residual > limits[name]:
                raise PrecisionError(
                    f"{name} relation residual above tolerance", N=N, residual=mpmath.nstr(residual, 5)
                )

    bundle = InvariantBundle(
        N=N,
        r=r,
        s=s,
        f=f,
        g=g,
        gamma2=gamma2,
        j=gamma2**3,
        signature=sig,
        outside_conjecture=N in OUTSIDE_CONJECTURE,
        residuals=residuals,
    )
    if bundle.outside_conjecture:
        logger.warning("N lies outside the conjectured range", N=N)
    logger.info("Computed [f,g] pair", N=N, signature=str(sig), bits=ctx.bits)
    return bundle


def fg_pair(N: int, ctx: PrecisionContext) -> InvariantBundle:
    check_level48(N)
    return with_escalation(lambda c: _fg_pair(N, c), ctx)


def signature_scan(N: int, ctx: PrecisionContext) -> list[dict]:
    """Evaluate the pair for all eight sign triples, reporting which give integer f and g."""
    r = weber_r(N, ctx)
    rows = []
    for signs in itertools.product((-1, 1), repeat=3):
        s = _nested_s(r, signs, ctx)
        f, g = _pair_from_s(r, s, ctx)
        f_int, g_int = _as_integer(f), _as_integer(g)
        rows.append(
            {
                "signature": list(signs),
                "f": mpmath.nstr(raw(f), 20),
                "g": mpmath.nstr(raw(g), 20),
                "integral": f_int is not None and g_int is not None,
                "tabulated": N % 8 == 3 and SIGNATURES[N % 64] == signs,
            }
        )
    return rows


def klein_j(z, ctx: PrecisionContext) -> ComplexAP:
    """j(z) = ((eta(z/2)/eta(z))^16 + 16 (eta(z)/eta(z/2))^8)^3.

    Callers pass z = (b + sqrt(-N))/(2a) from reduced forms, so Im(z/2) >= sqrt(3)/4.
    """
    with ctx.workprec():
        zv = mpmath.mpc(raw(z))
        threshold = mp.sqrt(3) / 4
    half = eta(zv / 2, ctx, min_imag=threshold)
    full = eta(zv, ctx, min_imag=threshold)
    quotient = half / full
    return (quotient**16 + 16 / quotient**8) ** 3


def broker_root(form: Form, N: int, ctx: PrecisionContext) -> ComplexAP:
    """Weber root attached to a class [a, b, c] of discriminant -4N, with z = (b/2 + sqrt(-N))/a."""
    a, b, c = form.a, form.b, form.c
    if form.discriminant != -4 * N:
        raise DomainError("form must have discriminant -4N", form=str(form), N=N)
    if b % 2:
        raise DomainError("form must have even middle coefficient", form=str(form))
    if a % 2 == 0 and c % 2 == 0:
        raise DomainError("at least one of a, c must be odd", form=str(form))

    with ctx.workprec():
        z = mpmath.mpc(mpmath.mpf(b) / (2 * a), mp.sqrt(N) / a)
        threshold = mp.sqrt(3) / 4
        if c % 2 == 0:
            sign = -((-1) ** ((a * a - 1) // 8))
            numerator = -b * (a * c * c - a - 2 * c)
            top, bottom = z / 2, z
            factor = mpmath.mpf(1)
        elif a % 2 == 0:
            sign = -((-1) ** ((c * c - 1) // 8))
            numerator = -b * (c - a - 5 * a * c * c)
            top, bottom = 2 * z, z
            factor = mp.sqrt(2)
        else:
            sign = 1
            numerator = -(b * (c - a - a * a * c) + 2)
            top, bottom = (1 + z) / 2, z
            factor = mpmath.mpf(1)
        phase = sign * factor * mp.expjpi(mpmath.mpf(numerator % 96) / 48)
    quotient = eta(top, ctx, min_imag=threshold) / eta(bottom, ctx, min_imag=threshold)
    return wrap(phase, ctx) * quotient


@dataclass(frozen=True)
class AlphaValue:
    N: int
    k: int
    radical: str
    value: RealAP


def alpha(N: int, ctx: PrecisionContext) -> AlphaValue:
    """Asymptotic prefactor of g: g = alpha(N) exp(pi sqrt(N)/48) + o(1)."""
    sig = signature(N)
    k = ALPHA_ANGLES[N % 64]
    beta_label = "beta_+" if sig.S3 > 0 else "beta_-"
    radical = f"{'+' if sig.S1 > 0 else '-'}sqrt(1{'+' if sig.S2 > 0 else '-'}{beta_label})"
    with ctx.workprec():
        beta = mp.sqrt(mpmath.mpf(1) / 2 + sig.S3 * mp.sqrt(mpmath.mpf(1) / 8))
        nested = sig.S1 * mp.sqrt(1 + sig.S2 * beta)
        cosine = mp.sqrt(2) * mp.cospi(mpmath.mpf(k) / 16)
        if abs(nested - cosine) > ctx.tolerance:
            raise PrecisionError("nested radical and cosine forms of alpha disagree", N=N, k=k)
    return AlphaValue(N=N, k=k, radical=radical, value=RealAP(value=cosine, error_bound=ctx.tolerance, ctx=ctx))


def growth_deviation(N: int, ctx: PrecisionContext) -> mpmath.mpf:
    """|g - alpha(N) exp(pi sqrt(N)/48)|, the measured o(1) term."""
    bundle = fg_pair(N, ctx)
    prefactor = alpha(N, ctx)
    with ctx.workprec():
        return abs(raw(bundle.g) - raw(prefactor.value) * mp.exp(mp.pi * mp.sqrt(N) / 48))


def growth_ratio(N: int, ctx: PrecisionContext) -> mpmath.mpf:
    """log r / (pi sqrt(N) / 24), which tends to 1."""
    r = weber_r(N, ctx)
    with ctx.workprec():
        return mp.log(raw(r)) / (mp.pi * mp.sqrt(N) / 24)

