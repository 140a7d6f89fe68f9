"""Integer polynomials from high-precision conjugate roots, with certified rounding.

Builds the Hilbert class polynomial, the degree-3h Weber polynomial of the Broker roots and the
degree-h polynomials F and G whose roots are the [f, g] invariants of each class.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import mpmath
import sympy
from mpmath import mp
from structlog import get_logger

import quadforms
from apnum import PrecisionContext, raw, with_escalation
from errors import AssumptionFailure, DomainError, GroupingError, PrecisionError
from invariants import broker_root, check_level48, fg_pair, gamma2_from_r, klein_j

logger = get_logger()

MAX_ESCALATIONS = 4
REVERIFY_FACTOR = 1.25
LN10 = math.log(10)


@dataclass(frozen=True)
class RoundingCertificate:
    max_distance: mpmath.mpf
    bits_used: int
    escalations: int = 0
    reverified: bool = False

    def to_json(self) -> dict:
        return {
            "max_distance": mpmath.nstr(self.max_distance, 5),
            "bits_used": self.bits_used,
            "escalations": self.escalations,
            "reverified": self.reverified,
        }


@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial, constant term first."""

    coefficients: tuple[int, ...]
    certificate: RoundingCertificate | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        coefficients = tuple(int(c) for c in self.coefficients)
        while coefficients and coefficients[-1] == 0:
            coefficients = coefficients[:-1]
        if not coefficients:
            raise DomainError("the zero polynomial is not an IntPoly")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_descending(cls, coefficients: Sequence[int]) -> "IntPoly":
        return cls(tuple(reversed(coefficients)))

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "IntPoly":
        return cls.from_descending([int(c) for c in poly.all_coeffs()])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> int:
        return self.coefficients[-1]

    @property
    def is_monic(self) -> bool:
        return self.leading == 1

    def to_sympy(self, x: sympy.Symbol | None = None) -> sympy.Poly:
        x = x if x is not None else sympy.Symbol("x")
        return sympy.Poly(list(reversed(self.coefficients)), x, domain="ZZ")

    def __call__(self, x):
        result = 0
        for c in reversed(self.coefficients):
            result = result * x + c
        return result

    def evaluate(self, x, ctx: PrecisionContext) -> tuple[mpmath.mpf, mpmath.mpf]:
        """Value at x and the absolute scale sum |c_i x^i| for relative residual checks."""
        with ctx.workprec():
            xv = raw(x)
            value = mp.polyval(list(reversed(self.coefficients)), xv)
            scale = mp.polyval([abs(c) for c in reversed(self.coefficients)], abs(xv))
        return value, scale

    def to_json(self) -> dict:
        data = {"degree": self.degree, "coeffs": [str(c) for c in self.coefficients]}
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_json()
        return data

    @classmethod
    def from_json(cls, data: dict) -> "IntPoly":
        return cls(tuple(int(c) for c in data["coeffs"]))

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


class Height(NamedTuple):
    value: int
    digits: int


def poly_height(p: IntPoly) -> Height:
    height = max(abs(c) for c in p.coefficients)
    return Height(height, len(str(height)))


def _multiply(p: list, q: list) -> list:
    out = [mpmath.mpc(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def expand_roots(roots: Sequence) -> list:
    """Coefficients of prod (x - root), constant first, via a balanced product tree."""
    layer = [[-mpmath.mpc(raw(root)), mpmath.mpc(1)] for root in roots]
    while len(layer) > 1:
        merged = [_multiply(layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            merged.append(layer[-1])
        layer = merged
    return layer[0]


def poly_from_roots(roots: Sequence, ctx: PrecisionContext) -> tuple[IntPoly, RoundingCertificate]:
    """Round the elementary symmetric functions of conjugation-closed roots to integers."""
    if not roots:
        raise DomainError("no roots supplied")
    with ctx.workprec():
        coefficients = expand_roots(roots)
        rounded = []
        max_distance = mpmath.mpf(0)
        for c in coefficients:
            nearest = mpmath.nint(c.real)
            max_distance = max(max_distance, abs(c.real - nearest), abs(c.imag))
            rounded.append(int(nearest))
        threshold = mpmath.ldexp(1, -(ctx.guard_bits // 2))
    certificate = RoundingCertificate(max_distance=max_distance, bits_used=ctx.bits)
    if max_distance >= threshold:
        raise PrecisionError(
            "coefficients are not integral to working precision",
            max_distance=mpmath.nstr(max_distance, 5),
            bits=ctx.bits,
            degree=len(roots),
        )
    return IntPoly(tuple(rounded)), certificate


def certified_poly(root_fn: Callable[[PrecisionContext], list], ctx: PrecisionContext, label: str) -> IntPoly:
    """Round with escalation, then recompute at 1.25x precision and require identical integers."""
    attempts = []

    def attempt(c: PrecisionContext):
        attempts.append(c.bits)
        return c, poly_from_roots(root_fn(c), c)

    used, (poly, certificate) = with_escalation(attempt, ctx, attempts=MAX_ESCALATIONS)
    check, _ = poly_from_roots(root_fn(used.scaled(REVERIFY_FACTOR)), used.scaled(REVERIFY_FACTOR))
    if check != poly:
        raise PrecisionError("rounded coefficients changed under re-verification", label=label, bits=used.bits)
    certificate = replace(certificate, escalations=len(attempts) - 1, reverified=True)
    logger.info(
        "Certified polynomial",
        label=label,
        degree=poly.degree,
        bits=used.bits,
        escalations=certificate.escalations,
        max_distance=mpmath.nstr(certificate.max_distance, 5),
    )
    return replace(poly, certificate=certificate)


def invariant_digits(N: int, h: int) -> int:
    """Starting decimal precision for F and G."""
    return math.ceil(math.pi * math.sqrt(N) * h / (96 * LN10)) + 20 * h + 100


def _log10_magnitude_sum(N: int, forms: Sequence[quadforms.Form], divisor: int) -> float:
    # |root| ~ exp(pi sqrt(N) / (divisor * a)) for the class [a, b, c]
    return sum(math.pi * math.sqrt(N) / (divisor * f.a * LN10) for f in forms)


def _context_for(ctx: PrecisionContext, digits: int) -> PrecisionContext:
    wanted = PrecisionContext.from_digits(digits, guard_bits=ctx.guard_bits)
    return wanted if wanted.bits > ctx.bits else ctx


def _check_hilbert_input(N: int) -> None:
    if N <= 3 or N % 4 != 3 or not quadforms.is_squarefree(N):
        raise DomainError("N must be squarefree, congruent to 3 mod 4 and above 3", N=N)


def hilbert_poly(N: int, ctx: PrecisionContext) -> IntPoly:
    """Monic degree-h polynomial whose roots are j((b + sqrt(-N))/(2a)) over the reduced classes."""
    _check_hilbert_input(N)
    classes = quadforms.enumerate(-N).classes
    digits = max(invariant_digits(N, len(classes)), math.ceil(_log10_magnitude_sum(N, classes, 1)) + 100)
    work = _context_for(ctx, digits)

    def roots(c: PrecisionContext) -> list:
        with c.workprec():
            points = [mpmath.mpc(mpmath.mpf(f.b) / (2 * f.a), mp.sqrt(N) / (2 * f.a)) for f in classes]
        return [klein_j(z, c) for z in points]

    return certified_poly(roots, work, label=f"hilbert({N})")


def _weber_forms(N: int) -> tuple[quadforms.ClassGroup, int]:
    check_level48(N)
    if N in (3, 27):
        raise DomainError("F and G are built for squarefree N coprime to 3", N=N)
    group = quadforms.enumerate(-4 * N)
    h = quadforms.enumerate(-N).h
    if group.h != 3 * h:
        raise GroupingError("class number of -4N is not three times that of -N", N=N, h=h, h4=group.h)
    return group, h


def weber_poly(N: int, ctx: PrecisionContext) -> IntPoly:
    """Degree-3h minimal polynomial of r over Q, from all Broker roots."""
    group, h = _weber_forms(N)
    digits = max(invariant_digits(N, h), math.ceil(_log10_magnitude_sum(N, group.classes, 24)) + 20 * h + 100)

    def roots(c: PrecisionContext) -> list:
        return [broker_root(f, N, c) for f in group.classes]

    return certified_poly(roots, _context_for(ctx, digits), label=f"weber({N})")


def group_roots(group: quadforms.ClassGroup, N: int, h: int, ctx: PrecisionContext) -> list[tuple]:
    """Triples of Broker roots sharing a gamma_2 value, principal triple first."""
    if group.is_cyclic:
        labels = group.cyclic_labelling()
        roots = [broker_root(f, N, ctx) for f in labels]
        return [(roots[j], roots[j + h], roots[j + 2 * h]) for j in range(h)]

    roots = [broker_root(f, N, ctx) for f in group.classes]
    with ctx.workprec():
        keyed = sorted(((raw(gamma2_from_r(r)), r) for r in roots), key=lambda item: item[0].real)
        runs = [[keyed[0]]]
        for item in keyed[1:]:
            previous = runs[-1][-1][0]
            scale = max(1, abs(previous))
            if abs(item[0].real - previous.real) <= ctx.real_tolerance * scale:
                runs[-1].append(item)
            else:
                runs.append([item])
        triples = []
        for run in runs:
            # conjugate gamma_2 values share a real part; the imaginary sign separates them
            for side in (1, 0, -1):
                members = [r for value, r in run if _sign(value.imag, ctx) == side]
                if not members:
                    continue
                if len(members) != 3:
                    raise GroupingError("gamma_2 cluster does not have three members", N=N, size=len(members))
                triples.append(tuple(members))
    if len(triples) != h:
        raise GroupingError("wrong number of gamma_2 clusters", N=N, clusters=len(triples), h=h)
    principal = quadforms.principal_form(-4 * N)
    principal_root = broker_root(principal, N, ctx)
    triples.sort(key=lambda t: 0 if any(_same(r, principal_root, ctx) for r in t) else 1)
    logger.info("Grouped Weber roots by gamma_2", N=N, clusters=len(triples))
    return triples


def _sign(x: mpmath.mpf, ctx: PrecisionContext) -> int:
    if abs(x) <= ctx.real_tolerance * max(1, abs(x)):
        return 0
    return 1 if x > 0 else -1


def _same(a, b, ctx: PrecisionContext) -> bool:
    with ctx.workprec():
        return abs(raw(a) - raw(b)) <= ctx.real_tolerance * max(1, abs(raw(a)))


def _f_root(triple: tuple):
    return (triple[0] + triple[1] + triple[2]) / 2


def _g_root(triple: tuple):
    return -(1 / triple[0] + 1 / triple[1] + 1 / triple[2])


def invariant_polys(N: int, ctx: PrecisionContext) -> tuple[IntPoly, IntPoly]:
    """F and G: degree-h polynomials over the gamma_2 triples of Broker roots."""
    group, h = _weber_forms(N)
    g_digits = invariant_digits(N, h)
    f_digits = max(g_digits, math.ceil(_log10_magnitude_sum(N, group.classes, 24)) + 20 * h + 100)

    def f_roots(c: PrecisionContext) -> list:
        return [_f_root(t) for t in group_roots(group, N, h, c)]

    def g_roots(c: PrecisionContext) -> list:
        return [_g_root(t) for t in group_roots(group, N, h, c)]

    F = certified_poly(f_roots, _context_for(ctx, f_digits), label=f"F({N})")
    G = certified_poly(g_roots, _context_for(ctx, g_digits), label=f"G({N})")
    return F, G


def poly_index(p: IntPoly, N: int) -> int:
    """sqrt(disc(p) / (-N)^((d-1)/2)) for monic p of odd degree d."""
    from exactpoly import discriminant

    d = p.degree
    if d % 2 == 0 or not p.is_monic:
        raise DomainError("index is defined here for monic polynomials of odd degree", degree=d)
    disc = discriminant(p)
    field_disc = (-N) ** ((d - 1) // 2)
    quotient, remainder = divmod(disc, field_disc)
    if remainder or quotient <= 0:
        raise AssumptionFailure(
            "discriminant is not a square multiple of the assumed field discriminant", N=N, degree=d
        )
    root, exact = sympy.integer_nthroot(quotient, 2)
    if not exact:
        raise AssumptionFailure("discriminant quotient is not a perfect square", N=N, degree=d)
    return int(root)


def minimal_polynomial(p: IntPoly, root, ctx: PrecisionContext) -> IntPoly:
    """The irreducible factor of p vanishing at the given root."""
    _, factors = sympy.factor_list(p.to_sympy())
    best, best_residual = None, None
    for factor, _multiplicity in factors:
        candidate = IntPoly.from_sympy(sympy.Poly(factor, sympy.Symbol("x")))
        if candidate.leading < 0:
            candidate = IntPoly(tuple(-c for c in candidate.coefficients))
        value, scale = candidate.evaluate(root, ctx)
        with ctx.workprec():
            residual = abs(value) / max(scale, 1)
        if best_residual is None or residual < best_residual:
            best, best_residual = candidate, residual
    if best is None or best_residual > ctx.loose_tolerance:
        raise PrecisionError("no factor vanishes at the root", degree=p.degree)
    return best


def real_roots(p: IntPoly, ctx: PrecisionContext) -> list[mpmath.mpf]:
    with ctx.workprec():
        roots = mp.polyroots(list(reversed(p.coefficients)), maxsteps=200, extraprec=2 * ctx.bits)
        return sorted(
            mpmath.re(x) for x in roots if abs(mpmath.im(x)) <= ctx.real_tolerance * max(1, abs(x))
        )


def g_minimal_polynomial(N: int, ctx: PrecisionContext) -> tuple[IntPoly, int]:
    """Minimal polynomial of g(N) and the class number h, for the degree test of the pair."""
    _, G = invariant_polys(N, ctx)
    bundle = fg_pair(N, ctx)
    return minimal_polynomial(G, bundle.g, bundle.g.ctx), G.degree


def f_minimal_polynomial(N: int, ctx: PrecisionContext) -> tuple[IntPoly, int]:
    F, _ = invariant_polys(N, ctx)
    bundle = fg_pair(N, ctx)
    return minimal_polynomial(F, bundle.f, bundle.f.ctx), F.degree
