"""Exact integer polynomial algebra and solution of the small sub-fields by radicals.

Resultants and discriminants are exact (sympy's subresultant PRS, with the Sylvester determinant as
an independent path). ``derive_modular_relation`` eliminates f from the zero relation and the
gamma_2 relation to obtain the polynomial Phi(J, g) linking g to the j-invariant.

Resultant convention: Res(p, q) = lc(p)^deg(q) * prod q(alpha) over the roots alpha of p, so
Res(x - 1, x + 1) = 2 and Res(x + 1, x - 1) = -2.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy
from mpmath import mp
from structlog import get_logger
from sympy.polys.subresultants_qq_zz import sylvester

from apnum import PrecisionContext, RealAP, cos_pi_over_7_radical, nthroot, raw
from errors import DerivationError, DomainError, NotFoundError, PrecisionError, UnsupportedCaseError
from invariants import GAMMA2_RELATION, ZERO_RELATION
from latrel import lindep
from polybuild import IntPoly

logger = get_logger()

# (J, g) at N = 11, 19, 43, 67, 163
MODULAR_RELATION_POINTS = (
    (-32768, -1),
    (-884736, 1),
    (-884736000, 0),
    (-147197952000, 1),
    (-262537412640768000, -2),
)
RESOLVENT_PRIMES = (5, 7)


@dataclass(frozen=True)
class MultiPoly:
    """Sparse integer polynomial; ``terms`` maps exponent tuples (in ``variables`` order) to coefficients."""

    variables: tuple[str, ...]
    terms: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.variables)) != len(self.variables):
            raise DomainError("repeated variable", variables=self.variables)
        terms = {}
        for exponents, c in self.terms.items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != len(self.variables) or any(e < 0 for e in exponents):
                raise DomainError("exponent tuple does not match the variables", exponents=exponents)
            if int(c) != c:
                raise DomainError("coefficients must be integers", coefficient=c)
            if c:
                terms[exponents] = terms.get(exponents, 0) + int(c)
        object.__setattr__(self, "terms", {e: c for e, c in terms.items() if c})

    @classmethod
    def from_fg(cls, coefficients: dict) -> "MultiPoly":
        """From a {(deg f, deg g): c} table such as the zero relation."""
        return cls(("f", "g"), dict(coefficients))

    @classmethod
    def from_poly(cls, poly: sympy.Poly) -> "MultiPoly":
        variables = tuple(str(s) for s in poly.gens)
        return cls(variables, {monomial: int(c) for monomial, c in poly.terms()})

    @classmethod
    def from_expr(cls, expr, variables: Sequence[str]) -> "MultiPoly":
        variables = tuple(variables)
        if not variables:
            return cls.constant(int(sympy.Integer(expr)))
        return cls.from_poly(sympy.Poly(expr, *sympy.symbols(variables), domain="ZZ"))

    @classmethod
    def constant(cls, c: int) -> "MultiPoly":
        return cls((), {(): c})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def symbols(self) -> tuple[sympy.Symbol, ...]:
        return tuple(sympy.Symbol(v) for v in self.variables)

    def to_poly(self, variables: Sequence[str] | None = None) -> sympy.Poly:
        variables = self.variables if variables is None else tuple(variables)
        missing = set(self.variables) - set(variables)
        if missing or not variables:
            raise DomainError("cannot express the polynomial in these variables", variables=variables)
        positions = [self.variables.index(v) if v in self.variables else None for v in variables]
        data = {
            tuple(0 if i is None else exponents[i] for i in positions): c for exponents, c in self.terms.items()
        }
        return sympy.Poly.from_dict(data or {(0,) * len(variables): 0}, *sympy.symbols(variables), domain="ZZ")

    def to_expr(self):
        gens = self.symbols()
        return sympy.Add(*(c * sympy.Mul(*(s**e for s, e in zip(gens, exps))) for exps, c in self.terms.items()))

    def reordered(self, variables: Sequence[str]) -> "MultiPoly":
        variables = tuple(variables)
        if set(variables) != set(self.variables):
            raise DomainError("reordering must keep the same variables", variables=variables)
        positions = [self.variables.index(v) for v in variables]
        return MultiPoly(variables, {tuple(e[i] for i in positions): c for e, c in self.terms.items()})

    def degree(self, var: str) -> int:
        if self.is_zero:
            return -1
        i = self.variables.index(var)
        return max(e[i] for e in self.terms)

    def coefficient(self, exponents: Sequence[int]) -> int:
        return self.terms.get(tuple(exponents), 0)

    def content(self) -> int:
        return math.gcd(*self.terms.values()) if self.terms else 0

    def primitive(self) -> "MultiPoly":
        content = self.content()
        if content == 0:
            return self
        return MultiPoly(self.variables, {e: c // content for e, c in self.terms.items()})

    def as_integer(self) -> int:
        if any(any(e) for e in self.terms):
            raise DomainError("polynomial is not constant", variables=self.variables)
        return self.coefficient((0,) * len(self.variables))

    def evaluate(self, **values) -> int | Fraction:
        """Exact value at integer or rational points; every variable must be given."""
        if set(values) != set(self.variables):
            raise DomainError("evaluation needs a value for every variable", variables=self.variables)
        point = [values[v] for v in self.variables]
        return sum(c * math.prod(x**e for x, e in zip(point, exps)) for exps, c in self.terms.items())

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "terms": {",".join(str(e) for e in exps): str(c) for exps, c in sorted(self.terms.items(), reverse=True)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "MultiPoly":
        variables = tuple(data["variables"])
        terms = {}
        for key, c in data["terms"].items():
            terms[tuple(int(e) for e in key.split(",")) if key else ()] = int(c)
        return cls(variables, terms)


def _common_variables(p: MultiPoly, q: MultiPoly, var: str) -> tuple[str, ...]:
    if var not in p.variables or var not in q.variables:
        raise DomainError("both polynomials must be in the eliminated variable", var=var)
    if p.is_zero or q.is_zero:
        raise DomainError("resultant of a zero polynomial is not defined", var=var)
    return tuple(dict.fromkeys(v for v in p.variables + q.variables if v != var))


def _as_multipoly(result, rest: tuple[str, ...]) -> MultiPoly:
    if isinstance(result, sympy.Poly):
        return MultiPoly.from_poly(result).reordered(rest)
    if rest:
        return MultiPoly.from_expr(result, rest)
    return MultiPoly.constant(int(result))


def resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """Res_var(p, q) by the subresultant PRS; the result is in the remaining variables of p then q."""
    rest = _common_variables(p, q, var)
    gens = (var,) + rest
    result = p.to_poly(gens).resultant(q.to_poly(gens))
    return _as_multipoly(result, rest)


def sylvester_resultant(p: MultiPoly, q: MultiPoly, var: str) -> MultiPoly:
    """Res_var(p, q) as the fraction-free (Bareiss) determinant of the Sylvester matrix."""
    rest = _common_variables(p, q, var)
    if p.degree(var) < 1 or q.degree(var) < 1:
        return resultant(p, q, var)
    x = sympy.Symbol(var)
    matrix = sylvester(p.to_expr(), q.to_expr(), x, 1)
    determinant = sympy.expand(matrix.det(method="bareiss"))
    return _as_multipoly(determinant, rest)


def discriminant(p: IntPoly) -> int:
    """(-1)^(d(d-1)/2) Res(p, p') / lc(p)."""
    d = p.degree
    if d < 2:
        raise DomainError("discriminant needs degree at least 2", degree=d)
    poly = p.to_sympy(sympy.Symbol("x"))
    res = resultant(MultiPoly.from_poly(poly), MultiPoly.from_poly(poly.diff()), "x").as_integer()
    quotient, remainder = divmod(res, p.leading)
    if remainder:
        raise DerivationError("resultant is not divisible by the leading coefficient", degree=d)
    return (-1) ** (d * (d - 1) // 2) * quotient


def zero_relation() -> MultiPoly:
    return MultiPoly.from_fg(ZERO_RELATION)


def gamma2_relation() -> MultiPoly:
    """t(f, g) with gamma_2 = -32 t."""
    return MultiPoly.from_fg(GAMMA2_RELATION)


def vanishes_at_points(phi: MultiPoly) -> bool:
    return all(phi.evaluate(J=J, g=g) == 0 for J, g in MODULAR_RELATION_POINTS)


def _normalize(phi: MultiPoly) -> MultiPoly:
    phi = phi.primitive().reordered(("J", "g"))
    leading = max(phi.terms, key=lambda e: (e[1], e[0]))
    return -phi if phi.terms[leading] < 0 else phi


def _select_factor(phi: MultiPoly) -> MultiPoly:
    poly = phi.to_poly(("J", "g"))
    logger.info("Elimination result fails the data points, factoring", terms=len(phi.terms))
    _, factors = poly.sqf_part().factor_list()
    for factor, _multiplicity in factors:
        candidate = _normalize(MultiPoly.from_poly(factor))
        if candidate.degree("J") > 0 and vanishes_at_points(candidate):
            return candidate
    raise DerivationError("no factor of the elimination result vanishes at all data points")


def derive_modular_relation(cross_check: bool = False) -> MultiPoly:
    """Phi(J, g): eliminate f with t = -gamma_2/32, then t with J = -32768 t^3."""
    relation = gamma2_relation()
    with_t = MultiPoly(("f", "g", "t"), {e + (0,): c for e, c in relation.terms.items()} | {(0, 0, 1): -1})
    zero = MultiPoly(("f", "g", "t"), {e + (0,): c for e, c in zero_relation().terms.items()})
    R1 = resultant(zero, with_t, "f")
    logger.info("Eliminated f", degree_g=R1.degree("g"), degree_t=R1.degree("t"), terms=len(R1.terms))
    if cross_check:
        if sylvester_resultant(zero, with_t, "f").terms != R1.terms:
            raise DerivationError("subresultant and Sylvester resultants differ")
        logger.info("Sylvester determinant agrees with the subresultant PRS")
    cube = MultiPoly(("t", "J"), {(3, 0): 32768, (0, 1): 1})
    phi = _normalize(resultant(R1, cube, "t"))
    logger.info("Eliminated t", degree_J=phi.degree("J"), degree_g=phi.degree("g"), terms=len(phi.terms))
    if not vanishes_at_points(phi):
        phi = _select_factor(phi)
    return phi


@dataclass(frozen=True)
class CubicRadical:
    """Real root u + (A + sqrt(B))^(1/3) + (A - sqrt(B))^(1/3) with real cube roots."""

    u: Fraction
    A: Fraction
    B: Fraction
    description: str
    value: RealAP

    def to_json(self) -> dict:
        return {
            "u": str(self.u),
            "A": str(self.A),
            "B": str(self.B),
            "description": self.description,
            "value": self.value.to_json(),
        }


def _rational_sqrt(x: Fraction) -> Fraction | None:
    num, num_exact = sympy.integer_nthroot(x.numerator, 2)
    den, den_exact = sympy.integer_nthroot(x.denominator, 2)
    return Fraction(int(num), int(den)) if num_exact and den_exact else None


def _cube_root_text(A: Fraction, B: Fraction) -> tuple[str, str]:
    s = _rational_sqrt(B)
    if s is not None:
        return f"({A + s})^(1/3)", f"({A - s})^(1/3)"
    return f"({A} + sqrt({B}))^(1/3)", f"({A} - sqrt({B}))^(1/3)"


def _cubic_description(u: Fraction, A: Fraction, B: Fraction) -> str:
    parts = [] if u == 0 else [str(u)]
    s = _rational_sqrt(B)
    for text, exact in zip(_cube_root_text(A, B), (None if s is None else A + s, None if s is None else A - s)):
        if exact != 0:
            parts.append(text)
    return " + ".join(parts) or "0"


def cubic_radicals(p: IntPoly, ctx: PrecisionContext) -> CubicRadical:
    """Cardano's formula for a monic cubic with a single real root."""
    if p.degree != 3 or not p.is_monic:
        raise DomainError("Cardano's formula is applied to monic cubics", degree=p.degree)
    a0, a1, a2 = (Fraction(c) for c in p.coefficients[:3])
    u = -a2 / 3
    P = a1 - a2 * a2 / 3
    Q = 2 * a2**3 / 27 - a2 * a1 / 3 + a0
    A = -Q / 2
    B = Q * Q / 4 + P**3 / 27
    if B < 0:
        raise UnsupportedCaseError("cubic has three real roots; real radicals are not attempted", B=str(B))
    with ctx.workprec():
        root_b = mp.sqrt(raw(B))
        first = nthroot(raw(A) + root_b, 3, ctx)
        second = nthroot(raw(A) - root_b, 3, ctx)
        total = raw(u) + first.value + second.value
        scale = abs(raw(u)) + abs(first.value) + abs(second.value)
        error = ctx.tolerance * scale / max(abs(total), ctx.tolerance)
    value = RealAP(value=total, error_bound=error, ctx=ctx)
    residual, poly_scale = p.evaluate(total, ctx)
    with ctx.workprec():
        if abs(residual) > ctx.loose_tolerance * max(1, poly_scale):
            raise PrecisionError("Cardano value does not satisfy the cubic", residual=mpmath.nstr(residual, 5))
    description = _cubic_description(u, A, B)
    logger.debug("Solved cubic by radicals", u=str(u), A=str(A), B=str(B))
    return CubicRadical(u=u, A=A, B=B, description=description, value=value)


@dataclass(frozen=True)
class ResolventData:
    """p-th powers of the Lagrange resolvents: u_n = Re sum_k (A_k + B_k sqrt(-N)) exp(2 pi i k n / p).

    ``negated_terms`` lists the n with u_n < 0, whose real p-th root is written -(-u_n)^(1/p).
    """

    N: int
    p: int
    pairs: tuple[tuple[Fraction, Fraction], ...]
    negated_terms: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.p not in RESOLVENT_PRIMES:
            raise DomainError("resolvents are supported for p = 5 and p = 7", p=self.p)
        if len(self.pairs) != (self.p - 1) // 2:
            raise DomainError("expected (p - 1)/2 resolvent pairs", p=self.p, pairs=len(self.pairs))
        pairs = tuple((Fraction(A), Fraction(B)) for A, B in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "negated_terms", tuple(sorted(self.negated_terms)))

    @property
    def root_of_unity_order(self) -> int:
        return self.p

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "p": self.p,
            "root_of_unity_order": self.p,
            "pairs": [{"A": str(A), "B": str(B)} for A, B in self.pairs],
            "negated_terms": list(self.negated_terms),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ResolventData":
        return cls(
            N=int(data["N"]),
            p=int(data["p"]),
            pairs=tuple((Fraction(pair["A"]), Fraction(pair["B"])) for pair in data["pairs"]),
            negated_terms=tuple(data.get("negated_terms", ())),
        )


def roots_of_unity(p: int, ctx: PrecisionContext) -> list:
    """exp(2 pi i m/p) for m = 0 .. p-1; for p = 7 the cosine comes from its cube-root expression."""
    with ctx.workprec():
        if p == 7:
            c = 2 * (raw(cos_pi_over_7_radical(ctx)) / 6) ** 2 - 1
            zeta = mpmath.mpc(c, mp.sqrt(1 - c * c))
        else:
            zeta = mp.expjpi(mpmath.mpf(2) / p)
        return [zeta**m for m in range(p)]


def resolvent_terms(data: ResolventData, ctx: PrecisionContext) -> list[RealAP]:
    """u_1 ... u_(p-1); the relative error bound accounts for cancellation among the terms."""
    terms = []
    unit = roots_of_unity(data.p, ctx)
    with ctx.workprec():
        root_n = mp.sqrt(data.N)
        for n in range(1, data.p):
            parts = []
            for k, (A, B) in enumerate(data.pairs, start=1):
                z = unit[k * n % data.p]
                parts.append(raw(A) * z.real)
                parts.append(-raw(B) * root_n * z.imag)
            value = mp.fsum(parts)
            scale = mp.fsum(abs(x) for x in parts)
            if value == 0:
                error = mpmath.mpf(0) if scale == 0 else mpmath.inf
            else:
                error = 4 * ctx.tolerance * scale / abs(value)
            terms.append(RealAP(value=value, error_bound=error, ctx=ctx))
    return terms


def _rational_term(q: IntPoly) -> Fraction:
    """Sum of the roots of q."""
    return Fraction(-q.coefficients[-2], q.leading)


def resolvent_value(data: ResolventData, q: IntPoly, ctx: PrecisionContext) -> RealAP:
    """(sum of roots + sum of the real p-th roots of u_n) / p, without checking q at the result."""
    if q.degree != data.p:
        raise DomainError("polynomial degree differs from the resolvent prime", degree=q.degree, p=data.p)
    terms = resolvent_terms(data, ctx)
    negated = tuple(n for n, u in enumerate(terms, start=1) if u.value < 0)
    if data.negated_terms and negated != data.negated_terms:
        raise DerivationError(
            "signs of the resolvent powers differ from the recorded pattern",
            recorded=data.negated_terms,
            computed=negated,
        )
    roots = [nthroot(u, data.p, ctx) for u in terms]
    with ctx.workprec():
        total = (raw(_rational_term(q)) + mp.fsum(root.value for root in roots)) / data.p
        absolute = mp.fsum(abs(root.value) * root.error_bound for root in roots) / data.p
        error = absolute / abs(total) + ctx.tolerance if total != 0 else absolute
    return RealAP(value=total, error_bound=error, ctx=ctx)


def radical_eval(data: ResolventData, q: IntPoly, ctx: PrecisionContext) -> RealAP:
    """The real root of q from its resolvent data; q must vanish at the result to working precision."""
    value = resolvent_value(data, q, ctx)
    residual, scale = q.evaluate(value, ctx)
    with ctx.workprec():
        relative = abs(residual) / max(1, scale)
    if relative >= ctx.tolerance:
        raise DerivationError(
            "resolvent data does not reproduce a root",
            N=data.N,
            p=data.p,
            residual=mpmath.nstr(relative, 5),
        )
    logger.info("Evaluated root by radicals", N=data.N, p=data.p, residual=mpmath.nstr(relative, 5))
    return value


def _pair_text(A: Fraction, B: Fraction, N: int) -> str:
    sign = "-" if B < 0 else "+"
    return f"({A} {sign} {abs(B)} sqrt(-{N}))"


def radical_description(data: ResolventData, q: IntPoly, variable: str = "x") -> str:
    """Nested-radical layout of the root: the u_n definition followed by the combination of p-th roots."""
    p = data.p
    terms = " + ".join(
        f"{_pair_text(A, B, data.N)} exp({2 * k} pi i n/{p})" for k, (A, B) in enumerate(data.pairs, start=1)
    )
    roots = []
    for n in range(1, p):
        if n in data.negated_terms:
            roots.append(f"- (-u_{n})^(1/{p})")
        else:
            roots.append(f"+ u_{n}^(1/{p})")
    head = _rational_term(q)
    combination = " ".join(roots)
    if head != 0:
        combination = f"{head} {combination}"
    elif combination.startswith("+ "):
        combination = combination[2:]
    return f"u_n = Re[{terms}] for n = 1..{p - 1}; {variable} = ({combination})/{p}"


def _conjugate_orderings(roots: list, ctx: PrecisionContext) -> list[list]:
    """Orderings x_0 (real), x_1, ..., x_(p-1) of the roots with x_(p-k) the conjugate of x_k."""
    with ctx.workprec():
        upper = [x for x in roots if mpmath.im(x) > 0]
    orderings = []
    for chosen in itertools.permutations(upper):
        for flips in itertools.product((False, True), repeat=len(upper)):
            half = [mpmath.conj(x) if flip else x for x, flip in zip(chosen, flips)]
            orderings.append(half + [mpmath.conj(x) for x in reversed(half)])
    return orderings


def _complex_roots(q: IntPoly, ctx: PrecisionContext) -> tuple[mpmath.mpf, list]:
    with ctx.workprec():
        roots = mp.polyroots(list(reversed(q.coefficients)), maxsteps=200, extraprec=2 * ctx.bits)
        real = [x for x in roots if abs(mpmath.im(x)) <= ctx.real_tolerance * max(1, abs(x))]
        if len(real) != 1:
            raise DomainError("polynomial must have exactly one real root", real_roots=len(real))
        complex_roots = [x for x in roots if x is not real[0]]
        return mpmath.re(real[0]), complex_roots


def _recognize(value: mpmath.mpf, N: int, p: int, ctx: PrecisionContext) -> tuple[tuple[Fraction, Fraction], ...]:
    """Integers with value = sum_k A_k cos(2 pi k/p) - B_k sqrt(N) sin(2 pi k/p)."""
    half = (p - 1) // 2
    with ctx.workprec():
        basis = [value]
        basis += [mp.cos(2 * mp.pi * k / p) for k in range(1, half + 1)]
        basis += [mp.sqrt(N) * mp.sin(2 * mp.pi * k / p) for k in range(1, half + 1)]
    relation = lindep(basis, ctx).coefficients
    m0 = relation[0]
    if m0 == 0:
        raise NotFoundError("relation does not involve the resolvent power", N=N, p=p)
    return tuple(
        (Fraction(-relation[k], m0), Fraction(relation[half + k], m0)) for k in range(1, half + 1)
    )


def derive_resolvents(q: IntPoly, N: int, ctx: PrecisionContext) -> ResolventData:
    """Search root orderings until the p-th power of the first resolvent is recognized over Z[sqrt(-N)]."""
    p = q.degree
    if p not in RESOLVENT_PRIMES:
        raise DomainError("resolvents are supported for prime degree 5 or 7", degree=p)
    work = PrecisionContext.from_digits(max(ctx.digits, 40 * p + 100), guard_bits=ctx.guard_bits)
    real, others = _complex_roots(q, work)
    orderings = _conjugate_orderings(others, work)
    logger.info("Searching resolvent orderings", N=N, p=p, candidates=len(orderings), bits=work.bits)
    for index, ordering in enumerate(orderings):
        with work.workprec():
            zeta = mp.expjpi(mpmath.mpf(2) / p)
            resolvent = real + mp.fsum(zeta**k * x for k, x in enumerate(ordering, start=1))
            power = resolvent**p
            if abs(mpmath.im(power)) > work.real_tolerance * max(1, abs(power)):
                continue
            power = mpmath.re(power)
        try:
            pairs = _recognize(power, N, p, work)
        except (NotFoundError, PrecisionError):
            continue
        candidate = ResolventData(N=N, p=p, pairs=pairs)
        terms = resolvent_terms(candidate, work)
        data = ResolventData(
            N=N, p=p, pairs=pairs, negated_terms=tuple(n for n, u in enumerate(terms, start=1) if u.value < 0)
        )
        try:
            radical_eval(data, q, work)
        except DerivationError:
            continue
        logger.info("Recognized resolvent data", N=N, p=p, ordering=index)
        return data
    raise NotFoundError("no root ordering gives recognizable resolvents", N=N, p=p, bits=work.bits)
