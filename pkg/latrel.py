"""Integer relations and minimal polynomials of real numbers by lattice reduction.

Values are scaled by 2^(bits - 2*guard_bits), rounded, and appended to an identity basis, one row
per value; short vectors of the LLL-reduced basis carry the relation in their first columns. The
lattice is built from values truncated to bits/1.25 and every candidate is checked again at the
full precision of the context.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
from mpmath import mp
from structlog import get_logger
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

import quadforms
from apnum import PrecisionContext, RealAP, raw
from chowla import chowla_lambda
from errors import DomainError, InconclusiveError, NotFoundError, PrecisionError
from polybuild import IntPoly

logger = get_logger()

LLL_DELTA = QQ(99, 100)
MIN_CONFIDENCE_GAP = 2**16
LATTICE_FACTOR = 1.25
MAX_UNIT_ESCALATIONS = 3
LN10 = math.log(10)


@dataclass(frozen=True)
class RelationResult:
    coefficients: tuple[int, ...]
    residual: mpmath.mpf
    confidence_gap: mpmath.mpf

    def to_json(self) -> dict:
        return {
            "coefficients": [str(c) for c in self.coefficients],
            "residual": mpmath.nstr(self.residual, 5),
            "confidence_gap": mpmath.nstr(self.confidence_gap, 5),
        }


def lll_reduce(basis: Sequence[Sequence[int]]) -> list[list[int]]:
    """LLL-reduce the rows of an integer basis with delta = 0.99."""
    rows = [[int(v) for v in row] for row in basis]
    if not rows:
        raise DomainError("empty basis")
    matrix = DomainMatrix([[ZZ(v) for v in row] for row in rows], (len(rows), len(rows[0])), ZZ)
    if matrix.rank() < len(rows):
        raise DomainError("basis rows are linearly dependent", rows=len(rows))
    reduced = matrix.lll(delta=LLL_DELTA)
    return [[int(v) for v in row] for row in reduced.to_list()]


def _norm(row: Sequence[int]) -> int:
    return sum(v * v for v in row)


def _lattice_context(ctx: PrecisionContext) -> PrecisionContext:
    return PrecisionContext(bits=max(128, int(ctx.bits / LATTICE_FACTOR)), guard_bits=ctx.guard_bits)


def _reduced_candidates(values: Sequence, ctx: PrecisionContext) -> tuple[list[tuple[int, ...]], list[int]]:
    """Relation candidates from the reduced lattice, shortest first."""
    lattice_ctx = _lattice_context(ctx)
    n = len(values)
    if lattice_ctx.bits - 2 * lattice_ctx.guard_bits < 32:
        raise PrecisionError("precision too low to build a relation lattice", bits=ctx.bits)
    with lattice_ctx.workprec():
        scale = mpmath.ldexp(1, lattice_ctx.bits - 2 * lattice_ctx.guard_bits)
        scaled = [int(mpmath.nint(raw(v) * scale)) for v in values]
    basis = [[1 if i == j else 0 for j in range(n)] + [scaled[i]] for i in range(n)]
    reduced = lll_reduce(basis)
    reduced.sort(key=_norm)
    return [tuple(row[:n]) for row in reduced], [_norm(row) for row in reduced]


def _residual(coefficients: Sequence[int], values: Sequence, ctx: PrecisionContext) -> mpmath.mpf:
    with ctx.workprec():
        terms = [c * raw(v) for c, v in zip(coefficients, values)]
        return abs(mp.fsum(terms)) / max(1, mp.fsum(abs(t) for t in terms))


def lindep(values: Sequence[RealAP], ctx: PrecisionContext) -> RelationResult:
    """Small integer vector m with sum m_i v_i = 0 to half the working precision."""
    if len(values) < 2:
        raise DomainError("lindep needs at least two values", count=len(values))
    candidates, norms = _reduced_candidates(values, ctx)
    best = candidates[0]
    gap = _gap(norms, 1)
    residual = _residual(best, values, ctx)
    with ctx.workprec():
        threshold = mpmath.ldexp(1, -(ctx.bits // 2))
    if residual >= threshold or gap <= MIN_CONFIDENCE_GAP or not any(best):
        raise NotFoundError(
            "no integer relation at this precision",
            bits=ctx.bits,
            residual=mpmath.nstr(residual, 5),
            confidence_gap=mpmath.nstr(gap, 5),
        )
    if best[0] < 0 or (best[0] == 0 and next(c for c in best if c) < 0):
        best = tuple(-c for c in best)
    return RelationResult(coefficients=best, residual=residual, confidence_gap=gap)


def _gap(norms: Sequence[int], index: int) -> mpmath.mpf:
    if index >= len(norms):
        return mpmath.inf
    if norms[0] == 0:
        return mpmath.mpf(0)
    return mpmath.sqrt(mpmath.mpf(norms[index]) / norms[0])


def _primitive(coefficients: Sequence[int]) -> list[int]:
    coefficients = list(coefficients)
    while coefficients and coefficients[-1] == 0:
        coefficients.pop()
    # a vanishing constant term means a multiple of x
    while coefficients and coefficients[0] == 0:
        coefficients.pop(0)
    content = math.gcd(*coefficients) if coefficients else 0
    if content == 0:
        return []
    coefficients = [c // content for c in coefficients]
    if coefficients[-1] < 0:
        coefficients = [-c for c in coefficients]
    return coefficients


def algdep(x: RealAP, degree: int, ctx: PrecisionContext) -> IntPoly:
    """Primitive integer polynomial of degree <= degree vanishing at x, with positive leading coefficient."""
    if degree < 1:
        raise DomainError("degree must be positive", degree=degree)
    with ctx.workprec():
        xv = raw(x)
        powers = [xv**k for k in range(degree + 1)]
    candidates, norms = _reduced_candidates(powers, ctx)
    coefficients = _primitive(candidates[0])
    if len(coefficients) < 2:
        raise NotFoundError("lattice gave no nonconstant polynomial", degree=degree, bits=ctx.bits)
    poly = IntPoly(tuple(coefficients))
    # x^k p(x) for k <= degree - deg p are all short, so compare against the first vector beyond them
    gap = _gap(norms, degree - poly.degree + 1)
    value, scale = poly.evaluate(xv, ctx)
    with ctx.workprec():
        residual = abs(value) / max(1, scale)
        threshold = mpmath.ldexp(1, -(ctx.bits // 2))
    if residual >= threshold or gap <= MIN_CONFIDENCE_GAP:
        raise NotFoundError(
            "no polynomial relation at this precision",
            degree=degree,
            bits=ctx.bits,
            residual=mpmath.nstr(residual, 5),
            confidence_gap=mpmath.nstr(gap, 5),
        )
    _check_newton(poly, xv, ctx)
    logger.debug("Recognized algebraic number", degree=poly.degree, bits=ctx.bits, gap=mpmath.nstr(gap, 5))
    return poly


def _check_newton(poly: IntPoly, x: mpmath.mpf, ctx: PrecisionContext) -> None:
    """A Newton step from x must stay at x, otherwise the polynomial is a near miss."""
    derivative = [k * c for k, c in enumerate(poly.coefficients)][1:]
    with ctx.workprec():
        slope = mp.polyval(list(reversed(derivative)), x)
        if slope == 0:
            raise PrecisionError("recognized polynomial has a multiple root at x", degree=poly.degree)
        step = mp.polyval(list(reversed(poly.coefficients)), x) / slope
        if abs(step) > mpmath.ldexp(1, -(ctx.bits // 2)) * max(1, abs(x)):
            raise NotFoundError("Newton refinement moves away from x", degree=poly.degree)


@dataclass(frozen=True)
class UnitReport:
    N: int
    h: int
    degree: int
    L: IntPoly
    is_unit: bool
    used_square: bool
    precision_bits: int

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "h": self.h,
            "degree_found": self.degree,
            "poly": [str(c) for c in self.L.coefficients],
            "is_unit": self.is_unit,
            "used_square": self.used_square,
            "precision_bits": self.precision_bits,
        }


def is_unit_polynomial(p: IntPoly) -> bool:
    return p.is_monic and abs(p.coefficients[0]) == 1


def lambda_digits(N: int, degree: int) -> int:
    """Decimal precision for recognizing lambda at the given degree."""
    per_root = math.pi * math.sqrt(N) / (12 * LN10)
    return math.ceil((degree + 1) * (per_root + 10)) + 50


def unit_test_lambda(N: int, ctx: PrecisionContext) -> UnitReport:
    """Recognize lambda at degree h, then 2h, then lambda^2 at degree h, escalating precision up to 3 times."""
    h = quadforms.enumerate(-N).h
    if h == 1:
        lam = chowla_lambda(N, ctx)
        return UnitReport(N=N, h=1, degree=1, L=IntPoly((-1, 1)), is_unit=raw(lam) == 1, used_square=False,
                          precision_bits=ctx.bits)

    base = PrecisionContext.from_digits(max(ctx.digits, lambda_digits(N, 2 * h)), guard_bits=ctx.guard_bits)
    recognized = None
    current = base
    for escalation in range(MAX_UNIT_ESCALATIONS + 1):
        lam = chowla_lambda(N, current)
        with current.workprec():
            squared = RealAP(value=raw(lam) ** 2, error_bound=2 * lam.error_bound, ctx=current)
        for value, degree, used_square in ((lam, h, False), (lam, 2 * h, False), (squared, h, True)):
            try:
                L = algdep(value, degree, current)
            except NotFoundError as e:
                logger.debug("Lambda not recognized", N=N, degree=degree, squared=used_square, reason=str(e))
                continue
            report = UnitReport(
                N=N,
                h=h,
                degree=L.degree,
                L=L,
                is_unit=is_unit_polynomial(L),
                used_square=used_square,
                precision_bits=current.bits,
            )
            if report.is_unit:
                logger.info("Lambda recognized as a unit", N=N, h=h, squared=used_square, bits=current.bits)
                return report
            recognized = recognized or report
        if recognized is not None:
            logger.info("Lambda recognized but not as a unit", N=N, h=h, degree=recognized.degree)
            return recognized
        if escalation < MAX_UNIT_ESCALATIONS:
            logger.warning("Escalating precision for lambda", N=N, from_bits=current.bits, to_bits=2 * current.bits)
            current = current.doubled()
    raise InconclusiveError("lambda was not recognized", N=N, h=h, bits=current.bits)
