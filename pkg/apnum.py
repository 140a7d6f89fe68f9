"""Arbitrary-precision values, AGM, elementary functions and the Dedekind eta function.

All numerical work happens through ``mpmath`` under ``PrecisionContext.workprec()``; values
cross module boundaries wrapped in ``RealAP`` / ``ComplexAP`` together with a relative error
bound.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, TypeVar

import mpmath
from mpmath import mp
from structlog import get_logger

from errors import DomainError, PrecisionError

logger = get_logger()

LOG2_10 = math.log2(10)
MAX_ETA_TERMS = 100_000

T = TypeVar("T")


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in bits plus the guard bits reserved for accumulated error."""

    bits: int
    guard_bits: int = 64

    def __post_init__(self) -> None:
        if self.bits < 128:
            raise DomainError("precision must be at least 128 bits", bits=self.bits)
        if not 0 < self.guard_bits < self.bits:
            raise DomainError("guard bits must be positive and below the precision", guard_bits=self.guard_bits)

    @classmethod
    def from_digits(cls, digits: int, guard_bits: int = 64) -> "PrecisionContext":
        return cls(bits=max(128, math.ceil(digits * LOG2_10)), guard_bits=guard_bits)

    @property
    def digits(self) -> int:
        return int(self.bits / LOG2_10)

    @property
    def working_bits(self) -> int:
        return self.bits + self.guard_bits

    def workprec(self):
        return mp.workprec(self.working_bits)

    @property
    def tolerance(self) -> mpmath.mpf:
        """Accuracy promised for every returned value, 2^(-bits+guard_bits)."""
        return mpmath.ldexp(1, -self.bits + self.guard_bits)

    @property
    def loose_tolerance(self) -> mpmath.mpf:
        return mpmath.ldexp(1, -self.bits + 2 * self.guard_bits)

    @property
    def truncation(self) -> mpmath.mpf:
        return mpmath.ldexp(1, -self.bits - self.guard_bits)

    @property
    def real_tolerance(self) -> mpmath.mpf:
        # imaginary residue below this counts as noise
        return mpmath.ldexp(1, -(self.bits // 2))

    def scaled(self, factor: float) -> "PrecisionContext":
        return PrecisionContext(bits=math.ceil(self.bits * factor), guard_bits=self.guard_bits)

    def doubled(self) -> "PrecisionContext":
        return self.scaled(2)


def raw(x):
    """Unwrap an AP value or plain number into an mpmath number at the current precision."""
    if isinstance(x, (RealAP, ComplexAP)):
        return x.value
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, complex):
        return mpmath.mpc(x)
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    return mpmath.mpf(x)


def _error_of(x) -> mpmath.mpf:
    if isinstance(x, (RealAP, ComplexAP)):
        return x.error_bound
    return mpmath.mpf(0)


def _ctx_of(*values) -> "PrecisionContext | None":
    contexts = [v.ctx for v in values if isinstance(v, (RealAP, ComplexAP))]
    if not contexts:
        return None
    return min(contexts, key=lambda c: c.bits)


def wrap(value, ctx: PrecisionContext, error_bound=None):
    """Wrap an mpmath value computed under ``ctx`` with the default error bound."""
    if error_bound is None:
        error_bound = ctx.tolerance
    with ctx.workprec():
        error_bound = mpmath.mpf(error_bound)
        if isinstance(value, mpmath.mpc):
            return ComplexAP(value=value, error_bound=error_bound, ctx=ctx)
        return RealAP(value=mpmath.mpf(value), error_bound=error_bound, ctx=ctx)


class _APNumber:
    value: object
    error_bound: mpmath.mpf
    ctx: PrecisionContext

    def _binary(self, other, op: str, reflected: bool = False):
        ctx = _ctx_of(self, other)
        a, b = (other, self) if reflected else (self, other)
        ea, eb = _error_of(a), _error_of(b)
        with ctx.workprec():
            va, vb = raw(a), raw(b)
            ulp = mpmath.ldexp(1, -ctx.working_bits)
            if op == "add" or op == "sub":
                value = va + vb if op == "add" else va - vb
                absolute = ea * abs(va) + eb * abs(vb)
                if value == 0:
                    error = mpmath.mpf(0) if absolute == 0 else mpmath.inf
                else:
                    error = absolute / abs(value) + ulp
            elif op == "mul":
                value = va * vb
                error = ea + eb + ea * eb + ulp
            else:
                if vb == 0:
                    raise DomainError("division by zero")
                value = va / vb
                error = (ea + eb) / (1 - eb) + ulp if eb < 1 else mpmath.inf
        return wrap(value, ctx, error)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", reflected=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", reflected=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", reflected=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", reflected=True)

    def __neg__(self):
        with self.ctx.workprec():
            return wrap(-self.value, self.ctx, self.error_bound)

    def __abs__(self):
        with self.ctx.workprec():
            return wrap(abs(self.value), self.ctx, self.error_bound)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise DomainError("only integer powers are propagated", exponent=n)
        with self.ctx.workprec():
            value = self.value**n
            error = (1 + self.error_bound) ** abs(n) - 1 + mpmath.ldexp(1, -self.ctx.working_bits)
        return wrap(value, self.ctx, error)

    @property
    def certified_digits(self) -> int:
        if self.error_bound == 0:
            return self.ctx.digits
        if self.error_bound == mpmath.inf:
            return 0
        digits = int(mpmath.floor(-mpmath.log10(self.error_bound)))
        return max(0, min(digits, self.ctx.digits))

    def agrees_with(self, other, slack=None) -> bool:
        """True when the two values coincide within their combined error bounds."""
        ctx = _ctx_of(self, other)
        with ctx.workprec():
            a, b = raw(self), raw(other)
            scale = max(abs(a), abs(b), mpmath.mpf(1))
            allowed = (_error_of(self) + _error_of(other)) * scale
            if slack is not None:
                allowed += slack * scale
            return abs(a - b) <= allowed


def _decimal_parts(x: mpmath.mpf, digits: int) -> dict:
    if x == 0:
        return {"sign": "+", "digits": "0", "exponent": 0}
    text = mpmath.nstr(abs(x), max(digits, 1), min_fixed=0, max_fixed=0)
    mantissa, _, exponent = text.partition("e")
    int_part, _, frac_part = mantissa.partition(".")
    all_digits = (int_part + frac_part).rstrip("0") or "0"
    return {
        "sign": "-" if x < 0 else "+",
        "digits": all_digits,
        "exponent": int(exponent or 0) - (len(all_digits) - 1),
    }


def _parse_decimal(parts: dict) -> mpmath.mpf:
    value = mpmath.mpf(int(parts["digits"])) * mpmath.mpf(10) ** int(parts["exponent"])
    return -value if parts["sign"] == "-" else value


@dataclass(frozen=True)
class RealAP(_APNumber):
    value: mpmath.mpf
    error_bound: mpmath.mpf
    ctx: PrecisionContext

    def __float__(self) -> float:
        return float(self.value)

    def nearest_integer(self) -> int:
        with self.ctx.workprec():
            return int(mpmath.nint(self.value))

    def to_json(self) -> dict:
        n = max(self.certified_digits, 1)
        with self.ctx.workprec():
            parts = _decimal_parts(self.value, n)
        parts["certified_digits"] = self.certified_digits
        return parts

    @classmethod
    def from_json(cls, data: dict, ctx: PrecisionContext) -> "RealAP":
        with ctx.workprec():
            value = _parse_decimal(data)
            error = mpmath.mpf(10) ** (-int(data["certified_digits"]))
        return cls(value=value, error_bound=error, ctx=ctx)


@dataclass(frozen=True)
class ComplexAP(_APNumber):
    value: mpmath.mpc
    error_bound: mpmath.mpf
    ctx: PrecisionContext

    @property
    def real(self) -> RealAP:
        return RealAP(value=self.value.real, error_bound=self._component_error(self.value.real), ctx=self.ctx)

    @property
    def imag(self) -> RealAP:
        return RealAP(value=self.value.imag, error_bound=self._component_error(self.value.imag), ctx=self.ctx)

    def _component_error(self, component) -> mpmath.mpf:
        with self.ctx.workprec():
            if component == 0:
                return mpmath.inf if self.error_bound else mpmath.mpf(0)
            return self.error_bound * abs(self.value) / abs(component)

    def conjugate(self) -> "ComplexAP":
        return ComplexAP(value=mpmath.conj(self.value), error_bound=self.error_bound, ctx=self.ctx)

    def to_json(self) -> dict:
        n = max(self.certified_digits, 1)
        with self.ctx.workprec():
            return {
                "re": _decimal_parts(self.value.real, n),
                "im": _decimal_parts(self.value.imag, n),
                "certified_digits": self.certified_digits,
            }


def is_real(x, ctx: PrecisionContext) -> bool:
    value = raw(x)
    if not isinstance(value, mpmath.mpc):
        return True
    with ctx.workprec():
        return abs(value.imag) <= ctx.real_tolerance * max(1, abs(value.real))


def real_part(x, ctx: PrecisionContext, what: str = "value") -> RealAP:
    """Return the real part, refusing if the imaginary residue is above noise level."""
    if not is_real(x, ctx):
        with ctx.workprec():
            residue = mpmath.nstr(abs(raw(x).imag), 5)
        raise PrecisionError(f"{what} is not real to working precision", imaginary_residue=residue, bits=ctx.bits)
    value = raw(x)
    with ctx.workprec():
        real = value.real if isinstance(value, mpmath.mpc) else value
    return RealAP(value=real, error_bound=max(_error_of(x), ctx.tolerance), ctx=ctx)


def with_escalation(fn: Callable[[PrecisionContext], T], ctx: PrecisionContext, attempts: int = 4) -> T:
    """Call ``fn(ctx)``, doubling the precision after every PrecisionError, at most ``attempts`` times."""
    current = ctx
    for attempt in range(attempts + 1):
        try:
            return fn(current)
        except PrecisionError as e:
            if attempt == attempts:
                logger.error("Precision escalation exhausted", bits=current.bits, reason=str(e))
                raise
            logger.warning("Escalating precision", from_bits=current.bits, to_bits=2 * current.bits, reason=str(e))
            current = current.doubled()
    raise AssertionError("unreachable")


def agm(a, b, ctx: PrecisionContext) -> RealAP:
    """Arithmetic-geometric mean of two positive reals."""
    with ctx.workprec():
        va, vb = raw(a), raw(b)
        if isinstance(va, mpmath.mpc) or isinstance(vb, mpmath.mpc):
            raise DomainError("AGM is defined here for real arguments only")
        if va <= 0 or vb <= 0:
            raise DomainError("AGM needs positive arguments", a=mpmath.nstr(va, 10), b=mpmath.nstr(vb, 10))
        value = mp.agm(va, vb)
    # homogeneous of degree one, so relative input errors pass through at most unchanged
    error = max(_error_of(a), _error_of(b)) + ctx.tolerance
    return RealAP(value=value, error_bound=error, ctx=ctx)


def _eta_argument(z, ctx: PrecisionContext, min_imag) -> mpmath.mpc:
    value = mpmath.mpc(raw(z))
    threshold = mp.sqrt(3) / 2 if min_imag is None else raw(min_imag)
    if value.imag < threshold - ctx.real_tolerance:
        raise DomainError(
            "eta argument below the reduced-form threshold; no modular transformation is applied",
            imag=mpmath.nstr(value.imag, 10),
            threshold=mpmath.nstr(threshold, 10),
        )
    return value


def eta(z, ctx: PrecisionContext, min_imag=None) -> ComplexAP:
    """Dedekind eta from its theta series  sum (-1)^n exp((6n+1)^2 pi i z / 12).

    Written as x * sum (-1)^n q^(n(3n+1)/2) with x = exp(pi i z/12), q = x^24; the pentagonal
    exponents are stepped incrementally. Summation stops at the first n where both the n and -n
    terms fall below 2^(-bits-guard_bits). ``min_imag`` relaxes the default threshold sqrt(3)/2 for
    callers that evaluate at half a reduced-form argument.
    """
    with ctx.workprec():
        zv = _eta_argument(z, ctx, min_imag)
        x = mp.expjpi(zv / 12)
        q = x**24
        q3 = q**3
        cutoff = ctx.truncation
        total = mpmath.mpc(1)
        term_minus, step_minus = q, q**4
        term_plus, step_plus = q**2, q**5
        sign = -1
        n = 1
        while True:
            total += sign * (term_minus + term_plus)
            if abs(term_minus) < cutoff and abs(term_plus) < cutoff:
                break
            term_minus *= step_minus
            step_minus *= q3
            term_plus *= step_plus
            step_plus *= q3
            sign = -sign
            n += 1
            if n > MAX_ETA_TERMS:
                raise PrecisionError("eta series did not converge", terms=n)
        value = x * total
        rounding = mpmath.ldexp(n * 8, -ctx.working_bits)
        error = 4 * cutoff / abs(total) + rounding
    logger.debug("Evaluated eta", terms=n, bits=ctx.bits)
    return ComplexAP(value=value, error_bound=error, ctx=ctx)


def eta_product(z, ctx: PrecisionContext, min_imag=None) -> ComplexAP:
    """Dedekind eta from its product form exp(pi i z/12) prod (1 - q^k), via mpmath's q-Pochhammer."""
    with ctx.workprec():
        zv = _eta_argument(z, ctx, min_imag)
        x = mp.expjpi(zv / 12)
        value = x * mp.qp(x**24)
    return ComplexAP(value=value, error_bound=ctx.tolerance, ctx=ctx)


def nthroot(x, n: int, ctx: PrecisionContext):
    """n-th root; real negative input with odd n gives the real root, complex input the principal one."""
    if n < 1:
        raise DomainError("root index must be positive", n=n)
    with ctx.workprec():
        value = raw(x)
        if isinstance(value, mpmath.mpc):
            result = mp.root(value, n)
        elif value < 0:
            if n % 2 == 0:
                raise DomainError("even root of a negative real", n=n)
            result = -mp.root(-value, n)
        else:
            result = mp.root(value, n)
    return wrap(result, ctx, _error_of(x) / n + ctx.tolerance)


def elementary(kind: str, *args, ctx: PrecisionContext):
    """Dispatch for exp, log, sqrt, nthroot, cos and pi at the context precision."""
    if kind == "pi":
        with ctx.workprec():
            return wrap(+mp.pi, ctx)
    if kind == "nthroot":
        x, n = args
        return nthroot(x, n, ctx)
    if len(args) != 1:
        raise DomainError(f"{kind} takes one argument", arguments=len(args))
    with ctx.workprec():
        value = raw(args[0])
        real_input = not isinstance(value, mpmath.mpc)
        if kind == "exp":
            result = mp.exp(value)
        elif kind == "log":
            if real_input and value <= 0:
                raise DomainError("log of a nonpositive real")
            if value == 0:
                raise DomainError("log of zero")
            result = mp.log(value)
        elif kind == "sqrt":
            if real_input and value < 0:
                raise DomainError("sqrt of a negative real")
            result = mp.sqrt(value)
        elif kind == "cos":
            result = mp.cos(value)
        else:
            raise DomainError(f"unknown elementary function {kind!r}")
    return wrap(result, ctx, _error_of(args[0]) + ctx.tolerance)


def cos_pi_over_7_radical(ctx: PrecisionContext) -> RealAP:
    """6cos(pi/7) = 1 + ((-7+7sqrt(-27))/2)^(1/3) + ((-7-7sqrt(-27))/2)^(1/3), principal cube roots."""
    with ctx.workprec():
        root = mp.sqrt(mpmath.mpc(-27))
        first = mp.cbrt((-7 + 7 * root) / 2)
        second = mp.cbrt((-7 - 7 * root) / 2)
        total = 1 + first + second
    return real_part(wrap(total, ctx), ctx, what="6cos(pi/7)")
