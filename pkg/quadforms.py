"""Binary quadratic forms of negative discriminant and their class groups."""

import math
from dataclasses import dataclass, field

import gmpy2
from structlog import get_logger
from sympy import divisors, factorint

from errors import DomainError, InternalInconsistencyError

logger = get_logger()


def is_squarefree(n: int) -> bool:
    return n > 0 and all(e == 1 for e in factorint(n).values())


def solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    """Solve a*x = b (mod m); returns (u, v) such that every solution is u + v*n."""
    g, d, _ = gmpy2.gcdext(a, m)
    if b % g:
        raise InternalInconsistencyError("linear congruence has no solution", a=a, b=b, m=m)
    v = m // g
    return int((b // g) * d % v), int(v)


@dataclass(frozen=True, order=True)
class Form:
    """The form a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise DomainError("form must be positive definite", a=self.a, b=self.b, c=self.c)
        if self.discriminant >= 0:
            raise DomainError("discriminant must be negative", discriminant=self.discriminant)

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def is_primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    @property
    def is_reduced(self) -> bool:
        if not abs(self.b) <= self.a <= self.c:
            return False
        if abs(self.b) == self.a or self.a == self.c:
            return self.b >= 0
        return True

    def normalized(self) -> "Form":
        a, b, c = self.a, self.b, self.c
        r = (a - b) // (2 * a)
        return Form(a, b + 2 * r * a, a * r * r + b * r + c)

    def inverse(self) -> "Form":
        return reduce(Form(self.a, -self.b, self.c))

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "c": str(self.c)}

    @classmethod
    def from_json(cls, data: dict) -> "Form":
        return cls(int(data["a"]), int(data["b"]), int(data["c"]))

    def __str__(self) -> str:
        return f"[{self.a},{self.b},{self.c}]"


def principal_form(disc: int) -> Form:
    k = disc % 2
    return Form(1, k, (k - disc) // 4)


def reduce(f: Form) -> Form:
    """Unique reduced representative: |b| <= a <= c, and b >= 0 if |b| = a or a = c."""
    if not f.is_primitive:
        raise DomainError("form is not primitive", form=str(f))
    f = f.normalized()
    a, b, c = f.a, f.b, f.c
    while a > c or (a == c and b < 0):
        s = (c + b) // (2 * c)
        a, b, c = c, -b + 2 * s * c, c * s * s - b * s + a
    return Form(a, b, c).normalized()


def compose(f1: Form, f2: Form) -> Form:
    """Gauss composition of two classes, returned reduced."""
    if f1.discriminant != f2.discriminant:
        raise DomainError(
            "forms have different discriminants", first=f1.discriminant, second=f2.discriminant
        )
    a1, b1, c1 = f1.a, f1.b, f1.c
    a2, b2 = f2.a, f2.b
    g = (b1 + b2) // 2
    h = (b2 - b1) // 2
    w = math.gcd(a1, a2, g)
    s, t, u = a1 // w, a2 // w, g // w
    mu, nu = solve_linmod(t * u, h * u + s * c1, s * t)
    lam, _ = solve_linmod(t * nu, h - t * mu, s)
    k = mu + nu * lam
    l = (k * t - h) // s
    m = (t * u * k - h * u - s * c1) // (s * t)
    return reduce(Form(s * t, w * u - (k * t + l * s), k * l - w * m))


def power(f: Form, n: int) -> Form:
    if n < 0:
        return power(f.inverse(), -n)
    result = principal_form(f.discriminant)
    base = reduce(f)
    while n > 0:
        if n & 1:
            result = compose(result, base)
        base = compose(base, base)
        n >>= 1
    return result


def element_order(f: Form, h: int) -> int:
    """Order of the class of f in a group of order h."""
    identity = principal_form(f.discriminant)
    for d in divisors(h):
        if power(f, d) == identity:
            return d
    raise InternalInconsistencyError("element order does not divide the class number", form=str(f), h=h)


def _check_discriminant(disc: int) -> None:
    if disc >= 0 or disc % 4 not in (0, 1):
        raise DomainError("discriminant must be negative and congruent to 0 or 1 mod 4", discriminant=disc)


def reduced_forms(disc: int) -> list[Form]:
    """All reduced primitive forms of the discriminant, sorted by (a, b)."""
    _check_discriminant(disc)
    forms = []
    a_max = math.isqrt(-disc // 3)
    for a in range(1, a_max + 1):
        for b in range(-a + 1 if (1 - a - disc) % 2 == 0 else -a + 2, a + 1, 2):
            num = b * b - disc
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(a, b, c) == 1:
                forms.append(Form(a, b, c))
    return sorted(forms)


@dataclass(frozen=True)
class ClassGroup:
    """Reduced classes of one discriminant with generators realizing the group as cyclic factors.

    For a cyclic group the single generator carries its element order. Otherwise each generator
    carries its order relative to the subgroup spanned by the previous ones; these orders multiply
    to h either way.
    """

    discriminant: int
    classes: tuple[Form, ...]
    generators: tuple[tuple[Form, int], ...] = field(default=())

    @property
    def h(self) -> int:
        return len(self.classes)

    @property
    def is_cyclic(self) -> bool:
        return len(self.generators) <= 1

    @property
    def identity(self) -> Form:
        return principal_form(self.discriminant)

    def cyclic_labelling(self) -> list[Form]:
        """gamma^0, gamma^1, ..., gamma^(h-1) for the cyclic generator gamma."""
        if not self.is_cyclic:
            raise DomainError("class group is not cyclic", discriminant=self.discriminant)
        if not self.generators:
            return [self.identity]
        gamma = self.generators[0][0]
        labels = [self.identity]
        for _ in range(self.h - 1):
            labels.append(compose(labels[-1], gamma))
        return labels

    def to_json(self) -> dict:
        return {
            "discriminant": str(self.discriminant),
            "h": self.h,
            "classes": [f.to_json() for f in self.classes],
            "generators": [{"form": f.to_json(), "order": order} for f, order in self.generators],
        }


def _span(subgroup: set[Form], f: Form) -> tuple[set[Form], int]:
    """Extend subgroup by f; returns the new subgroup and the order of f modulo the old one."""
    layers = [subgroup]
    current = f
    while current not in subgroup:
        layers.append({compose(x, current) for x in subgroup})
        current = compose(current, f)
    return set().union(*layers), len(layers)


def _find_generators(disc: int, classes: list[Form]) -> tuple[tuple[Form, int], ...]:
    h = len(classes)
    if h == 1:
        return ()
    for f in classes[1:]:
        if element_order(f, h) == h:
            return ((f, h),)
    logger.info("Class group is not cyclic, accumulating generators", discriminant=disc, h=h)
    subgroup = {principal_form(disc)}
    generators = []
    for f in classes:
        if f in subgroup:
            continue
        subgroup, relative_order = _span(subgroup, f)
        generators.append((f, relative_order))
        if len(subgroup) == h:
            break
    if math.prod(order for _, order in generators) != h:
        raise InternalInconsistencyError("generator orders do not multiply to the class number", discriminant=disc)
    return tuple(generators)


def enumerate(disc: int) -> ClassGroup:
    """Class group of the discriminant, with its classes sorted by (a, b)."""
    classes = reduced_forms(disc)
    generators = _find_generators(disc, classes)
    logger.debug("Enumerated class group", discriminant=disc, h=len(classes), generators=len(generators))
    return ClassGroup(discriminant=disc, classes=tuple(classes), generators=generators)


def kronecker(D: int, k: int) -> int:
    return int(gmpy2.kronecker(D, k))


def class_number_by_kronecker(N: int) -> int:
    """h(-N) from the half-range sum of (-N/k), for squarefree N = 3 mod 4 with N > 3."""
    if N % 4 != 3 or not is_squarefree(N):
        raise DomainError("N must be squarefree and congruent to 3 mod 4", N=N)
    if N == 3:
        raise DomainError("the half-range sum formula needs N > 3", N=N)
    total = sum(kronecker(-N, k) for k in range(1, (N - 1) // 2 + 1))
    divisor = 3 if N % 8 == 3 else 1
    if total % divisor:
        raise InternalInconsistencyError("Kronecker sum is not divisible", N=N, total=total, divisor=divisor)
    return total // divisor
