import mpmath
import pytest
from mpmath import mp

import quadforms
from apnum import PrecisionContext
from errors import DomainError
from invariants import (
    OUTSIDE_CONJECTURE,
    SIGNATURES,
    alpha,
    broker_root,
    check_level48,
    constraint_zero,
    fg_pair,
    gamma2_from_fg,
    growth_deviation,
    growth_ratio,
    klein_j,
    signature,
    signature_scan,
    weber_r,
)
from json_manager import load_fixture


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(60)


def _klein_j_integer(N, ctx):
    with ctx.workprec():
        z = mpmath.mpc(mpmath.mpf(1) / 2, mp.sqrt(N) / 2)
    return klein_j(z, ctx).real.nearest_integer()


def test_level48_admissibility():
    check_level48(163)
    check_level48(3)
    check_level48(27)
    with pytest.raises(DomainError):
        check_level48(21)
    with pytest.raises(DomainError):
        check_level48(51)
    with pytest.raises(DomainError):
        check_level48(1331)


def test_exact_relations_at_163():
    assert constraint_zero(3, -2) == 0
    assert gamma2_from_fg(3, -2) == -640320
    assert gamma2_from_fg(3, -2) ** 3 == -262537412640768000


@pytest.mark.parametrize("N, pair", [(11, (1, -1)), (19, (0, 1)), (43, (1, 0)), (67, (1, 1)), (163, (3, -2))])
def test_class_number_one_pairs(N, pair, ctx):
    bundle = fg_pair(N, ctx)
    assert bundle.integer_pair() == pair
    assert constraint_zero(*pair) == 0


def test_fixture_pairs_agree(ctx):
    cases = load_fixture("integer_cases")["class_number_one"]
    for N, pair in cases.items():
        assert gamma2_from_fg(*pair) ** 3 == _klein_j_integer(int(N), ctx)


def test_pairs_outside_the_conjecture(ctx):
    cases = load_fixture("integer_cases")["outside_conjecture"]
    assert set(map(int, cases)) == OUTSIDE_CONJECTURE
    for N, values in cases.items():
        bundle = fg_pair(int(N), ctx)
        assert bundle.outside_conjecture
        f, g = bundle.integer_pair()
        assert values.get("f", f) == f
        assert values.get("g", g) == g


@pytest.mark.parametrize("N, values", [(83, {"f": 1}), (331, {"g": -1}), (907, {"g": -2})])
def test_subfield_integers(N, values, ctx):
    f, g = fg_pair(N, ctx).integer_pair()
    assert values.get("f", f) == f
    assert values.get("g", g) == g


def test_signature_table():
    primes = load_fixture("signature_primes")
    for key, Ns in primes.items():
        expected = [int(s) for s in key.split(",")]
        for N in Ns:
            assert signature(N).as_list() == expected
    assert len(SIGNATURES) == 8
    with pytest.raises(DomainError):
        signature(7)


def test_signature_scan_singles_out_the_tabulated_row(ctx):
    rows = signature_scan(163, ctx)
    assert len(rows) == 8
    integral = [row for row in rows if row["integral"]]
    assert len(integral) == 1
    assert integral[0]["tabulated"]
    assert integral[0]["signature"] == [-1, -1, -1]


def test_j_at_163(ctx):
    assert _klein_j_integer(163, ctx) == -262537412640768000
    bundle = fg_pair(163, ctx)
    assert bundle.j.nearest_integer() == -262537412640768000


def test_broker_root_principal_is_r(ctx):
    N = 163
    principal = quadforms.principal_form(-4 * N)
    root = broker_root(principal, N, ctx)
    r = weber_r(N, ctx)
    assert root.agrees_with(r, slack=mpmath.mpf(10) ** -40)
    with pytest.raises(DomainError):
        broker_root(quadforms.Form(1, 1, 41), N, ctx)


def test_weber_r_growth(ctx):
    assert abs(growth_ratio(163, ctx) - 1) < mpmath.mpf(10) ** -15
    assert weber_r(163, ctx).value > mp.root(2, 4)


def test_alpha_matches_cosine(ctx):
    value = alpha(163, ctx)
    assert value.k == 11
    assert value.radical == "-sqrt(1-beta_-)"
    with ctx.workprec():
        assert abs(value.value.value - mp.sqrt(2) * mp.cospi(mpmath.mpf(11) / 16)) < mpmath.mpf(10) ** -50


@pytest.mark.slow
def test_growth_deviation_is_small_for_large_N():
    ctx = PrecisionContext.from_digits(60)
    seen = set()
    for N in range(50003, 60000, 8):
        if N % 3 == 0 or not quadforms.is_squarefree(N) or N % 64 in seen:
            continue
        seen.add(N % 64)
        assert growth_deviation(N, ctx) < 0.1
    assert len(seen) == 8
