import pytest

import verification
from apnum import PrecisionContext
from errors import DomainError
from json_manager import load_fixture
from verification import (
    PAPER_N,
    check_class_number,
    check_content_denominator,
    check_gamma_reduction,
    check_growth,
    check_signature,
    check_singular_value,
    check_subfield,
    run_paper_suite,
)


@pytest.fixture
def ctx():
    return PrecisionContext.from_digits(60)


def test_generic_checks(ctx):
    assert check_class_number(1571).passed
    assert check_class_number(1571).detail["h"] == 17
    assert check_singular_value(163, ctx).passed
    assert check_gamma_reduction(59, ctx).passed


def test_suite_for_small_N(ctx):
    checks = run_paper_suite(83, ctx)
    assert [c.name for c in checks] == ["class_number", "k_N_relation", "K_N_gamma_reduction"]
    assert all(c.passed for c in checks)
    assert [c.name for c in run_paper_suite(23, ctx)] == ["class_number"]
    with pytest.raises(DomainError):
        run_paper_suite(0, ctx)


def test_suite_for_class_number_one(ctx):
    checks = run_paper_suite(163, ctx)
    assert [c.name for c in checks] == [
        "class_number",
        "k_N_relation",
        "K_N_gamma_reduction",
        "signature_integrality",
    ]
    assert all(c.passed for c in checks)
    assert check_signature(43, ctx).detail["integral"] == [[1, -1, 1]]


def test_growth_of_g(ctx):
    check = check_growth(50003, ctx)
    assert check.passed, check.detail


def test_content_denominator():
    check = check_content_denominator(load_fixture(f"paper_{PAPER_N}"))
    assert check.passed
    assert check.detail["digits"] == 25


@pytest.mark.parametrize("p", ["3", "5", "7"])
def test_subfields(p):
    subfield = load_fixture(f"paper_{PAPER_N}")["subfields"][p]
    checks = check_subfield(PAPER_N, p, subfield)
    assert len(checks) == 3
    assert all(c.passed for c in checks), [c.to_json() for c in checks]


def test_failed_step_becomes_a_failed_check(ctx, monkeypatch):
    def broken(N, ctx):
        raise DomainError("no", N=N)

    monkeypatch.setattr(verification, "check_singular_value", broken)
    checks = run_paper_suite(83, ctx)
    assert [c.name for c in checks] == ["class_number", "error", "K_N_gamma_reduction"]
    assert not checks[1].passed
    assert checks[1].detail["type"] == "DomainError"


@pytest.mark.slow
def test_paper_suite(ctx):
    checks = run_paper_suite(PAPER_N, ctx)
    assert all(c.passed for c in checks), [c.to_json() for c in checks if not c.passed]


@pytest.mark.slow
def test_paper_relations_at_1000_digits():
    ctx = PrecisionContext.from_digits(1000)
    singular = check_singular_value(PAPER_N, ctx)
    assert singular.passed, singular.detail
    reduction = check_gamma_reduction(PAPER_N, ctx)
    assert reduction.passed, reduction.detail
    assert reduction.detail["h"] == 105
