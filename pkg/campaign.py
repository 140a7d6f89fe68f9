"""Conjecture campaigns over ranges of N, fanned out to worker processes and resumable from a checkpoint.

Conjecture 1: for prime N = 3 mod 4, lambda is a unit (degree h, or 2h, or lambda^2 at degree h).
Conjecture 2: for squarefree N = 3 mod 8 coprime to 3, f and g both have minimal polynomials of
degree h once N > 1099; smaller N may have one of them in a sub-field.
"""

from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from structlog import get_logger
from sympy import isprime

import quadforms
from apnum import PrecisionContext
from datacollector import CampaignCollector
from errors import ClassInvError, DomainError, InconclusiveError, RefusalError
from invariants import OUTSIDE_CONJECTURE, fg_pair
from json_manager import add_or_update_field, load_checkpoint, write_json_atomic
from latrel import unit_test_lambda
from polybuild import f_minimal_polynomial, g_minimal_polynomial

logger = get_logger()

# desk-scale upper bounds for one campaign
CONJECTURE_LIMITS = {1: 500, 2: 4000}

# records with these statuses are recomputed when a campaign resumes
RETRY_STATUSES = {"error", "inconclusive"}


def conjecture1_targets(start: int, stop: int, composites: bool = False) -> list[int]:
    return [
        N
        for N in range(start, stop + 1)
        if N % 4 == 3 and (isprime(N) or (composites and quadforms.is_squarefree(N)))
    ]


def conjecture2_targets(start: int, stop: int) -> list[int]:
    return [
        N
        for N in range(start, stop + 1)
        if N % 8 == 3 and N % 3 != 0 and quadforms.is_squarefree(N) and N not in OUTSIDE_CONJECTURE
    ]


def conjecture1_record(N: int, digits: int) -> dict:
    ctx = PrecisionContext.from_digits(digits)
    record = {"N": N, "h": quadforms.enumerate(-N).h}
    try:
        report = unit_test_lambda(N, ctx)
    except InconclusiveError as e:
        return record | {"status": "inconclusive", "note": str(e)}
    status = "pass" if report.is_unit else "fail"
    return record | {
        "status": status,
        "degree_lambda": report.degree,
        "is_unit": report.is_unit,
        "used_square": report.used_square,
        "poly": [str(c) for c in report.L.coefficients],
    }


def conjecture2_record(N: int, digits: int) -> dict:
    ctx = PrecisionContext.from_digits(digits)
    h = quadforms.enumerate(-N).h
    record = {"N": N, "h": h}
    if h == 1:
        f, g = fg_pair(N, ctx).integer_pair()
        return record | {"status": "integer", "degree_f": 1, "degree_g": 1, "note": f"[{f},{g}]"}
    f_poly, _ = f_minimal_polynomial(N, ctx)
    g_poly, _ = g_minimal_polynomial(N, ctx)
    record |= {"degree_f": f_poly.degree, "degree_g": g_poly.degree}
    if f_poly.degree == h and g_poly.degree == h:
        return record | {"status": "pass"}
    if f_poly.degree < h and g_poly.degree < h:
        return record | {"status": "fail", "note": "neither f nor g generates the class field"}
    smaller = ("f", f_poly) if f_poly.degree < h else ("g", g_poly)
    return record | {"status": "exception", "note": f"{smaller[0]}: {smaller[1]}"}


def run_one(conjecture: int, N: int, digits: int) -> dict:
    """One campaign job; library errors become error records so the pool keeps going."""
    try:
        if conjecture == 1:
            return conjecture1_record(N, digits)
        return conjecture2_record(N, digits)
    except ClassInvError as e:
        logger.error("Campaign job failed", N=N, error=str(e))
        return {"N": N, "status": "error", "note": f"{type(e).__name__}: {e}"}


def campaign(
    conjecture: int,
    start: int,
    stop: int,
    checkpoint: Path,
    digits: int = 60,
    workers: int = 1,
    composites: bool = False,
    outdir: Path | None = None,
) -> dict:
    """Run (or resume) a campaign and return its summary; every finished N is checkpointed at once."""
    if conjecture not in CONJECTURE_LIMITS:
        raise DomainError("conjecture must be 1 or 2", conjecture=conjecture)
    if stop > CONJECTURE_LIMITS[conjecture]:
        raise RefusalError("range exceeds the desk-scale bound", stop=stop, limit=CONJECTURE_LIMITS[conjecture])
    if conjecture == 1:
        targets = conjecture1_targets(start, stop, composites)
    else:
        targets = conjecture2_targets(start, stop)
    checkpoint = Path(checkpoint)
    state = load_checkpoint(checkpoint, conjecture, start, stop)
    if not checkpoint.exists():
        write_json_atomic(checkpoint, state)

    collector = CampaignCollector(outdir or checkpoint.parent, conjecture)
    for record in state["records"].values():
        collector.collect(record)
    pending = [
        N for N in targets if str(N) not in state["records"] or state["records"][str(N)]["status"] in RETRY_STATUSES
    ]
    logger.info("Starting campaign", conjecture=conjecture, targets=len(targets), pending=len(pending), workers=workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one, conjecture, N, digits) for N in pending]
            for future in as_completed(futures):
                _finish(future.result(), checkpoint, collector)
    else:
        for N in pending:
            _finish(run_one(conjecture, N, digits), checkpoint, collector)

    collector.save()
    summary = collector.summary()
    logger.info("Campaign finished", **summary)
    return summary


def _finish(record: dict, checkpoint: Path, collector: CampaignCollector) -> None:
    add_or_update_field(checkpoint, "records", str(record["N"]), record, overwrite=True)
    collector.collect(record)
