"""Command-line front end: ``classinv <command> [options]``.

Every command prints a result envelope (JSON by default, ``--text`` for key: value lines) that is
validated against ``schemas/envelope.schema.json``. Exit status: 0 on success, 1 domain error,
2 precision or inconclusive, 3 internal inconsistency or failed verification, 64 usage error.
"""

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import jsonschema
import structlog

import arg_parser
import quadforms
from apnum import PrecisionContext
from campaign import campaign
from chowla import chowla_result, elliptic_K, k_relation_residual, singular_k
from errors import AssumptionFailure, ClassInvError, DomainError, InternalInconsistencyError, UsageError
from exactpoly import ResolventData, cubic_radicals, derive_modular_relation, radical_description, radical_eval
from invariants import fg_pair
from json_manager import load_json, write_json_atomic
from latrel import unit_test_lambda
from polybuild import IntPoly, hilbert_poly, invariant_polys, poly_height, poly_index, weber_poly
from verification import run_paper_suite

structlog.configure(
    processors=[
        structlog.processors.TimeStamper(fmt="ISO", utc=True),
        structlog.processors.add_log_level,
        structlog.dev.ConsoleRenderer(colors=False),
    ],
    context_class=dict,
    logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
    wrapper_class=structlog.make_filtering_bound_logger(logging.INFO),
)

logger = structlog.get_logger()

TOOL = "classinv"
VERSION = "1.0.0"
SCHEMA_FILE = Path(__file__).resolve().parent / "schemas" / "envelope.schema.json"
CACHEABLE = {"classgroup", "invariant", "polys", "lambda", "kn", "KN", "modrel", "verify"}
# options that steer output and logging, not the computation
PRESENTATION_KEYS = {"text", "verbose", "quiet", "cache_dir", "no_cache", "out"}


def set_log_level(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    structlog.configure(wrapper_class=structlog.make_filtering_bound_logger(level))


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    return value


def _inputs(args) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in PRESENTATION_KEYS}


def command_classgroup(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    disc = -4 * args.N if args.disc4 else -args.N
    group = quadforms.enumerate(disc)
    outputs = group.to_json() | {"is_cyclic": group.is_cyclic}
    certificates = {}
    if not args.disc4 and args.N % 4 == 3 and args.N > 3 and quadforms.is_squarefree(args.N):
        certificates["kronecker_class_number"] = quadforms.class_number_by_kronecker(args.N)
    return outputs, certificates


def command_invariant(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    bundle = fg_pair(args.N, ctx)
    data = bundle.to_json()
    return data, {"residuals": data.pop("residuals"), "bits": bundle.f.ctx.bits}


def command_polys(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    if args.which in ("F", "G"):
        F, G = invariant_polys(args.N, ctx)
        poly = F if args.which == "F" else G
    elif args.which == "weber":
        poly = weber_poly(args.N, ctx)
    else:
        poly = hilbert_poly(args.N, ctx)
    height = poly_height(poly)
    outputs = {"which": args.which, "poly": poly.to_json(), "height": str(height.value), "height_digits": height.digits}
    if args.which in ("F", "G"):
        try:
            outputs["index"] = str(poly_index(poly, args.N))
        except AssumptionFailure as e:
            outputs["assumption_failures"] = [e.to_json()]
    certificates = {} if poly.certificate is None else {"rounding": poly.certificate.to_json()}
    return outputs, certificates


def command_lambda(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    report = unit_test_lambda(args.N, ctx)
    return report.to_json(), {"precision_bits": report.precision_bits}


def command_kn(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    k = singular_k(args.N, ctx)
    residual = k_relation_residual(k, args.N, ctx)
    return {"N": args.N, "k_N": k.to_json()}, {"agm_relation_residual": str(residual)}


def command_KN(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    if args.N <= 3:
        K = elliptic_K(args.N, ctx)
        return {"N": args.N, "K_N": K.to_json()}, {}
    result = chowla_result(args.N, ctx)
    data = result.to_json()
    return data, {"gamma_reduction_residual": data["eq_w_residual"]}


def command_modrel(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    phi = derive_modular_relation(cross_check=args.cross_check)
    outputs = {
        "degree_J": phi.degree("J"),
        "degree_g": phi.degree("g"),
        "terms": len(phi.terms),
        "phi": phi.to_json(),
    }
    return outputs, {"vanishes_at_class_number_one_points": True, "sylvester_cross_check": args.cross_check}


def command_radical(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    fixture = load_json(args.fixture)
    q = IntPoly.from_descending([int(c) for c in fixture["poly"]])
    if fixture.get("kind") == "cubic":
        radical = cubic_radicals(q, ctx)
        return radical.to_json() | {"poly": q.to_json()}, {}
    if fixture.get("kind") != "resolvent":
        raise DomainError("radical fixture kind must be cubic or resolvent", kind=fixture.get("kind"))
    data = ResolventData.from_json(fixture["resolvent"])
    value = radical_eval(data, q, ctx)
    outputs = {
        "poly": q.to_json(),
        "resolvent": data.to_json(),
        "description": radical_description(data, q, fixture.get("variable", "x")),
        "value": value.to_json(),
    }
    return outputs, {"residual_below": str(ctx.tolerance)}


def command_verify(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    checks = run_paper_suite(args.N, ctx)
    outputs = {
        "N": args.N,
        "suite": args.suite,
        "checks": [c.to_json() for c in checks],
        "all_passed": all(c.passed for c in checks),
    }
    return outputs, {"passed": sum(c.passed for c in checks), "total": len(checks)}


def command_campaign(args, ctx: PrecisionContext) -> tuple[dict, dict]:
    summary = campaign(
        conjecture=args.conjecture,
        start=args.start,
        stop=args.stop,
        checkpoint=args.checkpoint,
        digits=args.prec,
        workers=args.workers,
        composites=args.composites,
        outdir=args.outdir,
    )
    return summary, {"checkpoint": str(args.checkpoint)}


HANDLERS = {
    "classgroup": command_classgroup,
    "invariant": command_invariant,
    "polys": command_polys,
    "lambda": command_lambda,
    "kn": command_kn,
    "KN": command_KN,
    "modrel": command_modrel,
    "radical": command_radical,
    "verify": command_verify,
    "campaign": command_campaign,
}


def build_envelope(command: str, inputs: dict, outputs: dict, certificates: dict, seconds: float, status: str) -> dict:
    assumption_failures = outputs.pop("assumption_failures", []) if isinstance(outputs, dict) else []
    return {
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "status": status,
        "inputs": inputs,
        "outputs": outputs,
        "certificates": certificates,
        "assumption_failures": assumption_failures,
        "timings": {"seconds": round(seconds, 6)},
    }


def validate_envelope(envelope: dict) -> None:
    schema = json.loads(SCHEMA_FILE.read_text())
    jsonschema.validate(instance=envelope, schema=schema)


def cache_key(command: str, inputs: dict) -> str:
    payload = json.dumps({"command": command, "inputs": inputs, "version": VERSION}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _cache_file(job: arg_parser.JobSpec, inputs: dict) -> Path | None:
    if job.cache_dir is None or job.command not in CACHEABLE:
        return None
    return Path(job.cache_dir) / f"{cache_key(job.command, inputs)}.json"


def execute(command: str, args) -> dict:
    """Run one command on parsed (or ``update_arguments``-merged) arguments and return its envelope."""
    job = arg_parser.JobSpec.from_arguments(command, args)
    inputs = _inputs(args)
    cache_file = _cache_file(job, inputs)
    if cache_file is not None and cache_file.exists():
        logger.info("Cache hit", command=command, path=str(cache_file))
        return load_json(cache_file)

    ctx = PrecisionContext.from_digits(job.precision)
    started = time.perf_counter()
    outputs, certificates = HANDLERS[command](args, ctx)
    status = "ok"
    if command == "verify" and not outputs["all_passed"]:
        status = "failed"
    elif outputs.get("assumption_failures"):
        status = "assumption_failure"
    envelope = build_envelope(command, inputs, outputs, certificates, time.perf_counter() - started, status)
    validate_envelope(envelope)
    if cache_file is not None and status == "ok":
        write_json_atomic(cache_file, envelope)
    return envelope


def run_command(command: str, **overrides) -> dict:
    """Programmatic entry: the command's defaults updated with ``overrides``."""
    args = arg_parser.update_arguments(argparse.Namespace(**overrides), command)
    return execute(command, args)


def _render_text(envelope: dict) -> str:
    lines = [f"status: {envelope['status']}"]
    for section in ("outputs", "certificates"):
        for key, value in envelope.get(section, {}).items():
            text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
            lines.append(f"{key}: {text}")
    return "\n".join(lines)


def _emit(envelope: dict, text: bool, out: Path | None) -> None:
    if out is not None:
        write_json_atomic(out, envelope)
    print(_render_text(envelope) if text else json.dumps(envelope, indent=2, sort_keys=True))


def run(argv: list[str]) -> int:
    """Parse argv, run the command and return the exit status."""
    if not argv or argv[0] not in arg_parser.COMMANDS:
        usage = f"usage: {TOOL} {{{','.join(arg_parser.COMMANDS)}}} [options]"
        print(usage, file=sys.stderr)
        return UsageError.exit_code
    command = argv[0]
    try:
        args = getattr(arg_parser, f"parse_arguments_{command}")(argv[1:])
        arg_parser.JobSpec.from_arguments(command, args)
    except UsageError as e:
        print(f"{TOOL} {command}: error: {e}", file=sys.stderr)
        if "usage" in e.context:
            print(e.context["usage"], file=sys.stderr)
        return e.exit_code
    set_log_level(args.verbose, args.quiet)

    try:
        envelope = execute(command, args)
    except ClassInvError as e:
        logger.error("Command failed", command=command, error=str(e), context=e.context)
        status = "assumption_failure" if isinstance(e, AssumptionFailure) else "error"
        envelope = build_envelope(command, _inputs(args), {}, {}, 0.0, status)
        envelope["error"] = e.to_json()
        _emit(envelope, args.text, args.out)
        return e.exit_code
    except Exception as e:
        logger.exception("Command failed unexpectedly", command=command, error=repr(e))
        envelope = build_envelope(command, _inputs(args), {}, {}, 0.0, "error")
        envelope["error"] = {"type": type(e).__name__, "message": str(e), "context": {}}
        _emit(envelope, args.text, args.out)
        return InternalInconsistencyError.exit_code
    _emit(envelope, args.text, args.out)
    return 3 if envelope["status"] == "failed" else 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
