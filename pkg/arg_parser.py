import argparse
import os
from dataclasses import dataclass
from pathlib import Path

from structlog import get_logger

from errors import UsageError

logger = get_logger()

COMMANDS = ("classgroup", "invariant", "polys", "lambda", "kn", "KN", "modrel", "radical", "verify", "campaign")
MIN_DIGITS = 38
DEFAULT_DIGITS = 60
CACHE_ENV = "CLASSINV_CACHE_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, usage=self.format_usage().strip())


def default_cache_dir() -> Path:
    override = os.environ.get(CACHE_ENV)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "classinv"


@dataclass(frozen=True)
class JobSpec:
    """A validated job: the command, its N or N-range, precision in decimal digits and output locations."""

    command: str
    N: int | None = None
    N_range: tuple[int, int] | None = None
    precision: int = DEFAULT_DIGITS
    output: Path | None = None
    cache_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.precision < MIN_DIGITS:
            raise UsageError("precision must be at least 38 decimal digits", precision=self.precision)
        if self.N is not None and self.N <= 0:
            raise UsageError("N must be positive", N=self.N)
        if self.N_range is not None and not 0 < self.N_range[0] <= self.N_range[1]:
            raise UsageError("N range must be increasing and positive", N_range=self.N_range)

    @classmethod
    def from_arguments(cls, command: str, args: argparse.Namespace) -> "JobSpec":
        start, stop = getattr(args, "start", None), getattr(args, "stop", None)
        return cls(
            command=command,
            N=getattr(args, "N", None),
            N_range=None if start is None else (start, stop),
            precision=args.prec,
            output=getattr(args, "out", None),
            cache_dir=None if args.no_cache else args.cache_dir,
        )


def _parser(command: str, description: str) -> _Parser:
    parser = _Parser(prog=f"classinv {command}", description=description)
    parser.add_argument(
        "--prec",
        default=DEFAULT_DIGITS,
        type=int,
        help="Working precision in decimal digits (at least 38).",
    )
    output = parser.add_mutually_exclusive_group()
    output.add_argument(
        "--json", dest="text", action="store_false", help="Print the result envelope as JSON (default)."
    )
    output.add_argument("--text", dest="text", action="store_true", help="Print the outputs as key: value lines.")
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    noise.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    parser.add_argument(
        "--cache_dir",
        "--cache-dir",
        default=default_cache_dir(),
        type=Path,
        help=f"Result cache directory; defaults to ${CACHE_ENV} or ~/.cache/classinv.",
    )
    parser.add_argument("--no_cache", "--no-cache", action="store_true", help="Neither read nor write the cache.")
    parser.add_argument("-o", "--out", type=Path, help="Also write the envelope to this file.")
    parser.set_defaults(text=False)
    return parser


def _add_N(parser: _Parser) -> None:
    parser.add_argument("-N", dest="N", required=True, type=int, help="The positive integer N of Q(sqrt(-N)).")


def parse_arguments_classgroup(args=None):
    parser = _parser("classgroup", "Reduced forms, class number and generators of discriminant -N.")
    _add_N(parser)
    parser.add_argument("--disc4", action="store_true", help="Use discriminant -4N instead of -N.")
    return parser.parse_args(args)


def parse_arguments_invariant(args=None):
    parser = _parser("invariant", "The pair [f, g], r, gamma_2 and j for N = 3 mod 8.")
    _add_N(parser)
    return parser.parse_args(args)


def parse_arguments_polys(args=None):
    parser = _parser("polys", "Class polynomials with integer coefficients.")
    _add_N(parser)
    parser.add_argument(
        "--which",
        default="G",
        choices=("G", "F", "weber", "hilbert"),
        help="G and F have the g and f values as roots; weber has the Broker roots; hilbert the j values.",
    )
    return parser.parse_args(args)


def parse_arguments_lambda(args=None):
    parser = _parser("lambda", "Recognize the Chowla-Selberg quotient lambda and test whether it is a unit.")
    _add_N(parser)
    return parser.parse_args(args)


def parse_arguments_kn(args=None):
    parser = _parser("kn", "The singular value k_N and its AGM relation residual.")
    _add_N(parser)
    return parser.parse_args(args)


def parse_arguments_KN(args=None):
    parser = _parser("KN", "The complete elliptic integral K_N and its Gamma-value reduction.")
    _add_N(parser)
    return parser.parse_args(args)


def parse_arguments_modrel(args=None):
    parser = _parser("modrel", "Derive the polynomial Phi(J, g) relating g to the j-invariant.")
    parser.add_argument(
        "--cross_check",
        "--cross-check",
        action="store_true",
        help="Recompute the first resultant as a Sylvester determinant.",
    )
    return parser.parse_args(args)


def parse_arguments_radical(args=None):
    parser = _parser("radical", "Evaluate a real root from cubic or resolvent radical data.")
    parser.add_argument("--fixture", required=True, type=Path, help="JSON file with a polynomial and radical data.")
    return parser.parse_args(args)


def parse_arguments_verify(args=None):
    parser = _parser("verify", "Run the verification checks for N.")
    _add_N(parser)
    parser.add_argument("--suite", default="paper", choices=("paper",), help="The check suite to run.")
    return parser.parse_args(args)


def parse_arguments_campaign(args=None):
    parser = _parser("campaign", "Check one of the conjectures over a range of N, resumably.")
    parser.add_argument(
        "--conjecture", required=True, type=int, choices=(1, 2), help="1: lambda is a unit; 2: degrees of f and g."
    )
    parser.add_argument("--from", dest="start", required=True, type=int, help="First N of the range.")
    parser.add_argument("--to", dest="stop", required=True, type=int, help="Last N of the range (inclusive).")
    parser.add_argument("--checkpoint", required=True, type=Path, help="Checkpoint file for resuming.")
    parser.add_argument("--workers", default=1, type=int, help="Number of worker processes.")
    parser.add_argument(
        "--composites",
        action="store_true",
        help="Conjecture 1 only: include squarefree composite N = 3 mod 4.",
    )
    parser.add_argument(
        "--outdir",
        type=Path,
        help="Directory for the CSV and figure; defaults to the checkpoint directory.",
    )
    return parser.parse_args(args)


# required options per command, by destination, with stand-ins so that the defaults can be parsed
REQUIRED_OPTIONS = {
    "classgroup": {"N": ["-N", "1"]},
    "invariant": {"N": ["-N", "1"]},
    "polys": {"N": ["-N", "1"]},
    "lambda": {"N": ["-N", "1"]},
    "kn": {"N": ["-N", "1"]},
    "KN": {"N": ["-N", "1"]},
    "modrel": {},
    "radical": {"fixture": ["--fixture", "-"]},
    "verify": {"N": ["-N", "1"]},
    "campaign": {
        "conjecture": ["--conjecture", "1"],
        "start": ["--from", "1"],
        "stop": ["--to", "1"],
        "checkpoint": ["--checkpoint", "-"],
    },
}


def update_arguments(args: argparse.Namespace, command: str) -> argparse.Namespace:
    """Merge the non-None entries of ``args`` into the defaults of ``command``."""
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    required = REQUIRED_OPTIONS[command]
    missing = sorted(dest for dest in required if getattr(args, dest, None) is None)
    if missing:
        raise UsageError(f"{command}: missing required options", missing=", ".join(missing))
    parser = globals()[f"parse_arguments_{command}"]
    default_args = vars(parser([token for option in required.values() for token in option]))
    for key, value in vars(args).items():
        if value is not None:
            default_args[key] = value
    return argparse.Namespace(**default_args)
