"""entlab command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""

import argparse
import sys
import time
import uuid
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from entlab import __version__
from entlab.cli import commands
from entlab.cli.schemas import RunConfig
from entlab.config import settings
from entlab.core.constants import (
    EXIT_IO_ERROR,
    EXIT_VALIDATION_ERROR,
    GRAY_MSE_TARGET,
    CipherMode,
    PairClass,
)
from entlab.core.errors import InputValidationError
from entlab.core.services.logging_config import (
    log_run_complete,
    log_run_error,
    log_run_started,
    setup_logging,
)


Handler = Callable[[argparse.Namespace], int]

_PATH_FLAGS = (
    "input",
    "pair",
    "key",
    "cipher",
    "image",
    "reference",
    "key_out",
    "codewords_out",
    "trajectory_out",
    "summary_out",
    "cipher_out",
    "image_out",
    "metrics_out",
    "sweep_out",
    "sweep_json",
    "out",
)


def _seed(text: str) -> int:
    """Seeds accept decimal or 0x-prefixed hex."""
    return int(text, 0)


def _add_encoding_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--n", type=int, default=settings.default_n, help="codeword length"
    )
    parser.add_argument(
        "--k", type=int, default=settings.default_k, help="reduced dimension"
    )
    parser.add_argument(
        "--t", type=int, default=settings.default_t, help="encoding iterations"
    )
    parser.add_argument(
        "--seed", type=_seed, default=settings.default_seed, help="master seed"
    )


def _add_pair_source(
    parser: argparse.ArgumentParser, dim_default: Optional[int]
) -> None:
    parser.add_argument(
        "--pair", help="CSV with the sender (row 0) and receiver (row 1) vectors"
    )
    parser.add_argument(
        "--dim",
        type=int,
        default=dim_default,
        help="dimension of the synthetic pair used without --pair",
    )
    parser.add_argument(
        "--pair-class",
        choices=[c.value for c in PairClass],
        default=PairClass.INTER.value,
        help="class of the synthetic pair",
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with every subcommand."""
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="entlab",
        description="Computational entanglement experiments: iterative LSH "
        "encoding, trajectory statistics, reconciliation codecs and relativity "
        "checks.",
        formatter_class=fmt,
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--log-level",
        default=settings.log_level.upper(),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="log level for messages on standard error",
    )
    parser.add_argument(
        "--log-format",
        default=settings.log_format,
        choices=["text", "json"],
        help="log record format",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # encode
    p = sub.add_parser(
        "encode", help="encode a vector into codewords and a key", formatter_class=fmt
    )
    p.add_argument("--input", help="CSV of feature vectors")
    p.add_argument("--row", type=int, default=0, help="row of --input to encode")
    p.add_argument("--random", action="store_true", help="use a seeded random vector")
    p.add_argument("--dim", type=int, default=512, help="--random vector dimension")
    _add_encoding_flags(p)
    p.add_argument("--key-out", required=True, help="key file to write")
    p.add_argument("--codewords-out", required=True, help="codeword CSV to write")
    p.set_defaults(handler=commands.cmd_encode)

    # project
    p = sub.add_parser(
        "project", help="project a vector through a stored key", formatter_class=fmt
    )
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--input", help="CSV of feature vectors")
    p.add_argument("--row", type=int, default=0, help="row of --input to project")
    p.add_argument(
        "--random",
        action="store_true",
        help="use the seeded random vector of dimension ell",
    )
    p.add_argument(
        "--seed", type=_seed, default=None, help="seed for --random (default: key's)"
    )
    p.add_argument("--negate", action="store_true", help="flip every output sign")
    p.add_argument("--codewords-out", required=True, help="codeword CSV to write")
    p.set_defaults(handler=commands.cmd_project)

    # cohort
    p = sub.add_parser("cohort", help="run a synthetic pair cohort", formatter_class=fmt)
    p.add_argument("--pairs", type=int, default=100, help="number of pairs")
    p.add_argument("--ell", type=int, default=512, help="feature dimension")
    _add_encoding_flags(p)
    p.add_argument(
        "--inter-fraction",
        type=float,
        default=1.0,
        help="fraction of inter-class pairs, the rest are intra-class",
    )
    p.add_argument(
        "--epsilon",
        type=float,
        default=settings.default_epsilon,
        help="convergence threshold",
    )
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: ENTLAB_THREADS or all cores)",
    )
    p.add_argument("--trajectory-out", required=True, help="trajectory CSV to write")
    p.add_argument("--summary-out", required=True, help="summary JSON to write")
    p.set_defaults(handler=commands.cmd_cohort)

    # export3d
    p = sub.add_parser(
        "export3d", help="export k=3 trajectories of one pair", formatter_class=fmt
    )
    _add_pair_source(p, dim_default=512)
    p.add_argument("--n", type=int, default=500, help="codeword length")
    p.add_argument("--t", type=int, default=200, help="encoding iterations")
    p.add_argument(
        "--seed", type=_seed, default=settings.default_seed, help="master seed"
    )
    p.add_argument("--out", required=True, help="3-D CSV to write")
    p.set_defaults(handler=commands.cmd_export3d, k=3)

    # reconcile
    p = sub.add_parser(
        "reconcile", help="encode or decode an image message", formatter_class=fmt
    )
    p.add_argument(
        "action",
        choices=["encode", "decode", "sweep"],
        help="sender, receiver, or gray noise-scale sweep on one pair",
    )
    p.add_argument(
        "--mode",
        choices=[m.value for m in CipherMode],
        default=CipherMode.BIT.value,
        help="bit codec (PBM) or gray codec (PGM)",
    )
    _add_pair_source(p, dim_default=None)
    p.add_argument("--image", help="message image to encode")
    p.add_argument(
        "--n", type=int, default=None, help="codeword length (default: k + margin)"
    )
    p.add_argument(
        "--t", type=int, default=None, help="fixed iterations (default: adaptive)"
    )
    p.add_argument(
        "--t-max",
        type=int,
        default=settings.reconcile_t_max,
        help="upper bound for adaptive t",
    )
    p.add_argument(
        "--seed", type=_seed, default=settings.default_seed, help="master seed"
    )
    p.add_argument(
        "--alpha", type=float, default=settings.default_alpha, help="gray noise scale"
    )
    p.add_argument(
        "--pilot-len", type=int, default=settings.pilot_len, help="zero pilot bits"
    )
    p.add_argument("--key-out", help="key file to write (encode)")
    p.add_argument("--cipher-out", help="cipher JSON to write (encode)")
    p.add_argument("--key", help="key file (decode)")
    p.add_argument("--cipher", help="cipher JSON (decode)")
    p.add_argument("--reference", help="original image for BER/MSE (decode)")
    p.add_argument("--image-out", help="recovered image to write (decode)")
    p.add_argument("--metrics-out", help="metrics JSON to write (decode)")
    p.add_argument("--plain", action="store_true", help="write plain P1/P2 images")
    p.add_argument(
        "--adversary",
        action="store_true",
        help="also decode with fresh randomness instead of the key (bit mode)",
    )
    p.add_argument(
        "--adversary-seed", type=_seed, default=1, help="seed of the keyless decode"
    )
    p.add_argument(
        "--alphas",
        default="0.25,0.5,1,2,4",
        help="comma-separated noise scales (sweep)",
    )
    p.add_argument(
        "--mse-target",
        type=float,
        default=GRAY_MSE_TARGET,
        help="decode error each alpha must reach (sweep)",
    )
    p.add_argument("--sweep-out", help="alpha, t_used, mse CSV to write (sweep)")
    p.add_argument("--sweep-json", help="sweep report JSON to write (sweep)")
    p.set_defaults(handler=commands.cmd_reconcile)

    # relativity
    p = sub.add_parser(
        "relativity", help="Lorentz boost and interval checks", formatter_class=fmt
    )
    p.add_argument("--v", type=float, default=0.6, help="boost speed")
    p.add_argument("--slimit", type=float, default=1.0, help="invariant speed")
    p.add_argument("--event", default="1,0.5,0", help="event coordinates s,x[,y]")
    p.add_argument("--ds", type=float, default=1.0, help="proper time to dilate")
    p.add_argument("--dx", type=float, default=1.0, help="proper length to contract")
    p.set_defaults(handler=commands.cmd_relativity)

    # stats
    p = sub.add_parser(
        "stats", help="binomial likelihood quantities", formatter_class=fmt
    )
    p.add_argument("--n", type=int, required=True, help="trials")
    p.add_argument("--k", type=int, required=True, help="successes")
    p.add_argument(
        "--theta", type=float, default=None, help="success probability (default: k/n)"
    )
    p.add_argument(
        "--theta0", type=float, default=None, help="true probability for the NLL check"
    )
    p.add_argument(
        "--samples", type=int, default=10000, help="samples for the NLL check"
    )
    p.add_argument(
        "--seed", type=_seed, default=settings.default_seed, help="sampling seed"
    )
    p.set_defaults(handler=commands.cmd_stats)

    return parser


def _required_paths(args: argparse.Namespace) -> List[str]:
    if args.command != "reconcile":
        return []
    if args.action == "encode":
        return ["image", "key_out", "cipher_out"]
    if args.action == "sweep":
        return ["image", "sweep_out"]
    return ["key", "cipher", "image_out", "metrics_out"]


def run_config(args: argparse.Namespace) -> RunConfig:
    """Validate the numeric parameters and paths shared by the subcommands."""
    missing = [name for name in _required_paths(args) if not getattr(args, name, None)]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise InputValidationError(f"{args.command} {args.action} needs {flags}")
    paths: Dict[str, str] = {
        name: str(getattr(args, name))
        for name in _PATH_FLAGS
        if getattr(args, name, None) is not None
    }
    return RunConfig(
        command=args.command,
        n=getattr(args, "n", None),
        k=getattr(args, "k", None),
        t=getattr(args, "t", None),
        seed=getattr(args, "seed", None),
        alpha=getattr(args, "alpha", None),
        epsilon=getattr(args, "epsilon", None),
        threads=getattr(args, "threads", None),
        paths=paths,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map failures to exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_format)

    run_id = uuid.uuid4().hex[:12]
    handler: Handler = args.handler
    started = time.perf_counter()
    try:
        config = run_config(args)
        params = config.model_dump(exclude={"command", "paths"}, exclude_none=True)
        log_run_started(run_id, args.command, **params)
        code = handler(args)
    except (InputValidationError, ValidationError) as e:
        log_run_error(run_id, args.command, e)
        return EXIT_VALIDATION_ERROR
    except OSError as e:
        log_run_error(run_id, args.command, e)
        return EXIT_IO_ERROR
    log_run_complete(run_id, args.command, int((time.perf_counter() - started) * 1000))
    return code


if __name__ == "__main__":
    sys.exit(main())
