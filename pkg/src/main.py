"""Command-line entry point for the dCSR codec and benchmark tool."""
import argparse
import logging
import sys
from typing import List, Optional

from config import (
    DEFAULT_GROUP_SIZE, DEFAULT_INPUT_ZERO_POINT, DEFAULT_MULTIPLIER, DEFAULT_OUTPUT_ZERO_POINT,
    DEFAULT_PIXELS, DEFAULT_REPEAT, DEFAULT_RI_BITS, DEFAULT_SHIFT, DEFAULT_SWEEP,
    EXIT_ORACLE_MISMATCH, EXIT_USAGE, FORMATS, KERNELS, LOG_FORMAT, LOG_LEVEL, REPORT_FORMATS,
    SUPPORTED_GROUP_SIZES, TOOL_VERSION
)
from bench.commands import cmd_bench, cmd_encode, cmd_footprint, cmd_generate, cmd_verify
from errors import DcsrError, OracleMismatchError

logger = logging.getLogger(__name__)


def setup_logging() -> None:
    """Send log records to stderr; stdout is reserved for reports."""
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _sparsity_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sparsities, got {text}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one sparsity")
    return values


def _add_generator_flags(parser: argparse.ArgumentParser, required: bool = False) -> None:
    parser.add_argument("--rows", type=int, required=required)
    parser.add_argument("--cols", type=int, required=required)
    parser.add_argument("--sparsity", type=float, required=required)
    parser.add_argument("--seed", type=int, default=0)


def _add_codec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--group-size", type=int, default=DEFAULT_GROUP_SIZE, choices=SUPPORTED_GROUP_SIZES)
    parser.add_argument("--ri-bits", type=int, default=DEFAULT_RI_BITS)


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--report", choices=REPORT_FORMATS, default="json")
    parser.add_argument("--report-out", default=None, help="Write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcsr", description="dCSR sparse matrix codec and kernel benchmark"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a uniformly pruned int8 matrix")
    _add_generator_flags(gen, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--binary", action="store_true", help="Write the dense binary format")
    gen.set_defaults(handler=cmd_generate)

    encode = sub.add_parser("encode", help="Encode a matrix file into a container")
    encode.add_argument("--in", dest="input", required=True)
    encode.add_argument("--format", choices=FORMATS, default="dcsr")
    encode.add_argument("--out", required=True)
    encode.add_argument("--crc", action="store_true", help="Append a CRC32 trailer (dcsr only)")
    _add_codec_flags(encode)
    _add_report_flags(encode)
    encode.set_defaults(handler=cmd_encode)

    verify = sub.add_parser("verify", help="Check that a container decodes to its source")
    verify.add_argument("--in", dest="input", required=True)
    verify.add_argument("--encoded", required=True)
    verify.set_defaults(handler=cmd_verify)

    footprint = sub.add_parser("footprint", help="Compare memory footprints across formats")
    footprint.add_argument("--in", dest="input", default=None)
    footprint.add_argument("--all", action="store_true")
    footprint.add_argument("--format", choices=FORMATS, action="append")
    footprint.add_argument(
        "--sweep", type=_sparsity_list, nargs="?", const=list(DEFAULT_SWEEP), default=None,
        help="Generate one matrix per sparsity (comma-separated) and report each",
    )
    _add_generator_flags(footprint)
    _add_codec_flags(footprint)
    _add_report_flags(footprint)
    footprint.set_defaults(handler=cmd_footprint)

    bench = sub.add_parser("bench", help="Run kernels against the dense oracle")
    bench.add_argument("--weights", default=None)
    bench.add_argument("--activations", default=None)
    bench.add_argument("--pixels", type=_positive_int, default=DEFAULT_PIXELS)
    bench.add_argument("--kernel", choices=KERNELS, action="append")
    bench.add_argument("--repeat", type=_positive_int, default=DEFAULT_REPEAT)
    bench.add_argument("--input-zero-point", type=int, default=DEFAULT_INPUT_ZERO_POINT)
    bench.add_argument("--output-zero-point", type=int, default=DEFAULT_OUTPUT_ZERO_POINT)
    bench.add_argument("--multiplier", type=int, default=DEFAULT_MULTIPLIER)
    bench.add_argument("--shift", type=int, default=DEFAULT_SHIFT)
    bench.add_argument("--raw", action="store_true", help="Report raw 32-bit accumulators")
    _add_generator_flags(bench)
    _add_codec_flags(bench)
    _add_report_flags(bench)
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        return args.handler(args)
    except OracleMismatchError as e:
        logger.error(f"Oracle mismatch: {e}")
        return EXIT_ORACLE_MISMATCH
    except (DcsrError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return EXIT_USAGE


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
