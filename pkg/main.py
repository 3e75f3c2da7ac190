"""
qlsp command-line entry point.
Compiles loop programs into software-pipelined parallel output programs.
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from frontend.emitter import emit_source
from logging_config import get_logger, setup_logging
from pipeline.compile import EMIT_MODES, compile_source
from utils.errors import CompileError, VerificationError
from utils.file import default_output_path, read_source, write_json, write_output
from utils.misc import apply_overrides, get_config_value, load_config, validate_config
from verifier.interpreter import verify_program

logger = get_logger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlsp", description="Software pipelining for quantum loop programs")
    commands = parser.add_subparsers(dest="command", required=True)

    c = commands.add_parser("compile", help="compile a .qlp loop program")
    c.add_argument("file", help="input loop program")
    c.add_argument("-o", "--output", help="output path (default: FILE with suffix .qlo)")
    c.add_argument("--config", help="configuration file (default: config.yaml, or $QLSP_CONFIG)")
    c.add_argument("--unroll", type=int, metavar="C", help="unroll factor")
    c.add_argument("--range", dest="range_text", metavar="m:n|unknown", help="override the loop range")
    c.add_argument("--emit", choices=EMIT_MODES, help="output kind")
    c.add_argument("--stats", metavar="PATH", help="write depth statistics as JSON")
    c.add_argument("--verify", action="store_true", default=None, help="check the output against the source")
    c.add_argument("--verify-qubits", type=int, metavar="N", help="largest register the verifier simulates")
    c.add_argument("--verify-states", type=int, metavar="N", help="random input states for large registers")
    c.add_argument("--seed", type=int, help="verifier seed")
    c.add_argument("--max-ii", type=int, metavar="N", help="largest initiation interval tried")
    c.add_argument("--dump-qdg", action="store_true", default=None, help="print dependence graphs as DOT")
    c.add_argument("--dump-table", action="store_true", default=None, help="print reservation tables")
    c.add_argument("--dump-source", action="store_true", default=None,
                   help="print the source program after a range override")
    c.add_argument("--no-compact", dest="compact", action="store_false", default=None,
                   help="skip compaction and rotation")
    return parser


def load_settings(args: argparse.Namespace) -> dict:
    """Configuration file, environment overrides and command-line flags folded into one dict."""
    config = load_config(args.config)
    apply_overrides(config, {
        "pipeline.unroll": args.unroll,
        "pipeline.emit": args.emit,
        "pipeline.compact": args.compact,
        "pipeline.dump_source": args.dump_source,
        "scheduler.max_ii": args.max_ii,
        "scheduler.dump_qdg": args.dump_qdg,
        "scheduler.dump_table": args.dump_table,
        "verify.enabled": args.verify,
        "verify.max_qubits": args.verify_qubits,
        "verify.states": args.verify_states,
        "verify.seed": args.seed,
    })
    validate_config(config)
    return config


def run(args: argparse.Namespace) -> int:
    """
    Compile one file.

    Returns:
        int: 0 on success, 1 on a compile or I/O error, 2 on a verification mismatch
    """
    try:
        config = load_settings(args)
    except (OSError, ValueError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_ERROR
    setup_logging(config)

    try:
        source = read_source(args.file)
        result = compile_source(source, config, args.range_text)
    except CompileError as e:
        logger.error(f"{args.file}: {e}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"Cannot read {args.file}: {e}")
        return EXIT_ERROR

    if get_config_value(config, "pipeline.dump_source", False):
        try:
            sys.stdout.write(emit_source(result.source))
        except ValueError as e:
            logger.warning(f"Cannot print the source program: {e}")
    if get_config_value(config, "scheduler.dump_qdg", False):
        for dot in result.dot_graphs():
            sys.stdout.write(dot)
    if get_config_value(config, "scheduler.dump_table", False):
        for table in result.tables():
            sys.stdout.write(table)

    output_path = args.output or default_output_path(args.file, get_config_value(config, "directories.output_dir"))
    try:
        if not write_output(output_path, result.text):
            return EXIT_ERROR
        if args.stats and not write_json(args.stats, result.stats.to_dict()):
            return EXIT_ERROR
    except OSError as e:
        logger.error(f"Cannot write output: {e}")
        return EXIT_ERROR

    if get_config_value(config, "verify.enabled", False):
        try:
            verify_program(result.source, result.program, config)
        except VerificationError as e:
            logger.error(f"Verification failed: {e}")
            return EXIT_MISMATCH
        except CompileError as e:
            logger.error(f"Verification could not run: {e}")
            return EXIT_ERROR

    s = result.stats
    logger.info(f"Compiled {args.file}: kernel depth {s.kernel_depth}, total {s.qsp_total}")
    return EXIT_OK


def cli(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(cli())
