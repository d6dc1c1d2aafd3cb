"""
Command-Line Interface
======================

Subcommands are generated from the operation registry:

    simulate        advance one configuration, write diagnostics.csv
    twin            twin run with the Osgood envelope report
    audit KIND      lyapunov | uniqueness | scaling | energy
    lp-check CHECK  Littlewood-Paley inequality ratios (or all)
    snapshot-info   header and statistics of a snapshot file

Global flags (before the subcommand):
    --config PATH --seed N --out DIR --threads N --override section.key=value --log-level LEVEL

Exit codes: 0 pass, 2 usage/config error, 3 numerical abort, 4 audit failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import Config
from operations.config import DEFAULT_LOG_LEVEL, DEFAULT_OUTPUT_DIR
from operations.registry import registry
from report_helpers.constants import EXIT_CODE_LABELS, EXIT_USAGE

_logger = logging.getLogger("cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _UsageParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 2 instead of exiting."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _UsageParser(prog="qtensor-flow", description="Pseudo-spectral flow / Q-tensor simulator and audits")
    parser.add_argument("--config", default=None, help="INI run configuration")
    parser.add_argument("--seed", type=int, default=None, help="Replace [initial] seed")
    parser.add_argument("--out", default=None, help=f"Output directory (default: [output] directory, else {DEFAULT_OUTPUT_DIR})")
    parser.add_argument("--threads", type=int, default=None, help="FFT worker threads (default: QTF_THREADS or 1)")
    parser.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override one configuration entry; repeatable")
    parser.add_argument("--log-level", default=DEFAULT_LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")

    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_UsageParser)
    for key, operation in registry.iter_operations():
        metadata = operation.get_metadata()
        sub = subparsers.add_parser(key, help=metadata["description"], description=metadata["description"])
        operation.configure_parser(sub)
        sub.set_defaults(operation_key=key)
    return parser


def configure_logging(level: str, log_file: Optional[Path] = None):
    """Stream handler on stderr plus an optional file handler for the ops log."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    root.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    root.addHandler(stream)
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, dispatch to the registered operation and return its exit code.

    Args:
        argv: Argument list (defaults to sys.argv[1:])
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(str(e), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    log_file = Config(args.out).ops_log_file if args.out else None
    configure_logging(args.log_level, log_file)

    operation = registry.get_operation(args.operation_key)
    _logger.info(f"{args.operation_key} invoked argv={argv if argv is not None else sys.argv[1:]}")
    code = operation.run(args)
    _logger.info(f"{args.operation_key} finished exit={code} ({EXIT_CODE_LABELS.get(code, 'unknown')})")
    return code


if __name__ == "__main__":
    sys.exit(main())
