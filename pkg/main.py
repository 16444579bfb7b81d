import argparse
import json
import logging
import sys
from pathlib import Path

from config import settings
from errors import (
    BudgetExceededError, DegenerateMappingError, OracleRegionError, ParseError, SpecValidationError,
    ZetaError,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID_SPEC = 2
EXIT_DEGENERATE = 3
EXIT_BUDGET = 4
EXIT_ORACLE_REGION = 5

logger = logging.getLogger(__name__)


def configure_logging(level: str):
    """stderr always, plus the file in LOG_FILE when set; stdout carries the report."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newton-zeta",
        description="Exact Igusa local zeta functions of non-degenerate polynomial mappings and of f/g.",
    )
    parser.add_argument("--spec", type=Path, help="TOML problem spec file")
    parser.add_argument("--format", choices=["text", "structured"], help="report format (default: from the spec file)")
    parser.add_argument("--oracle-level", type=int, help="run the truncated-integration check for M = 1..LEVEL")
    parser.add_argument("--override-degenerate", action="store_true", default=None,
                        help="assemble the formula even if the non-degeneracy check fails")
    parser.add_argument("--fan-seed", type=int, help="ray ordering of the triangulation (0 = lexicographic)")
    parser.add_argument("--output", type=Path, help="write the report here instead of stdout")
    parser.add_argument("--schema", action="store_true", help="print the structured report's JSON schema and exit")
    parser.add_argument("--log-level", default=settings.log_level, help="logging level (default: %(default)s)")
    return parser


def main(argv=None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    # heavy imports after logging is configured
    from engine import run
    from problem import load_spec
    from report.formatter import print_report
    from report.schema import report_schema

    if args.schema:
        sys.stdout.write(json.dumps(report_schema(), indent=2) + "\n")
        return EXIT_OK
    if args.spec is None:
        logger.error("--spec is required")
        return EXIT_INVALID_SPEC

    try:
        spec = load_spec(args.spec)
        report = run(
            spec,
            override_degenerate=args.override_degenerate,
            fan_seed=args.fan_seed,
            oracle_level=args.oracle_level,
        )
    except ParseError as e:
        logger.error(f"Parse error:\n{e.pointer()}")
        return EXIT_INVALID_SPEC
    except SpecValidationError as e:
        logger.error(f"Invalid spec: {e}")
        return EXIT_INVALID_SPEC
    except DegenerateMappingError as e:
        logger.error(f"Refusing to assemble the formula: {e}. Use --override-degenerate to proceed anyway.")
        return EXIT_DEGENERATE
    except BudgetExceededError as e:
        logger.error(f"Refused: {e}")
        return EXIT_BUDGET
    except OracleRegionError as e:
        logger.error(f"Oracle refused: {e}")
        return EXIT_ORACLE_REGION
    except ZetaError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID_SPEC
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_UNEXPECTED

    fmt = args.format or spec.options.output_format
    payload = print_report(report, fmt)
    if args.output:
        args.output.write_bytes(payload)
        logger.info(f"Report written to {args.output}")
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
