"""
cq-stein - command-line entry point.
Divergences, hypothesis testing and resource-theory constructions for
classical-quantum channels.
"""
import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from cqstein import __version__
from cqstein.cli import register_all
from cqstein.core.config import settings
from cqstein.core.errors import EXIT_INPUT_ERROR, CqSteinError
from cqstein.schemas import ErrorResponse

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    """Parser factory: one subparser per subcommand."""
    parser = argparse.ArgumentParser(
        prog="cq-stein",
        description=settings.PROJECT_DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Umegaki channel divergence between two catalogue channels
    cq-stein div catalogue:flip catalogue:depolarizing --kind d

    # Finite-n Stein sweep against the replacer set, as JSON
    cq-stein sweep-gqsl catalogue:flip --set replacer --nmax 4 --format json

    # Reproduce the worked examples; exit 1 if any identity fails
    cq-stein examples
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    register_all(subparsers)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    """Log to stderr so stdout carries only results."""
    logging.basicConfig(
        level=(level or settings.effective_log_level).upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def report_error(exc: CqSteinError) -> None:
    response = ErrorResponse(error=exc.error, message=exc.message, details=exc.details or None)
    sys.stderr.write(json.dumps(response.model_dump(), indent=2, default=str) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level)
        logger.debug(f"{settings.PROJECT_NAME} {__version__}: {args.command}")
        return args.handler(args)
    except CqSteinError as exc:
        logger.error(f"{exc.error}: {exc.message}")
        report_error(exc)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        report_error(CqSteinError(str(exc), {"type": type(exc).__name__}))
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
