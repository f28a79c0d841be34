import argparse
import logging
import sys

from pydantic import ValidationError

from panosynth.commands import register_all_commands
from panosynth.commands.common import EXIT_CONFIG, EXIT_IO, EXIT_PROCESSING
from panosynth.config import settings
from panosynth.imaging.models import ConfigError, ImageIOError, PanoError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panosynth",
        description="Synthesize panoramic segmentation datasets from four-camera rigs.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_all_commands(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one subcommand and return its exit status."""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.log_level).upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logger = logging.getLogger(__name__)

    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_CONFIG
    except (ImageIOError, OSError) as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    except PanoError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
