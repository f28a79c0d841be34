"""``panosynth serve``: run the MCP server."""

import argparse
import logging

from panosynth.config import settings

logger = logging.getLogger(__name__)


def run_serve(args: argparse.Namespace) -> int:
    from panosynth.server import mcp

    transport = args.transport or settings.transport
    logger.info("Starting panosynth MCP server (transport=%s)", transport)

    if transport == "stdio":
        mcp.run(transport="stdio")
    elif transport == "http":
        mcp.run(transport="http", host=settings.host, port=settings.port)
    elif transport == "sse":
        mcp.run(transport="sse", host=settings.host, port=settings.port)
    return 0


def register_serve_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("serve", parents=[common], help="Expose the operations as MCP tools")
    parser.add_argument("--transport", choices=["stdio", "http", "sse"], help="Overrides PANOSYNTH_TRANSPORT")
    parser.set_defaults(handler=run_serve)
