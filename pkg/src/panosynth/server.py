import logging
from contextlib import asynccontextmanager

from fastmcp import FastMCP

from panosynth import __version__
from panosynth.util.context import get_job_context

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(server: FastMCP):
    """Load the job config and palette at startup so config errors surface early."""
    context = get_job_context()
    logger.info("panosynth tools ready (f=%g, d=%s)", context.job.f, context.job.d)
    try:
        yield {"job": context.job, "palette": context.palette}
    finally:
        logger.info("panosynth server stopping")


mcp = FastMCP(
    "panosynth",
    instructions=(
        "This MCP server synthesizes panoramic semantic-segmentation data from four-camera rigs. "
        "It projects points and images onto a cylinder, estimates the rig distance parameter d "
        "by region matching, stitches four RGB/label pairs into a 360 degree panorama, and "
        "evaluates label maps (mIoU, accuracy, median-frequency class weights). "
        "Tools read and write files on the server's filesystem and return JSON."
    ),
    lifespan=lifespan,
    version=__version__,
)

from panosynth.tools import register_all_tools  # noqa: E402

register_all_tools(mcp)
