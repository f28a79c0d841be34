"""MCP tools exposing the panosynth operations."""

from panosynth.tools.evaluation import register_evaluation_tools
from panosynth.tools.geometry import register_geometry_tools


def register_all_tools(mcp):
    """Register all tool modules with the MCP server."""
    register_geometry_tools(mcp)
    register_evaluation_tools(mcp)
