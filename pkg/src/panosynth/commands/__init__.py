"""Subcommands of the panosynth command line."""

from panosynth.commands.common import common_parser
from panosynth.commands.dataset import register_dataset_command
from panosynth.commands.distort import register_distort_command
from panosynth.commands.evaluate import register_eval_command
from panosynth.commands.match import register_match_command
from panosynth.commands.project import register_project_command
from panosynth.commands.serve import register_serve_command
from panosynth.commands.stitch import register_stitch_command
from panosynth.commands.weights import register_weights_command


def register_all_commands(subparsers):
    """Register every subcommand on the top-level parser."""
    common = common_parser()
    register_project_command(subparsers, common)
    register_match_command(subparsers, common)
    register_stitch_command(subparsers, common)
    register_dataset_command(subparsers, common)
    register_distort_command(subparsers, common)
    register_eval_command(subparsers, common)
    register_weights_command(subparsers, common)
    register_serve_command(subparsers, common)
