import logging
from pathlib import Path
from typing import Any

from panosynth.config import JobConfig
from panosynth.util.yaml_util import to_yaml

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def render_plan(
    command: str,
    job: JobConfig,
    inputs: dict[str, Any],
    outputs: dict[str, Any],
    notes: list[str] | None = None,
) -> str:
    """Render the resolved plan of a command as a YAML preview.

    Args:
        command: Subcommand name (project, match, stitch, ...)
        job: Fully resolved job configuration
        inputs: Input paths and derived input facts
        outputs: Paths the command would write
        notes: Optional extra lines (warnings, skipped steps)

    Returns:
        The preview text; nothing is written to disk.
    """
    plan = {
        "inputs": _plain(inputs),
        "outputs": _plain(outputs),
        "config": _plain(job.model_dump()),
    }
    message_parts = [
        f"## DRY RUN {command.upper()}",
        "",
        "```yaml",
        to_yaml(plan),
        "```",
    ]
    if notes:
        message_parts.append("")
        message_parts.append("**Notes:**")
        for note in notes:
            message_parts.append(f"- {note}")

    logger.info("Dry run for %s: nothing written", command)
    return "\n".join(message_parts)
