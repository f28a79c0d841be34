"""Job configuration and palette shared by the MCP tools."""

from functools import lru_cache
from typing import Any, NamedTuple

from panosynth.config import JobConfig, load_job_config, settings
from panosynth.imaging.io import load_palette
from panosynth.imaging.models import Palette


class JobContext(NamedTuple):
    job: JobConfig
    palette: Palette


@lru_cache(maxsize=1)
def get_job_context() -> JobContext:
    """Load the server's JobConfig (PANOSYNTH_JOB_CONFIG file, env, defaults) once."""
    job = load_job_config(settings.job_config)
    return JobContext(job, load_palette(job.palette_path))


def get_context(ctx) -> JobContext:
    """Extract the job configuration and palette from the lifespan context."""
    state = ctx.request_context.lifespan_context
    return JobContext(state["job"], state["palette"])


def job_with(job: JobConfig, **overrides: Any) -> JobConfig:
    """Copy of ``job`` with the non-None overrides applied and validated."""
    values = {k: v for k, v in overrides.items() if v is not None}
    if not values:
        return job
    return load_job_config(None, {**job.model_dump(), **values})
