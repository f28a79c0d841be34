import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from panosynth.config import JobConfig, Settings, load_job_config
from panosynth.geometry.cylproj import SYNTHIA_FOCAL_LENGTH
from panosynth.imaging.models import ConfigError
from panosynth.util.context import job_with
from panosynth.util.dry_run import render_plan
from panosynth.util.yaml_util import from_yaml, load_config_file


class TestJobConfig:
    def test_defaults(self):
        job = JobConfig()
        assert job.f == SYNTHIA_FOCAL_LENGTH
        assert job.radius == job.f
        assert job.d is None
        assert job.splits == [90, 180, 360]
        assert job.distortion_focal_lengths == [700.0, 600.0, 500.0, 400.0]
        assert (job.resize_width, job.resize_height) == (3328, 768)
        assert job.ignore_classes == [14, 15]

    @pytest.mark.parametrize(
        "overrides",
        [
            {"f": 0},
            {"r": -1.0},
            {"d": 0},
            {"region_width": 8},
            {"splits": [120]},
            {"order": ["left", "left", "right", "back"]},
            {"distort_directions": ["up"]},
            {"fov_per_image": 80.0},
            {"ignore_classes": [16]},
            {"void_class": 20},
            {"distortion_focal_lengths": [500.0, -1.0]},
            {"jobs": 0},
            {"colour": "red"},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            load_job_config(None, overrides)

    def test_resize_width_must_suit_splits(self):
        with pytest.raises(ConfigError, match="FoV 90"):
            load_job_config(None, {"resize_width": 250, "splits": [90]})
        with pytest.raises(ConfigError):
            load_job_config(None, {"resize_width": 3312})
        assert load_job_config(None, {"resize_width": 3312, "splits": [360]}).resize_width == 3312
        assert load_job_config(None, {"resize_width": 250, "splits": []}).splits == []

    def test_file_then_flags(self, tmp_path):
        path = tmp_path / "job.yaml"
        path.write_text("f: 500\nd: 836\nsplits: [90]\n")
        job = load_job_config(path, {"d": 900, "seed": None})
        assert job.f == 500
        assert job.d == 900
        assert job.splits == [90]
        assert job.seed == 0

    def test_json_file(self, tmp_path):
        path = tmp_path / "job.json"
        path.write_text(json.dumps({"region_rows": [100, 600], "scan_stop": 900}))
        job = load_job_config(path)
        assert job.region_rows == (100, 600)
        assert job.scan_range == (0, 900)

    def test_environment_below_file(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PANOSYNTH_JOB_SEED", "5")
        monkeypatch.setenv("PANOSYNTH_JOB_JOBS", "3")
        path = tmp_path / "job.yaml"
        path.write_text("seed: 9\n")
        job = load_job_config(path)
        assert job.seed == 9
        assert job.jobs == 3

    def test_match_config(self):
        job = JobConfig(x_c1=1000, region_width=5, scan_start=10, scan_stop=400)
        config = job.match_config()
        assert (config.x_c1, config.region_width) == (1000, 5)
        assert config.scan_range == (10, 400)
        assert JobConfig().match_config().scan_range is None

    def test_job_with(self):
        job = JobConfig()
        assert job_with(job, d=None) is job
        changed = job_with(job, f=400.0, d=700)
        assert (changed.f, changed.d) == (400.0, 700)
        with pytest.raises(ConfigError):
            job_with(job, region_width=2)


class TestConfigFiles:
    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "absent.yaml")

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("f: [1, 2\n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config_file(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config_file(path) == {}
        assert load_job_config(path) == JobConfig()


class TestSettings:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("PANOSYNTH_TRANSPORT", raising=False)
        monkeypatch.delenv("PANOSYNTH_LOG_LEVEL", raising=False)
        settings = Settings()
        assert settings.transport == "stdio"
        assert settings.log_level == "INFO"
        assert settings.job_config is None

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("PANOSYNTH_TRANSPORT", "http")
        monkeypatch.setenv("PANOSYNTH_LOG_LEVEL", "debug")
        monkeypatch.setenv("PANOSYNTH_JOB_CONFIG", "/tmp/job.yaml")
        settings = Settings()
        assert settings.transport == "http"
        assert settings.log_level == "DEBUG"
        assert settings.job_config == Path("/tmp/job.yaml")

    def test_invalid_transport(self):
        with pytest.raises(ValidationError):
            Settings(transport="carrier-pigeon")


def test_dry_run_plan():
    job = JobConfig(palette_path=Path("/data/palette.json"))
    text = render_plan("stitch", job, {"rgb": [Path("a.png")]}, {"pano": Path("out/rgb/pano.png")}, ["d estimated"])
    assert text.startswith("## DRY RUN STITCH")
    assert "- d estimated" in text
    body = text.split("```yaml\n", 1)[1].split("\n```", 1)[0]
    plan = from_yaml(body)
    assert plan["inputs"] == {"rgb": ["a.png"]}
    assert plan["config"]["palette_path"] == "/data/palette.json"
    assert plan["config"]["splits"] == [90, 180, 360]
