from pathlib import Path

import pytest

from app.enums import DamperKind, ErrorCode
from app.errors import HarnessError
from app.schemas import Disk, ExperimentConfig
from app.services.config_service import ConfigService, load_config, parse_config, serialize_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SAMPLE = """
# two disks
[domain]
h = 0.2
r0 = 3
r1 = 4
obstacles = -2, 0, 0.5; 2, 0, 0.5

[damper]
kind = exterior_with_hole
holes = 0, 0, 1.8

[initial]
center = 3.5, 0
width = 0.4

[run]
t_end = 20
radii = 4, 6
theorem_run = true

[output]
scenario = sample
"""


def _error(text: str) -> HarnessError:
    with pytest.raises(HarnessError) as info:
        parse_config(text)
    return info.value


def test_empty_sections_give_defaults():
    assert parse_config("[domain]\n") == ExperimentConfig()
    assert parse_config("") == ExperimentConfig()


def test_sample_values():
    config = parse_config(SAMPLE)

    assert config.domain.h == 0.2
    assert config.domain.obstacles == [
        Disk(center=(-2.0, 0.0), radius=0.5),
        Disk(center=(2.0, 0.0), radius=0.5),
    ]
    assert config.damper.kind == DamperKind.EXTERIOR_WITH_HOLE
    assert config.initial.center == (3.5, 0.0)
    assert config.run.radii == [4.0, 6.0]
    assert config.run.theorem_run is True
    assert config.scenario == "sample"


def test_serialized_form_parses_back():
    config = parse_config(SAMPLE)
    assert parse_config(serialize_config(config)) == config


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs(path):
    config = load_config(path)
    assert config.scenario == path.stem
    assert parse_config(serialize_config(config)) == config


def test_derived_values():
    config = parse_config("[domain]\nh = 0.1\nr0 = 2\nr1 = 3\n[run]\nt_end = 40\n")

    assert config.domain_spec().r_box == pytest.approx(3 + 20 + 1.0)
    assert config.fit_window() == (10.0, 36.0)
    assert config.observer_radii() == [3.0]
    assert config.bump_center() == (2.5, 0.0)


def test_config_hash_tracks_content():
    a = parse_config(SAMPLE)
    b = parse_config(SAMPLE.replace("t_end = 20", "t_end = 21"))

    assert ConfigService.config_hash(a) == ConfigService.config_hash(parse_config(SAMPLE))
    assert ConfigService.config_hash(a) != ConfigService.config_hash(b)


class TestParseErrors:
    def test_line_without_equals(self):
        error = _error("[domain]\nh 0.1\n")
        assert error.code == ErrorCode.PARSE_ERROR
        assert error.context["line"] == 2

    def test_key_before_any_section(self):
        assert _error("h = 0.1\n").code == ErrorCode.PARSE_ERROR

    def test_unknown_section(self):
        assert _error("[physics]\n").code == ErrorCode.PARSE_ERROR

    def test_unterminated_header(self):
        assert _error("[domain\n").code == ErrorCode.PARSE_ERROR

    def test_duplicate_key(self):
        error = _error("[domain]\nh = 0.1\nh = 0.2\n")
        assert error.code == ErrorCode.PARSE_ERROR
        assert error.context["line"] == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(HarnessError) as info:
            load_config(tmp_path / "missing.cfg")
        assert info.value.code == ErrorCode.PARSE_ERROR


class TestValidationErrors:
    def test_negative_spacing(self):
        error = _error("[domain]\nh = -0.1\n")
        assert error.code == ErrorCode.VALIDATION_ERROR
        assert error.context["field"] == "h"
        assert error.context["line"] == 2

    def test_unknown_key(self):
        error = _error("[run]\nspeed = 3\n")
        assert error.code == ErrorCode.VALIDATION_ERROR
        assert error.context["field"] == "speed"

    def test_unknown_damper_kind(self):
        assert _error("[damper]\nkind = QUADRATIC\n").code == ErrorCode.VALIDATION_ERROR

    def test_fit_window_past_t_end(self):
        error = _error("[run]\nt_end = 10\nfit_t_max = 20\n")
        assert error.code == ErrorCode.VALIDATION_ERROR
        assert error.context["field"] == "fit_t_max"

    def test_box_must_contain_r1(self):
        error = _error("[domain]\nr1 = 3\nr_box = 2\n")
        assert error.context["field"] == "r_box"

    def test_reversed_band(self):
        error = _error("[resolvent]\nhigh_band = 40, 5\n")
        assert error.context["field"] == "high_band"

    def test_center_dimension(self):
        error = _error("[domain]\ndimension = 1\n[initial]\ncenter = 2, 0\n")
        assert error.context["field"] == "center"
