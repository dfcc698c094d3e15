"""Structured config parsing, calibration overlays, preset resolution."""

import math

import pytest

from transient_kinetics.config import (
    Calibration,
    apply_sections,
    default_calibration,
    load_calibration_file,
    parse_sections,
    presets_dir,
    resolve_preset_path,
)
from transient_kinetics.errors import ConfigError


class TestParseSections:
    def test_basic(self):
        text = "# note\n[alpha]\nx = 1\ny = two\n\n[beta]\nbare\n"
        sections = parse_sections(text)
        assert sections == [("alpha", [("x", "1"), ("y", "two")]), ("beta", [("bare", "")])]

    def test_repeated_keys_preserved(self):
        sections = parse_sections("[s]\nmove_to = 1\nmove_to = 2\n")
        assert sections[0][1] == [("move_to", "1"), ("move_to", "2")]

    def test_entry_outside_section(self):
        with pytest.raises(ConfigError):
            parse_sections("x = 1\n")

    def test_malformed_header(self):
        with pytest.raises(ConfigError):
            parse_sections("[oops\nx = 1\n")


class TestCalibration:
    def test_defaults_match_packaged_preset(self):
        cal = default_calibration()
        assert cal.kinetics.pre_exponential == pytest.approx(0.1703)
        assert cal.kinetics.activation_energy == pytest.approx(18090.0)
        assert cal.photolysis_rate == pytest.approx(math.log(20.0) / 1800.0, rel=1e-12)
        assert cal.hf_saturation == 0.95
        assert set(cal.materials) >= {"ecoflex-0wt", "ecoflex-10wt", "ecoflex-20wt"}
        assert cal.temp_sensor.slope == 0.002
        assert cal.simulation.mobility_loss_alpha == 0.2

    def test_overlay_wins(self, tmp_path):
        overlay = tmp_path / "custom.cfg"
        overlay.write_text("[kinetics]\npre_exponential_per_s = 0.2\n")
        cal = load_calibration_file(overlay, default_calibration())
        assert cal.kinetics.pre_exponential == 0.2
        assert cal.kinetics.activation_energy == pytest.approx(18090.0)

    def test_tcr_variant_preset(self):
        cal = load_calibration_file(presets_dir() / "tcr_high.cfg", default_calibration())
        assert cal.temp_sensor.slope == 0.2

    def test_unknown_key_rejected(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[kinetics]\nnonsense = 3\n")
        with pytest.raises(ConfigError):
            load_calibration_file(bad)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            apply_sections(Calibration(), [("mystery", [])], "<test>")

    def test_material_section(self, tmp_path):
        cfg = tmp_path / "mat.cfg"
        cfg.write_text(
            "[material.custom]\nmodulus_pa = 50000\nelastic_limit_strain = 3\n"
            "fracture_strain = 5\nfracture_stress_pa = 250000\npoisson = 0.4\n"
            "density_kg_m3 = 1000\ndpi_wt_percent = 5\n"
        )
        cal = load_calibration_file(cfg, default_calibration())
        assert cal.materials["custom"].modulus == 50000.0
        assert cal.materials["custom"].name == "custom"

    def test_material_missing_key(self, tmp_path):
        cfg = tmp_path / "mat.cfg"
        cfg.write_text("[material.custom]\nmodulus_pa = 50000\n")
        with pytest.raises(ConfigError):
            load_calibration_file(cfg)

    def test_actuator_wall_check(self, tmp_path):
        cfg = tmp_path / "act.cfg"
        cfg.write_text("[actuator]\nstrain_at_max = 80.0\nwall_material = ecoflex-20wt\n")
        with pytest.raises(ConfigError) as err:
            load_calibration_file(cfg, default_calibration())
        assert "fracture" in str(err.value)

    def test_config_echo_round_trips_key_values(self):
        echo = default_calibration().to_dict()
        assert echo["kinetics"]["pre_exponential_per_s"] == pytest.approx(0.1703)
        assert echo["actuator"]["stride_per_cycle_m"] == 0.025
        assert echo["sensor_photo"]["reverse_current_a"] == -5e-8
        assert "ecoflex-10wt" in echo["materials"]

    def test_resolve_preset_path(self, tmp_path, monkeypatch):
        local = tmp_path / "mine.cfg"
        local.write_text("[kinetics]\n")
        monkeypatch.chdir(tmp_path)
        assert resolve_preset_path("mine.cfg").resolve() == local.resolve()
        assert resolve_preset_path("default.cfg").name == "default.cfg"
        with pytest.raises(ConfigError):
            resolve_preset_path("no-such-thing.cfg")

    def test_presets_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TRANSIENT_KINETICS_PRESETS", str(tmp_path))
        assert presets_dir() == tmp_path
        # with an empty override dir the built-in dataclass defaults apply
        cal = default_calibration()
        assert cal.kinetics.pre_exponential == pytest.approx(0.1703)
