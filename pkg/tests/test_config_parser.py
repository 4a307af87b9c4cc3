from pathlib import Path

import pytest

from app.commands.common import apply_overrides
from app.exceptions import ConfigurationError
from app.services.config_parser import config_summary, load_config, parse_config


CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestParseConfig:
    def test_valid_document(self, config_text):
        config = parse_config(config_text)
        assert config.law.C0 == pytest.approx(1.0 / 2.45e9)
        assert config.law.f_m == 100.0
        assert config.grid.t_end == 0.005
        assert config.run.receivers == [100.0, 300.0]
        assert config.source_spec.forcing.t0 == 0.0614

    def test_out_of_range_value_reports_its_line(self, config_text):
        with pytest.raises(ConfigurationError) as error:
            parse_config(config_text.replace("zeta: 0.95", "zeta: 1.2"))
        assert error.value.line == 20
        assert "grid.zeta" in str(error.value)

    def test_unknown_key_reports_its_line(self, config_text):
        with pytest.raises(ConfigurationError) as error:
            parse_config(config_text.replace("  zeta: 0.95\n", "  zeta: 0.95\n  spacing: 1.0\n"))
        assert error.value.line == 21

    def test_stiffness_and_compliance_together(self, config_text):
        with pytest.raises(ConfigurationError) as error:
            parse_config(config_text.replace("  K0: 2.45e9\n", "  K0: 2.45e9\n  C0: 1.0e-9\n"))
        assert error.value.line == 7
        assert "either C0 or K0" in str(error.value)

    def test_even_esim_order(self, config_text):
        with pytest.raises(ConfigurationError) as error:
            parse_config(config_text.replace("k: 5", "k: 4"))
        assert error.value.line == 23

    def test_pulse_must_start_left_of_the_interface(self, config_text):
        with pytest.raises(ConfigurationError) as error:
            parse_config(config_text.replace("t0: 0.0614", "t0: 0.08"))
        assert error.value.line == 1

    def test_malformed_yaml(self):
        with pytest.raises(ConfigurationError) as error:
            parse_config("material: [1.0, 2.0\ngrid:\n  nx: 400\n")
        assert error.value.line is not None

    def test_document_must_be_a_mapping(self):
        with pytest.raises(ConfigurationError) as error:
            parse_config("- 1\n- 2\n")
        assert error.value.line == 1

    def test_summary_is_json_ready(self, config_text):
        summary = config_summary(parse_config(config_text))
        assert summary["interface"]["K0"] == 2.45e9
        assert summary["run"]["boundary"] == "absorbing"


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.yaml")

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_configs_are_valid(self, path):
        assert load_config(path).material.x0 > 0.0


class TestOverrides:
    def test_no_overrides_returns_the_same_config(self, config_text):
        config = parse_config(config_text)
        assert apply_overrides(config) is config

    def test_grid_and_frequency(self, config_text):
        config = apply_overrides(parse_config(config_text), nx=800, fm=30.0)
        assert config.grid.nx == 800
        assert config.law.f_m == 30.0

    def test_invalid_override(self, config_text):
        with pytest.raises(ConfigurationError):
            apply_overrides(parse_config(config_text), nx=4)


class TestPresets:
    @pytest.mark.parametrize("name, channel, f_m, drop", [
        ("converge", "C", 100.0, 1),
        ("converge_fm10", "C", 10.0, 0),
        ("converge_inertia", "M", 100.0, 1),
        ("converge_inertia_fm10", "M", 10.0, 0),
    ])
    def test_convergence_ladders(self, name, channel, f_m, drop):
        config = load_config(CONFIG_DIR / f"{name}.yaml")
        law = config.law
        if channel == "C":
            assert law.C0 == pytest.approx(1.0 / 2.45e9) and law.eps_C == 0.75 and law.M0 == 0.0
        else:
            assert law.M0 == 2.0e4 and law.eps_M == 0.75 and law.C0 == 0.0
        assert law.QC0 == 0.0 and law.QM0 == 0.0
        assert law.f_m == f_m
        assert config.source.f_c == 45.0
        assert config.sweep.nx_ladder == [400, 800, 1600, 3200]
        assert config.sweep.drop_coarsest == drop
        assert (config.checks.min_slope, config.checks.max_slope) == (3.5, 4.5)

    @pytest.mark.parametrize("name, f_m", [
        ("validate", 100.0),
        ("validate_fm500", 500.0),
        ("validate_compliance_dissipation", 500.0),
        ("validate_dissipation", 500.0),
        ("validate_inertia", 100.0),
    ])
    def test_validation_runs_on_the_finest_grid(self, name, f_m):
        config = load_config(CONFIG_DIR / f"{name}.yaml")
        assert config.grid.nx == 3200
        assert config.law.f_m == f_m
        assert config.source.f_c == 45.0
        assert config.checks.max_relative_error == 1e-4

    def test_dissipative_validation_cases(self):
        both = load_config(CONFIG_DIR / "validate_compliance_dissipation.yaml").law
        assert both.C0 > 0.0 and both.QC0 == 2.0e-7 and both.eps_QC == 0.9
        q_only = load_config(CONFIG_DIR / "validate_dissipation.yaml").law
        assert q_only.C0 == 0.0 and q_only.M0 == 0.0 and q_only.QC0 == 2.0e-7

    @pytest.mark.parametrize("base", ["nonreciprocity", "nonreciprocity_quasi_periodic"])
    def test_fifty_hertz_sweeps_match_the_thirty_hertz_ones(self, base):
        slow, fast = load_config(CONFIG_DIR / f"{base}.yaml"), load_config(CONFIG_DIR / f"{base}_fc50.yaml")
        assert (slow.source.f_c, fast.source.f_c) == (30.0, 50.0)
        assert fast.law == slow.law
        assert fast.sweep.fm_grid() == slow.sweep.fm_grid()
        assert fast.checks.nonreciprocity_targets == slow.checks.nonreciprocity_targets == [112.0, 224.0, 336.0]
