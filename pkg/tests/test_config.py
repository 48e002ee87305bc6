"""Scenario configuration: parsing, validation diagnostics, round-trips,
and the built-in named scenarios."""

import math

import pytest

from cftrial.cfmodels import ExternalFollowUp, FixedVariance, RecencyScreening
from cftrial.config import GridSpec, emit_config, load_config, parse_config
from cftrial.errors import ConfigError
from cftrial.scenarios import (
    HIGH_EFFICACY,
    MODERATE,
    SCENARIOS_VERSION,
    SINGLE_ARM,
    build_plan,
    named_scenario,
    size_for_config,
    with_design,
    with_power,
)
from cftrial.sizing import DESIGN_CONSERVATIVE_ACCF, DESIGN_NI

MINIMAL = """
design = "accf"

[hypothesis]
gamma_null = 0.5
gamma_alt = 1.36
alpha = 0.025
power = 0.8

[scenario]
lambda_p = 0.03
lambda_a = 0.0136

[cf_model]
kind = "external_follow_up"
follow_up_py = 1805.0
"""


class TestParse:
    def test_minimal_document(self):
        config = parse_config(MINIMAL)
        assert config.design_kind == "accf"
        assert config.spec.gamma_alt == 1.36
        assert config.scenario.allocation_e == 0.5
        assert isinstance(config.cf_model, ExternalFollowUp)
        assert config.replicates == 10_000

    def test_comments_and_nesting_supported(self):
        config = parse_config(MINIMAL + "\n# trailing comment\n[simulation]\nseed = 7\n")
        assert config.seed == 7

    def test_unknown_key_rejected_with_path(self):
        with pytest.raises(ConfigError, match="scenario"):
            parse_config(MINIMAL.replace("lambda_a = 0.0136",
                                         "lambda_a = 0.0136\nbogus_key = 1"))

    def test_missing_required_field_names_it(self):
        broken = MINIMAL.replace("gamma_alt = 1.36\n", "")
        with pytest.raises(ConfigError, match="hypothesis.gamma_alt"):
            parse_config(broken)

    def test_invariant_violation_names_constraint(self):
        broken = MINIMAL.replace("gamma_alt = 1.36", "gamma_alt = 0.4")
        with pytest.raises(ConfigError, match="gamma_null < gamma_alt"):
            parse_config(broken)

    def test_ni_requires_historical_and_margin_sections(self):
        with pytest.raises(ConfigError, match="historical"):
            parse_config(MINIMAL.replace('design = "accf"', 'design = "ni"'))

    def test_non_ni_requires_cf_model(self):
        broken = "\n".join(line for line in MINIMAL.splitlines()
                           if not line.startswith(("kind", "follow_up_py", "[cf_model]")))
        with pytest.raises(ConfigError, match="cf_model"):
            parse_config(broken)

    def test_delta_alt_ratio_must_be_a_ratio(self):
        text = MINIMAL + "\n[ni]\ndelta_alt_ratio = 1.3\n"
        with pytest.raises(ConfigError, match="delta_alt_ratio"):
            parse_config(text)

    def test_bad_toml_reported(self):
        with pytest.raises(ConfigError, match="TOML"):
            parse_config("design = [unclosed")

    def test_recency_model_parsed(self):
        text = MINIMAL.replace(
            'kind = "external_follow_up"\nfollow_up_py = 1805.0',
            'kind = "recency_screening"\nprevalence = 0.15\nmdri_years = 0.389\n'
            'frr = 0.01\ncutoff_years = 2.0\nse_mdri = 0.019\nse_frr = 0.0025')
        config = parse_config(text)
        assert isinstance(config.cf_model, RecencyScreening)

    def test_zero_replicates_rejected(self):
        with pytest.raises(ConfigError, match="replicates"):
            parse_config(MINIMAL + "\n[simulation]\nreplicates = 0\n")

    def test_empty_grid_rejected(self):
        text = MINIMAL + """
[grid]
lambda_p_start = 0.02
lambda_p_stop = 0.03
lambda_p_points = 0
lambda_a_start = 0.01
lambda_a_stop = 0.02
lambda_a_points = 5
reps_per_cell = 100
"""
        with pytest.raises(ConfigError, match="points"):
            parse_config(text)


class TestRoundTrip:
    @pytest.mark.parametrize("name", [MODERATE, HIGH_EFFICACY, SINGLE_ARM])
    def test_named_scenarios_round_trip(self, name):
        config = named_scenario(name).config
        assert parse_config(emit_config(config)) == config

    def test_fixed_variance_round_trip(self):
        text = MINIMAL.replace(
            'kind = "external_follow_up"\nfollow_up_py = 1805.0',
            'kind = "fixed_variance"\nc_p0 = 0.25\nc_p1 = 0.0125')
        config = parse_config(text)
        assert isinstance(config.cf_model, FixedVariance)
        assert parse_config(emit_config(config)) == config

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(MINIMAL, encoding="utf-8")
        assert load_config(path) == parse_config(MINIMAL)


class TestNamedScenarios:
    def test_version_stamp(self):
        assert named_scenario(MODERATE).version == SCENARIOS_VERSION

    def test_moderate_parameters(self):
        config = named_scenario(MODERATE).config
        assert config.scenario.lambda_p == 0.03
        assert config.scenario.lambda_a == pytest.approx(0.013636, abs=1e-6)
        assert config.spec.gamma_null == 0.5
        assert config.spec.gamma_alt == 1.36
        assert config.spec.alpha == 0.025

    def test_fresh_instances(self):
        assert named_scenario(MODERATE).config == named_scenario(MODERATE).config
        assert named_scenario(MODERATE).config is not named_scenario(MODERATE).config

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            named_scenario("nope")

    def test_high_efficacy_margin_ratio_is_one(self):
        config = named_scenario(HIGH_EFFICACY).config
        assert config.delta_alt_ratio == 1.0
        assert config.delta_alt_log == 0.0

    def test_single_arm_margins(self):
        config = named_scenario(SINGLE_ARM).config
        assert config.gamma_e_null == pytest.approx(0.5 * math.log(2.2), rel=1e-12)
        assert config.gamma_e_alt == pytest.approx(1.36 * math.log(2.2), rel=1e-12)


class TestConfigHelpers:
    def test_with_design_validates(self):
        single = named_scenario(SINGLE_ARM).config
        with pytest.raises(ConfigError):
            with_design(single, DESIGN_NI)  # no historical block

    def test_with_power(self):
        config = with_power(named_scenario(MODERATE).config, 0.9)
        assert config.spec.target_power == 0.9

    def test_build_plan_converts_margin_scale(self):
        config = with_design(named_scenario(MODERATE).config, DESIGN_NI)
        plan = build_plan(config, "null", replicates=10)
        assert plan.delta_alt == pytest.approx(math.log(0.75), rel=1e-12)

    def test_size_for_config_matches_design(self):
        config = with_design(named_scenario(MODERATE).config, DESIGN_CONSERVATIVE_ACCF)
        assert size_for_config(config).total_py == pytest.approx(8205, rel=0.02)
        with pytest.raises(ConfigError):
            size_for_config(with_design(named_scenario(MODERATE).config, DESIGN_NI))

    def test_grid_values_inclusive(self):
        grid = GridSpec(0.018, 0.042, 21, 0.006, 0.03, 21, 2000)
        ps = grid.lambda_p_values()
        assert len(ps) == 21
        assert ps[0] == 0.018
        assert ps[-1] == pytest.approx(0.042, rel=1e-12)
        assert any(abs(p - 0.03) < 1e-12 for p in ps)
