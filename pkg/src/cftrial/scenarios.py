"""Built-in named scenarios and the config-to-plan bridge.

Three bundled scenarios, version-stamped and rebuilt fresh on every call
so nothing can mutate them:

``moderate-efficacy``
    Placebo incidence 0.03 cases/PY, a 55%-efficacious active control
    (rate ratio 2.2), preservation fractions 0.5 (null) and 1.36
    (alternative, i.e. 66% efficacy of the new agent), alpha 0.025,
    power 0.8.  Counterfactual placebo from 1,805 PYs of external
    follow-up; historical placebo-controlled trial of 3,610 PYs at
    placebo incidence 0.05 with the same control effect.

``high-efficacy``
    Same skeleton with a 90%-efficacious control (lambda_A = 0.003) and
    alternative fraction 1.0; the NI alternative margin collapses to a
    rate ratio of 1.

``single-arm``
    The moderate-efficacy setting run as a single-arm design with
    absolute-efficacy margins gamma * log(2.2) and gamma_alt * log(2.2).

The default sweep grids are desk-scale choices (21 x 21, 2,000
replicates per cell) covering both sides of every robustness threshold
of interest; they are package conventions, not externally sourced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .cfmodels import ExternalFollowUp, RecencyScreening, variance_constants
from .config import DEFAULT_REPLICATES, DEFAULT_SEED, GridSpec, ScenarioConfig
from .errors import ConfigError
from .mc import HistoricalTrial, SimulationPlan, resolved_gamma_e
from .procedures import RaeDesignSpec
from .sizing import (
    DESIGN_ACCF,
    DESIGN_CONSERVATIVE_ACCF,
    DESIGN_NI,
    DESIGN_SINGLE_ARM,
    IncidenceScenario,
    SizingResult,
    size_accf,
    size_conservative_accf,
    size_single_arm,
)

SCENARIOS_VERSION = "1"

MODERATE = "moderate-efficacy"
HIGH_EFFICACY = "high-efficacy"
SINGLE_ARM = "single-arm"
SCENARIO_NAMES = (MODERATE, HIGH_EFFICACY, SINGLE_ARM)

# Subtype-B epidemic recency assay defaults: MDRI 142 days, FRR 1%,
# cutoff 2 years, 15% screening prevalence.  The assay-parameter standard
# errors are package defaults (5% relative MDRI, 0.25 percentage points
# FRR), chosen so that recency-based sizing tracks the external-follow-up
# information level; they are not externally specified.
RECENCY_MDRI_YEARS = 142.0 / 365.25
DEFAULT_SE_MDRI = 0.05 * RECENCY_MDRI_YEARS
DEFAULT_SE_FRR = 0.0025


def default_recency_assay() -> RecencyScreening:
    return RecencyScreening(
        prevalence_p=0.15,
        mdri_omega_t=RECENCY_MDRI_YEARS,
        frr_beta_t=0.01,
        cutoff_t=2.0,
        se_mdri=DEFAULT_SE_MDRI,
        se_frr=DEFAULT_SE_FRR,
    )


@dataclass(frozen=True)
class NamedScenario:
    identifier: str
    version: str
    config: ScenarioConfig


def _moderate_grid() -> GridSpec:
    return GridSpec(
        lambda_p_start=0.018, lambda_p_stop=0.042, lambda_p_points=21,
        lambda_a_start=0.006, lambda_a_stop=0.03, lambda_a_points=21,
        reps_per_cell=2000,
    )


def _high_efficacy_grid() -> GridSpec:
    return GridSpec(
        lambda_p_start=0.018, lambda_p_stop=0.042, lambda_p_points=21,
        lambda_a_start=0.001, lambda_a_stop=0.005, lambda_a_points=21,
        reps_per_cell=2000,
    )


def named_scenario(identifier: str) -> NamedScenario:
    """Build a bundled scenario; unknown names raise ConfigError."""
    if identifier == MODERATE:
        config = ScenarioConfig(
            design_kind=DESIGN_ACCF,
            spec=RaeDesignSpec(gamma_null=0.5, gamma_alt=1.36, alpha=0.025, target_power=0.8),
            scenario=IncidenceScenario(lambda_p=0.03, lambda_a=0.03 / 2.2, tau=1.0),
            cf_model=ExternalFollowUp(follow_up_py=1805.0),
            # 0.023 is intentional (not 0.05/2.2): the bundled expectation
            # values are calibrated to this historical rate.
            historical=HistoricalTrial(lambda_p0=0.05, lambda_a0=0.023, total_py=3610.0),
            delta_alt_ratio=0.75,
            seed=DEFAULT_SEED,
            replicates=DEFAULT_REPLICATES,
            grid=_moderate_grid(),
        )
    elif identifier == HIGH_EFFICACY:
        config = ScenarioConfig(
            design_kind=DESIGN_ACCF,
            spec=RaeDesignSpec(gamma_null=0.5, gamma_alt=1.0, alpha=0.025, target_power=0.8),
            scenario=IncidenceScenario(lambda_p=0.03, lambda_a=0.003, tau=1.0),
            cf_model=ExternalFollowUp(follow_up_py=1805.0),
            historical=HistoricalTrial(lambda_p0=0.05, lambda_a0=0.005, total_py=3610.0),
            delta_alt_ratio=1.0,
            seed=DEFAULT_SEED,
            replicates=DEFAULT_REPLICATES,
            grid=_high_efficacy_grid(),
        )
    elif identifier == SINGLE_ARM:
        config = ScenarioConfig(
            design_kind=DESIGN_SINGLE_ARM,
            spec=RaeDesignSpec(gamma_null=0.5, gamma_alt=1.36, alpha=0.025, target_power=0.8),
            scenario=IncidenceScenario(lambda_p=0.03, lambda_a=0.03 / 2.2, tau=1.0),
            cf_model=ExternalFollowUp(follow_up_py=1805.0),
            gamma_e_null=0.5 * math.log(2.2),
            gamma_e_alt=1.36 * math.log(2.2),
            seed=DEFAULT_SEED,
            replicates=DEFAULT_REPLICATES,
            grid=_moderate_grid(),
        )
    else:
        raise ConfigError(f"unknown scenario {identifier!r}; choose from {SCENARIO_NAMES}")
    return NamedScenario(identifier=identifier, version=SCENARIOS_VERSION, config=config)


def with_design(config: ScenarioConfig, design_kind: str) -> ScenarioConfig:
    """Re-target a config at another design, validating requirements."""
    if design_kind == DESIGN_NI and (config.historical is None or config.delta_alt_ratio is None):
        raise ConfigError("NI design needs historical parameters and ni.delta_alt_ratio")
    if design_kind != DESIGN_NI and config.cf_model is None:
        raise ConfigError(f"design {design_kind!r} needs a cf_model")
    return replace(config, design_kind=design_kind)


def with_power(config: ScenarioConfig, power: float) -> ScenarioConfig:
    return replace(config, spec=replace(config.spec, target_power=power))


def size_for_config(config: ScenarioConfig) -> SizingResult:
    """Solve the trial size of a non-NI scenario config."""
    constants = variance_constants(config.cf_model, config.scenario.lambda_p,
                                   config.scenario.tau)
    if config.design_kind == DESIGN_ACCF:
        return size_accf(config.spec, config.scenario, constants)
    if config.design_kind == DESIGN_CONSERVATIVE_ACCF:
        return size_conservative_accf(config.spec, config.scenario, constants)
    if config.design_kind == DESIGN_SINGLE_ARM:
        g_null, g_alt = resolved_gamma_e(build_plan(config, replicates=1))
        return size_single_arm(config.spec, config.scenario, constants, g_null, g_alt)
    raise ConfigError(f"cannot size design {config.design_kind!r} in closed form; "
                      "NI sizes are margin-dependent (see ni_margin_summary)")


def build_plan(
    config: ScenarioConfig,
    hypothesis_state: str | None = None,
    replicates: int | None = None,
    seed: int | None = None,
    trial_py: float | None = None,
) -> SimulationPlan:
    """Lower a validated config to a Monte Carlo plan."""
    return SimulationPlan(
        design_kind=config.design_kind,
        spec=config.spec,
        truth=config.scenario,
        hypothesis_state=hypothesis_state or config.hypothesis_state,
        n_replicates=replicates if replicates is not None else config.replicates,
        seed=seed if seed is not None else config.seed,
        cf_model=config.cf_model,
        historical=config.historical,
        delta_alt=config.delta_alt_log,
        gamma_e_null=config.gamma_e_null,
        gamma_e_alt=config.gamma_e_alt,
        trial_py=trial_py,
    )
