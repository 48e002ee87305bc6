"""Hypothesis-testing procedures for the four trial designs.

All procedures target the relative-absolute-efficacy (RAE) question: does
the new agent E preserve at least a fraction ``gamma`` of the active
control A's efficacy against placebo, on the log-incidence scale?

    RAE = (log lambda_P - log lambda_E) / (log lambda_P - log lambda_A)

Sign conventions (see :mod:`cftrial.statcore`): ``normal_quantile(alpha)``
is negative for alpha < 0.5, so a rejection region written ``T >= -z_alpha``
means the statistic must exceed the familiar positive critical value
(1.96 at alpha = 0.025).

Four procedures:

* :func:`ni_test` - the classical non-inferiority comparison of E vs A at
  a fixed margin, with :func:`ni_margin_95_95` supplying the margin from
  historical placebo-controlled data (the conservative lower-confidence
  end of the historical effect, scaled by 1 - gamma).
* :func:`accf_two_step_test` - the two-step procedure for an
  active-controlled trial augmented by a counterfactual placebo estimate:
  step 1 checks assay sensitivity (placebo vs active contrast), step 2
  checks the RAE contrast; both must clear the critical value.
* :func:`conservative_accf_two_step_test` - the same two steps run against
  the lower 95% confidence bound of the placebo estimate, treated as a
  fixed constant (its variance is dropped from both denominators).
* :func:`single_arm_test` - a single-arm trial judged directly against
  the counterfactual placebo at an absolute-efficacy margin ``gamma_e``.

Every standard error uses observed event counts (with the zero-count
correction of :mod:`cftrial.statcore`).  The counterfactual estimate is
external to the trial, so its uncertainty combines with arm uncertainty
under independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidInputError
from .statcore import (
    ArmSummary,
    LogIncidenceEstimate,
    estimate_log_incidence,
    normal_quantile,
)

STEP1_FAIL = "step1_fail"
STEP2 = "step2"


@dataclass(frozen=True)
class RaeDesignSpec:
    """Hypothesis parameters of the RAE test.

    ``gamma_null`` is the preservation fraction under the null (efficacy
    below this is unacceptable); ``gamma_alt`` the fraction under the
    design alternative; ``alpha`` the one-sided level; ``target_power``
    the power the design aims for at the alternative.
    """

    gamma_null: float
    gamma_alt: float
    alpha: float
    target_power: float

    def __post_init__(self):
        if not (0.0 < self.gamma_null < self.gamma_alt):
            raise InvalidInputError(
                f"need 0 < gamma_null < gamma_alt, got {self.gamma_null}, {self.gamma_alt}")
        if not (0.0 < self.alpha < 0.5):
            raise InvalidInputError(f"alpha must be in (0, 0.5), got {self.alpha}")
        if not (0.5 < self.target_power < 1.0):
            raise InvalidInputError(f"target_power must be in (0.5, 1), got {self.target_power}")


@dataclass(frozen=True)
class TestOutcome:
    """Result of one testing procedure.

    ``statistics`` maps statistic names (for example ``"T_PA"``,
    ``"T_CF"``) to values; ``reject`` is the overall decision.
    ``step_reached`` is ``"step1_fail"`` or ``"step2"`` for the two-step
    procedures and ``None`` for single-statistic tests.
    """

    statistics: dict[str, float] = field(default_factory=dict)
    reject: bool = False
    step_reached: str | None = None


def ni_margin_95_95(
    hist_placebo: ArmSummary,
    hist_active: ArmSummary,
    gamma_null: float,
) -> float:
    """Non-inferiority margin from historical placebo-controlled data.

    delta = (1 - gamma) * (log rate ratio - 1.96 * SE): the margin keeps
    only the conservative end of the historical active-control effect,
    then discounts it by the preservation fraction.  A value <= 0 is the
    no-margin signal: the historical evidence cannot support any margin.
    """
    est_p = estimate_log_incidence(hist_placebo)
    est_a = estimate_log_incidence(hist_active)
    se = math.sqrt(est_p.variance + est_a.variance)
    return (1.0 - gamma_null) * (est_p.log_rate - est_a.log_rate + normal_quantile(0.025) * se)


def has_margin(delta: float) -> bool:
    """Whether a margin from :func:`ni_margin_95_95` is usable."""
    return delta > 0.0


def ni_test(
    trial_e: ArmSummary,
    trial_a: ArmSummary,
    delta: float,
    alpha: float,
) -> TestOutcome:
    """One-sided non-inferiority test of E vs A at margin ``delta``.

    Rejects when T_NI = (log rate ratio - delta) / SE falls at or below
    ``normal_quantile(alpha)``.  A no-margin ``delta`` (<= 0) is an
    automatic non-rejection.
    """
    if not has_margin(delta):
        return TestOutcome(statistics={"delta": delta, "T_NI": math.nan}, reject=False)
    est_e = estimate_log_incidence(trial_e)
    est_a = estimate_log_incidence(trial_a)
    se = math.sqrt(est_e.variance + est_a.variance)
    t_ni = (est_e.log_rate - est_a.log_rate - delta) / se
    return TestOutcome(
        statistics={"delta": delta, "T_NI": t_ni},
        reject=t_ni <= normal_quantile(alpha),
    )


def accf_two_step_test(
    cf: LogIncidenceEstimate,
    trial_e: ArmSummary,
    trial_a: ArmSummary,
    gamma_null: float,
    alpha: float,
) -> TestOutcome:
    """Two-step RAE test for the counterfactual-augmented design.

    Step 1 (assay sensitivity): T_PA contrasts the placebo estimate with
    the active arm; its SE combines both sources under independence.  If
    T_PA < -z_alpha the procedure stops without rejecting.  Step 2
    computes the RAE contrast

        T_CF = ((1-g) log cf - log rate_E + g log rate_A) / sqrt(V_g)

    with V_g = (1-g)^2 var(cf) + 1/events_E + g^2/events_A, and rejects
    when both statistics reach -z_alpha (the positive critical value).
    """
    crit = -normal_quantile(alpha)
    est_e = estimate_log_incidence(trial_e)
    est_a = estimate_log_incidence(trial_a)
    g = gamma_null

    se_pa = math.sqrt(cf.variance + est_a.variance)
    t_pa = (cf.log_rate - est_a.log_rate) / se_pa
    if t_pa < crit:
        return TestOutcome(statistics={"T_PA": t_pa}, reject=False, step_reached=STEP1_FAIL)

    v_gamma = (1.0 - g) ** 2 * cf.variance + est_e.variance + g**2 * est_a.variance
    t_cf = ((1.0 - g) * cf.log_rate - est_e.log_rate + g * est_a.log_rate) / math.sqrt(v_gamma)
    return TestOutcome(
        statistics={"T_PA": t_pa, "T_CF": t_cf},
        reject=t_cf >= crit,
        step_reached=STEP2,
    )


def conservative_accf_two_step_test(
    cf: LogIncidenceEstimate,
    trial_e: ArmSummary,
    trial_a: ArmSummary,
    gamma_null: float,
    alpha: float,
) -> TestOutcome:
    """Bias-robust variant of the two-step RAE test.

    The placebo estimate is replaced by the lower end of its 95%
    confidence interval, log cf + z_{0.025} * SE(cf), and that bound is
    treated as a fixed constant: the counterfactual variance is dropped
    from both denominators.  On any dataset its rejections are a subset
    of :func:`accf_two_step_test`'s.
    """
    crit = -normal_quantile(alpha)
    est_e = estimate_log_incidence(trial_e)
    est_a = estimate_log_incidence(trial_a)
    g = gamma_null

    log_lower = cf.log_rate + normal_quantile(0.025) * cf.std_err
    t_pa = (log_lower - est_a.log_rate) / est_a.std_err
    if t_pa < crit:
        return TestOutcome(statistics={"T_PA": t_pa}, reject=False, step_reached=STEP1_FAIL)

    v_gamma = est_e.variance + g**2 * est_a.variance
    t_cf = ((1.0 - g) * log_lower - est_e.log_rate + g * est_a.log_rate) / math.sqrt(v_gamma)
    return TestOutcome(
        statistics={"T_PA": t_pa, "T_CF": t_cf},
        reject=t_cf >= crit,
        step_reached=STEP2,
    )


def single_arm_test(
    cf: LogIncidenceEstimate,
    trial_e: ArmSummary,
    gamma_e: float,
    alpha: float,
) -> TestOutcome:
    """Single-arm absolute-efficacy test against the counterfactual placebo.

    Tests log lambda_P - log lambda_E <= gamma_e (insufficient efficacy)
    via T_E = (log rate_E - log cf + gamma_e) / SE, rejecting when
    T_E <= z_alpha; T_E is zero exactly on the null boundary and negative
    under strong efficacy.  gamma_e = 0 degenerates to plain superiority
    over the counterfactual placebo.
    """
    est_e = estimate_log_incidence(trial_e)
    se = math.sqrt(cf.variance + est_e.variance)
    t_e = (est_e.log_rate - cf.log_rate + gamma_e) / se
    return TestOutcome(
        statistics={"T_E": t_e},
        reject=t_e <= normal_quantile(alpha),
    )
