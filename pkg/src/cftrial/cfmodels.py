"""Counterfactual-placebo estimate models.

A counterfactual placebo estimate is an external estimate of the HIV
incidence a placebo arm would have shown in the trial population.  Its
statistical behaviour is summarised by two variance constants so that

    var(log placebo estimate) = c_p0 / N + c_p1

with N the total person-years of the active-controlled trial.  ``c_p0``
captures the part that shrinks as the trial (and with it the screening
effort) grows; ``c_p1`` is the variance floor contributed by data sources
that do not scale with the trial.

Three sources are modelled:

``ExternalFollowUp``
    Prospective follow-up of an external cohort over a fixed number of
    person-years: c_p0 = 0 and c_p1 = 1 / (lambda_P * follow_up_py).

``RecencyScreening``
    Cross-sectional recency testing applied to the trial's own screening
    population.  Every screened HIV-negative person enrolls and
    contributes tau person-years, so a trial of N PYs implies
    n_screened = N / ((1 - p) * tau) screenees; the per-screenee variance
    term is rescaled by (1 - p) * tau to trial-PY units.

``FixedVariance``
    Pass-through constants, for sensitivity analyses.

Recency-assay arithmetic uses the cross-sectional incidence estimator:
with prevalence p, mean duration of recent infection Omega_T, false
recency rate beta_T and cutoff T (all durations in years),

    P_R = beta_T + lambda_P * (1 - p) * (Omega_T - beta_T * T) / p

is the probability a screened HIV-positive person tests recent, and the
estimator inverts this relation.  The uncertainty of the calibrated assay
parameters enters through ``se_mdri`` and ``se_frr``; the second term of
the c_p1 expression is implemented in its algebraically simplified form
se_frr^2 / (P_R - beta_T)^2 (the factor (Omega_T - beta_T*T)^2 cancels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, InfeasibleScenarioError, InvalidInputError
from .statcore import ArmSummary, LogIncidenceEstimate, estimate_log_incidence


@dataclass(frozen=True)
class ExternalFollowUp:
    """Counterfactual placebo from prospective external follow-up."""

    follow_up_py: float

    def __post_init__(self):
        if not (self.follow_up_py > 0):
            raise InvalidInputError(f"follow_up_py must be positive, got {self.follow_up_py}")


@dataclass(frozen=True)
class RecencyScreening:
    """Counterfactual placebo from recency testing at trial screening.

    ``mdri_omega_t`` and ``cutoff_t`` are in years; ``se_mdri`` (years) and
    ``se_frr`` (probability) are the standard errors of the calibrated
    assay parameters.
    """

    prevalence_p: float
    mdri_omega_t: float
    frr_beta_t: float
    cutoff_t: float
    se_mdri: float
    se_frr: float

    def __post_init__(self):
        if not (0.0 < self.prevalence_p < 1.0):
            raise InvalidInputError(f"prevalence_p must be in (0, 1), got {self.prevalence_p}")
        if not (0.0 <= self.frr_beta_t < 1.0):
            raise InvalidInputError(f"frr_beta_t must be in [0, 1), got {self.frr_beta_t}")
        if not (self.mdri_omega_t > 0):
            raise InvalidInputError(f"mdri_omega_t must be positive, got {self.mdri_omega_t}")
        if not (self.mdri_omega_t < self.cutoff_t):
            raise InvalidInputError(
                f"mdri_omega_t ({self.mdri_omega_t}) must be below cutoff_t ({self.cutoff_t})")
        if not (self.mdri_omega_t - self.frr_beta_t * self.cutoff_t > 0):
            raise InvalidInputError("mdri_omega_t - frr_beta_t * cutoff_t must be positive")
        if self.se_mdri < 0 or self.se_frr < 0:
            raise InvalidInputError("assay-parameter standard errors must be non-negative")


@dataclass(frozen=True)
class FixedVariance:
    """Directly specified variance constants."""

    c_p0: float
    c_p1: float

    def __post_init__(self):
        if self.c_p0 < 0 or self.c_p1 < 0:
            raise InvalidInputError("variance constants must be non-negative")
        if self.c_p0 == 0 and self.c_p1 == 0:
            raise InvalidInputError("variance constants must not both be zero")


CfPlaceboModel = Union[ExternalFollowUp, RecencyScreening, FixedVariance]


@dataclass(frozen=True)
class VarianceConstants:
    """Coefficients of var(log placebo estimate) = c_p0 / N + c_p1."""

    c_p0: float
    c_p1: float

    def __post_init__(self):
        if not (math.isfinite(self.c_p0) and math.isfinite(self.c_p1)):
            raise InvalidInputError("variance constants must be finite")
        if self.c_p0 < 0 or self.c_p1 < 0:
            raise InvalidInputError("variance constants must be non-negative")
        if self.c_p0 == 0 and self.c_p1 == 0:
            raise InvalidInputError("variance constants must not both be zero")

    def at(self, total_py: float) -> float:
        """Variance of the log placebo estimate for a trial of ``total_py``."""
        return self.c_p0 / total_py + self.c_p1


@dataclass(frozen=True)
class ScreeningCounts:
    """Screening-phase sample sizes implied by a trial size."""

    n_screened: int
    n_hiv_pos: int
    expected_recent: float

    def __post_init__(self):
        if self.n_hiv_pos > self.n_screened:
            raise InvalidInputError("n_hiv_pos cannot exceed n_screened")
        if self.expected_recent > self.n_hiv_pos:
            raise InvalidInputError("expected_recent cannot exceed n_hiv_pos")


def recency_prob_recent(lambda_p: float, model: RecencyScreening) -> float:
    """Probability a screened HIV-positive person tests recent.

    Strictly increasing in ``lambda_p`` and equal to the false recency
    rate at zero incidence.
    """
    if lambda_p < 0:
        raise DomainError(f"lambda_p must be non-negative, got {lambda_p}")
    p = model.prevalence_p
    p_r = model.frr_beta_t + lambda_p * (1.0 - p) * (model.mdri_omega_t - model.frr_beta_t * model.cutoff_t) / p
    if p_r >= 1.0:
        raise InfeasibleScenarioError(
            f"recent-test probability {p_r:.4f} >= 1 at lambda_p={lambda_p}; "
            "incidence is too high for this assay/prevalence combination")
    return p_r


def _recency_c_p0_per_screenee(p_r: float, gap: float, prevalence: float, se_frr: float) -> float:
    return (1.0 / prevalence) * (
        p_r * (1.0 - p_r) / gap**2
        + 1.0 / (1.0 - prevalence)
        + (1.0 - prevalence) * se_frr**2 / gap**2
    )


def _recency_c_p1(gap: float, duration: float, se_mdri: float, se_frr: float) -> float:
    return se_mdri**2 / duration**2 + se_frr**2 / gap**2


def variance_constants(
    model: CfPlaceboModel,
    lambda_p: float,
    follow_up_tau: float,
    allocation: float = 0.5,
) -> VarianceConstants:
    """Variance constants of a counterfactual placebo source.

    ``lambda_p`` is the incidence of the population the estimate is drawn
    from; ``follow_up_tau`` is the per-participant follow-up duration of
    the trial (it sets the screening-to-PY conversion for the recency
    source).  ``allocation`` is accepted for signature symmetry with the
    trial-arm coefficients; no current source depends on it.
    """
    del allocation
    if not (lambda_p > 0):
        raise DomainError(f"lambda_p must be positive, got {lambda_p}")
    if not (follow_up_tau > 0):
        raise DomainError(f"follow_up_tau must be positive, got {follow_up_tau}")

    if isinstance(model, ExternalFollowUp):
        return VarianceConstants(c_p0=0.0, c_p1=1.0 / (lambda_p * model.follow_up_py))
    if isinstance(model, RecencyScreening):
        p_r = recency_prob_recent(lambda_p, model)
        gap = p_r - model.frr_beta_t
        duration = model.mdri_omega_t - model.frr_beta_t * model.cutoff_t
        per_screenee = _recency_c_p0_per_screenee(p_r, gap, model.prevalence_p, model.se_frr)
        # n_screened = N / ((1-p) * tau), so per-screenee variance scales
        # to trial-PY units by (1-p) * tau.
        scaled = per_screenee * (1.0 - model.prevalence_p) * follow_up_tau
        c_p1 = _recency_c_p1(gap, duration, model.se_mdri, model.se_frr)
        return VarianceConstants(c_p0=scaled, c_p1=c_p1)
    if isinstance(model, FixedVariance):
        return VarianceConstants(c_p0=model.c_p0, c_p1=model.c_p1)
    raise InvalidInputError(f"unknown counterfactual placebo model: {model!r}")


def screening_counts(
    trial_py: float,
    tau: float,
    model: RecencyScreening,
    lambda_p: float,
) -> ScreeningCounts:
    """Screening-phase sample sizes for a trial of ``trial_py`` person-years.

    Every screened HIV-negative person enrolls and contributes ``tau``
    person-years, so ``n_screened * (1 - p) * tau`` recovers ``trial_py``
    up to rounding of one person.
    """
    if not (trial_py > 0 and tau > 0):
        raise DomainError("trial_py and tau must be positive")
    p = model.prevalence_p
    n_screened = round(trial_py / ((1.0 - p) * tau))
    n_hiv_pos = round(p * n_screened)
    p_r = recency_prob_recent(lambda_p, model)
    return ScreeningCounts(
        n_screened=n_screened,
        n_hiv_pos=n_hiv_pos,
        expected_recent=n_hiv_pos * p_r,
    )


def simulate_cf_estimate(
    model: CfPlaceboModel,
    true_lambda_p: float,
    trial_py: float,
    tau: float,
    rng: np.random.Generator,
) -> LogIncidenceEstimate | None:
    """Draw one counterfactual placebo estimate.

    Returns ``None`` when the draw leaves the estimator undefined (a
    recency draw with no excess of recent results over the false-recency
    expectation); callers tally such replicates as non-rejections.
    """
    if not (true_lambda_p > 0):
        raise DomainError(f"true_lambda_p must be positive, got {true_lambda_p}")

    if isinstance(model, ExternalFollowUp):
        events = int(rng.poisson(true_lambda_p * model.follow_up_py))
        return estimate_log_incidence(ArmSummary(events=events, person_years=model.follow_up_py))

    if isinstance(model, RecencyScreening):
        counts = screening_counts(trial_py, tau, model, true_lambda_p)
        p_r = recency_prob_recent(true_lambda_p, model)
        n_recent = int(rng.binomial(counts.n_hiv_pos, p_r))
        omega_hat = float(rng.normal(model.mdri_omega_t, model.se_mdri))
        beta_hat = float(rng.normal(model.frr_beta_t, model.se_frr))
        p_r_hat = n_recent / counts.n_hiv_pos
        duration_hat = omega_hat - beta_hat * model.cutoff_t
        if p_r_hat <= beta_hat or duration_hat <= 0:
            return None
        p = model.prevalence_p
        gap_hat = p_r_hat - beta_hat
        lambda_hat = gap_hat * p / ((1.0 - p) * duration_hat)
        # Delta-method variance, evaluated at the observed quantities.
        c_p0 = _recency_c_p0_per_screenee(p_r_hat, gap_hat, p, model.se_frr)
        c_p1 = _recency_c_p1(gap_hat, duration_hat, model.se_mdri, model.se_frr)
        variance = c_p0 / counts.n_screened + c_p1
        return LogIncidenceEstimate(log_rate=math.log(lambda_hat), std_err=math.sqrt(variance))

    if isinstance(model, FixedVariance):
        variance = model.c_p0 / trial_py + model.c_p1
        log_rate = float(rng.normal(math.log(true_lambda_p), math.sqrt(variance)))
        return LogIncidenceEstimate(log_rate=log_rate, std_err=math.sqrt(variance))

    raise InvalidInputError(f"unknown counterfactual placebo model: {model!r}")
