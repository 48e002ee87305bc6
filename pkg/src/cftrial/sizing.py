"""Sample-size solvers and analytic operating characteristics.

Variance model
--------------
With N the total trial person-years and an E-arm allocation fraction a,
the log-incidence estimates behave as

    var(log rate_E) = c_E / N,   c_E = 1 / (a * lambda_E)
    var(log rate_A) = c_A / N,   c_A = 1 / ((1 - a) * lambda_A)
    var(log cf)     = c_p0 / N + c_p1     (see cftrial.cfmodels)

so that c / N equals 1 / (lambda * arm-PY): the reciprocal of the expected
event count, which is the observed-information variance the test
procedures estimate.  When sizing, lambda_E is evaluated at the design
alternative (gamma_alt for the RAE designs, the margin alternative for
the non-inferiority design): that convention back-substitutes correctly
into the power identities, which is the check the solvers are tested by.

Sizing equations
----------------
Each two-step design is sized from a lower bound on its power of the form

    Phi(term_1(N)) + Phi(term_2(N)) = 1 + target_power

where term_1 covers the RAE step and term_2 the assay-sensitivity step.
Both terms increase with N, so the smallest satisfying N is found by
doubling a bracket and bisecting; results are rounded up to whole
person-years.  The non-inferiority size has the familiar closed form
N = (c_E + c_A) (z_power - z_alpha)^2 / (delta - delta_alt)^2.

If the counterfactual variance floor c_p1 is too large the equations have
no solution for any N; the solvers then raise
:class:`cftrial.errors.InfeasibleDesignError` carrying the limiting power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cfmodels import VarianceConstants
from .errors import InfeasibleDesignError, InvalidInputError
from .procedures import RaeDesignSpec
from .statcore import normal_cdf, normal_quantile

DESIGN_NI = "ni"
DESIGN_ACCF = "accf"
DESIGN_CONSERVATIVE_ACCF = "conservative_accf"
DESIGN_SINGLE_ARM = "single_arm"
DESIGN_KINDS = (DESIGN_NI, DESIGN_ACCF, DESIGN_CONSERVATIVE_ACCF, DESIGN_SINGLE_ARM)

_MAX_TOTAL_PY = 1e8


@dataclass(frozen=True)
class IncidenceScenario:
    """True incidence triple with allocation and follow-up duration.

    ``lambda_e`` may be ``None``; simulation and sizing derive it from the
    hypothesis in play (:func:`lambda_e_at_gamma`).
    """

    lambda_p: float
    lambda_a: float
    lambda_e: float | None = None
    allocation_e: float = 0.5
    tau: float = 1.0

    def __post_init__(self):
        if not (self.lambda_p > 0 and self.lambda_a > 0):
            raise InvalidInputError("incidence rates must be positive")
        if self.lambda_e is not None and not (self.lambda_e > 0):
            raise InvalidInputError("lambda_e must be positive when given")
        if not (0.0 < self.allocation_e < 1.0):
            raise InvalidInputError(f"allocation_e must be in (0, 1), got {self.allocation_e}")
        if not (self.tau > 0):
            raise InvalidInputError(f"tau must be positive, got {self.tau}")

    @property
    def log_effect(self) -> float:
        """Active-control effect Delta = log lambda_P - log lambda_A."""
        return math.log(self.lambda_p) - math.log(self.lambda_a)


@dataclass(frozen=True)
class SizingResult:
    """A solved trial size.

    ``expected_events`` follows the package convention
    N * (a * lambda_E(alt) + (1 - a) * lambda_A) for two-arm designs and
    N * lambda_E(alt) for the single-arm design.
    """

    total_py: int
    expected_events: float
    auxiliary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.total_py > 0):
            raise InvalidInputError("total_py must be positive")


def lambda_e_at_gamma(lambda_p: float, lambda_a: float, g: float) -> float:
    """Incidence of E implied by preserving a fraction ``g`` of the
    active-control effect: lambda_A^g * lambda_P^(1-g)."""
    if not (lambda_p > 0 and lambda_a > 0):
        raise InvalidInputError("rates must be positive")
    return math.exp(g * math.log(lambda_a) + (1.0 - g) * math.log(lambda_p))


def variance_coefficients(scenario: IncidenceScenario, design_lambda_e: float) -> tuple[float, float]:
    """Per-PY variance coefficients (c_E, c_A) for the two trial arms."""
    if not (design_lambda_e > 0):
        raise InvalidInputError("design_lambda_e must be positive")
    c_e = 1.0 / (scenario.allocation_e * design_lambda_e)
    c_a = 1.0 / ((1.0 - scenario.allocation_e) * scenario.lambda_a)
    return c_e, c_a


def _phi_shift(z_alpha: float, numerator: float, variance: float) -> float:
    """Phi(z_alpha + numerator / sqrt(variance)), with the variance -> 0
    limit handled (1.0 for a positive numerator)."""
    if variance <= 0.0:
        return 1.0 if numerator > 0 else 0.0
    return normal_cdf(z_alpha + numerator / math.sqrt(variance))


def _solve_smallest_py(lhs, target: float, limiting_power: float, spec: RaeDesignSpec, what: str) -> int:
    """Smallest integer N with lhs(N) >= target.

    ``lhs`` must be increasing in N; ``limiting_power`` is the power the
    design attains as N grows without bound, used for the infeasibility
    diagnostic.
    """
    if limiting_power <= spec.target_power:
        raise InfeasibleDesignError(
            f"{what}: the guaranteed-power bound tops out at {limiting_power:.4f} "
            f"as the trial grows (target {spec.target_power:.4f}); the "
            "counterfactual variance floor is too large",
            limiting_power=limiting_power,
        )
    lo, hi = 10.0, 10.0
    while lhs(hi) < target:
        hi *= 2.0
        if hi > _MAX_TOTAL_PY:
            raise InfeasibleDesignError(
                f"{what}: no solution below {_MAX_TOTAL_PY:g} person-years",
                limiting_power=limiting_power,
            )
    if lhs(lo) >= target:
        return math.ceil(lo)
    while hi - lo > 0.5:
        mid = 0.5 * (lo + hi)
        if lhs(mid) >= target:
            hi = mid
        else:
            lo = mid
    return math.ceil(hi)


def _two_arm_expected_events(scenario: IncidenceScenario, lambda_e_alt: float, total_py: int) -> float:
    a = scenario.allocation_e
    return total_py * (a * lambda_e_alt + (1.0 - a) * scenario.lambda_a)


def size_accf(
    spec: RaeDesignSpec,
    scenario: IncidenceScenario,
    cf_constants: VarianceConstants,
) -> SizingResult:
    """Size the counterfactual-augmented active-controlled trial.

    Solves
        Phi(z_a + (g*-g) Delta / sqrt({(1-g)^2 c_p0 + c_E + g^2 c_A}/N + (1-g)^2 c_p1))
      + Phi(z_a + Delta / sqrt((c_p0 + c_A)/N + c_p1)) = 1 + power
    for the smallest N.
    """
    delta_log = scenario.log_effect
    if delta_log <= 0:
        raise InvalidInputError("active control must reduce incidence (lambda_p > lambda_a)")
    g, gs = spec.gamma_null, spec.gamma_alt
    z_a = normal_quantile(spec.alpha)
    lambda_e_alt = lambda_e_at_gamma(scenario.lambda_p, scenario.lambda_a, gs)
    c_e, c_a = variance_coefficients(scenario, lambda_e_alt)
    c_p0, c_p1 = cf_constants.c_p0, cf_constants.c_p1

    num1 = (gs - g) * delta_log

    def lhs(n: float) -> float:
        v1 = ((1.0 - g) ** 2 * c_p0 + c_e + g**2 * c_a) / n + (1.0 - g) ** 2 * c_p1
        v2 = (c_p0 + c_a) / n + c_p1
        return _phi_shift(z_a, num1, v1) + _phi_shift(z_a, delta_log, v2)

    limit = (_phi_shift(z_a, num1, (1.0 - g) ** 2 * c_p1)
             + _phi_shift(z_a, delta_log, c_p1))
    total = _solve_smallest_py(lhs, 1.0 + spec.target_power, limit - 1.0, spec, "AC-CF design")
    return SizingResult(
        total_py=total,
        expected_events=_two_arm_expected_events(scenario, lambda_e_alt, total),
        auxiliary={"lambda_e_alt": lambda_e_alt, "c_e": c_e, "c_a": c_a},
    )


def size_conservative_accf(
    spec: RaeDesignSpec,
    scenario: IncidenceScenario,
    cf_constants: VarianceConstants,
) -> SizingResult:
    """Size the conservative counterfactual-augmented trial.

    Same two-Phi structure as :func:`size_accf` but with the critical
    value inflated by the ratio terms that the fixed lower-bound placebo
    estimate induces; the result is never below the plain AC-CF size.
    """
    delta_log = scenario.log_effect
    if delta_log <= 0:
        raise InvalidInputError("active control must reduce incidence (lambda_p > lambda_a)")
    g, gs = spec.gamma_null, spec.gamma_alt
    z_a = normal_quantile(spec.alpha)
    lambda_e_alt = lambda_e_at_gamma(scenario.lambda_p, scenario.lambda_a, gs)
    c_e, c_a = variance_coefficients(scenario, lambda_e_alt)
    c_p0, c_p1 = cf_constants.c_p0, cf_constants.c_p1

    a_coef = c_e + g**2 * c_a
    num1 = (gs - g) * delta_log

    def lhs(n: float) -> float:
        q = c_p0 / n + c_p1  # var(log cf)
        v1 = a_coef / n + (1.0 - g) ** 2 * q
        ratio1 = (math.sqrt(a_coef / n) + (1.0 - g) * math.sqrt(q)) / math.sqrt(v1)
        term1 = normal_cdf(ratio1 * z_a + num1 / math.sqrt(v1))
        v2 = (c_p0 + c_a) / n + c_p1
        ratio2 = (math.sqrt(q) + math.sqrt(c_a / n)) / math.sqrt(v2)
        term2 = normal_cdf(ratio2 * z_a + delta_log / math.sqrt(v2))
        return term1 + term2

    limit = (_phi_shift(z_a, num1, (1.0 - g) ** 2 * c_p1)
             + _phi_shift(z_a, delta_log, c_p1))
    total = _solve_smallest_py(lhs, 1.0 + spec.target_power, limit - 1.0, spec,
                               "conservative AC-CF design")
    return SizingResult(
        total_py=total,
        expected_events=_two_arm_expected_events(scenario, lambda_e_alt, total),
        auxiliary={"lambda_e_alt": lambda_e_alt, "c_e": c_e, "c_a": c_a},
    )


def size_ni(
    spec: RaeDesignSpec,
    scenario: IncidenceScenario,
    delta: float,
    delta_alt: float,
) -> SizingResult:
    """Size the non-inferiority trial for a fixed margin.

    ``delta`` is the margin in use, ``delta_alt`` the design alternative
    for the log rate ratio (both on the log scale; delta_alt = log 0.75
    for a 25% rate reduction).  Closed form:
    N = (c_E + c_A) (z_power - z_alpha)^2 / (delta - delta_alt)^2 with
    c_E evaluated at lambda_E = lambda_A * exp(delta_alt).
    """
    if not (delta > delta_alt):
        raise InfeasibleDesignError(
            f"margin delta={delta:.5f} must exceed the alternative delta_alt={delta_alt:.5f}")
    lambda_e_alt = scenario.lambda_a * math.exp(delta_alt)
    c_e, c_a = variance_coefficients(scenario, lambda_e_alt)
    z_span = normal_quantile(spec.target_power) - normal_quantile(spec.alpha)
    total = math.ceil((c_e + c_a) * z_span**2 / (delta - delta_alt) ** 2)
    return SizingResult(
        total_py=total,
        expected_events=_two_arm_expected_events(scenario, lambda_e_alt, total),
        auxiliary={"delta": delta, "delta_alt": delta_alt, "lambda_e_alt": lambda_e_alt},
    )


def size_single_arm(
    spec: RaeDesignSpec,
    scenario: IncidenceScenario,
    cf_constants: VarianceConstants,
    gamma_e_null: float,
    gamma_e_alt: float,
) -> SizingResult:
    """Size the single-arm trial with a counterfactual placebo.

    All N person-years accrue on the new agent, whose design incidence is
    lambda_P * exp(-gamma_e_alt); solves
    Phi(z_a + (gamma_e_alt - gamma_e_null) / sqrt(1/(lambda_E N) + c_p0/N + c_p1))
    >= target power.
    """
    if not (gamma_e_alt > gamma_e_null):
        raise InfeasibleDesignError(
            f"gamma_e_alt={gamma_e_alt:.5f} must exceed gamma_e_null={gamma_e_null:.5f}")
    z_a = normal_quantile(spec.alpha)
    lambda_e_alt = scenario.lambda_p * math.exp(-gamma_e_alt)
    c_p0, c_p1 = cf_constants.c_p0, cf_constants.c_p1
    num = gamma_e_alt - gamma_e_null

    def lhs(n: float) -> float:
        return _phi_shift(z_a, num, 1.0 / (lambda_e_alt * n) + c_p0 / n + c_p1)

    limit = _phi_shift(z_a, num, c_p1)
    total = _solve_smallest_py(lhs, spec.target_power, limit, spec, "single-arm design")
    return SizingResult(
        total_py=total,
        expected_events=total * lambda_e_alt,
        auxiliary={"lambda_e_alt": lambda_e_alt,
                   "gamma_e_null": gamma_e_null, "gamma_e_alt": gamma_e_alt},
    )


def analytic_type1_ni_rae(x: float, alpha: float = 0.025) -> float:
    """Type-1 error of the NI test against the RAE hypothesis.

    ``x`` is the variance ratio sigma_EA^2 / ((1-gamma)^2 sigma_PA0^2)
    between the trial contrast and the (scaled) historical contrast:

        Phi(z_alpha * (1 + sqrt(x)) / sqrt(1 + x))

    The curve equals alpha in both limits and bottoms out at
    Phi(z_alpha * sqrt(2)) (about 0.0028 at alpha = 0.025) when x = 1.
    """
    if x < 0:
        raise InvalidInputError(f"variance ratio must be non-negative, got {x}")
    z_a = normal_quantile(alpha)
    return normal_cdf(z_a * (1.0 + math.sqrt(x)) / math.sqrt(1.0 + x))


def analytic_type1_conservative_accf(
    r_ap: float,
    r_ea: float,
    gamma: float,
    alpha: float = 0.025,
) -> float:
    """Type-1 error bound of the conservative two-step procedure.

    ``r_ap`` = sigma_A / sigma_P and ``r_ea`` = sigma_E / sigma_A.  The
    bound is max(alpha_1, alpha_2) over the two steps; it never exceeds
    ``alpha`` and tends to it as r_ap goes to 0 or infinity.
    """
    if not (r_ap > 0 and r_ea > 0):
        raise InvalidInputError("variance ratios must be positive")
    z_a = normal_quantile(alpha)
    s = math.sqrt(r_ea**2 + gamma**2)
    alpha1 = normal_cdf(z_a * (s * r_ap + (1.0 - gamma))
                        / math.sqrt(s**2 * r_ap**2 + (1.0 - gamma) ** 2))
    alpha2 = normal_cdf(z_a * (r_ap + 1.0) / math.sqrt(r_ap**2 + 1.0))
    return max(alpha1, alpha2)


def analytic_power(
    design_kind: str,
    spec: RaeDesignSpec,
    scenario: IncidenceScenario,
    cf_constants: VarianceConstants | None,
    total_py: float,
    *,
    delta: float | None = None,
    delta_alt: float | None = None,
    gamma_e_null: float | None = None,
    gamma_e_alt: float | None = None,
) -> float:
    """Analytic power of a design at a given trial size.

    For the two-step designs this is the additive lower bound
    Phi(term_1) + Phi(term_2) - 1 that the sizing equations solve, so
    evaluating it at a solved size returns the target power (within one
    person-year of the boundary).  NI requires ``delta``/``delta_alt``;
    the single-arm design takes its margins from ``gamma_e_*`` or derives
    them as gamma * Delta from ``spec``.
    """
    if not (total_py > 0):
        raise InvalidInputError("total_py must be positive")
    z_a = normal_quantile(spec.alpha)
    delta_log = scenario.log_effect

    if design_kind == DESIGN_NI:
        if delta is None or delta_alt is None:
            raise InvalidInputError("NI analytic power needs delta and delta_alt")
        lam_e = scenario.lambda_a * math.exp(delta_alt)
        c_e, c_a = variance_coefficients(scenario, lam_e)
        return _phi_shift(z_a, delta - delta_alt, (c_e + c_a) / total_py)

    if design_kind == DESIGN_SINGLE_ARM:
        g_null = gamma_e_null if gamma_e_null is not None else spec.gamma_null * delta_log
        g_alt = gamma_e_alt if gamma_e_alt is not None else spec.gamma_alt * delta_log
        lam_e = scenario.lambda_p * math.exp(-g_alt)
        v = 1.0 / (lam_e * total_py) + cf_constants.c_p0 / total_py + cf_constants.c_p1
        return _phi_shift(z_a, g_alt - g_null, v)

    g, gs = spec.gamma_null, spec.gamma_alt
    lam_e = lambda_e_at_gamma(scenario.lambda_p, scenario.lambda_a, gs)
    c_e, c_a = variance_coefficients(scenario, lam_e)
    c_p0, c_p1 = cf_constants.c_p0, cf_constants.c_p1
    num1 = (gs - g) * delta_log

    if design_kind == DESIGN_ACCF:
        v1 = ((1.0 - g) ** 2 * c_p0 + c_e + g**2 * c_a) / total_py + (1.0 - g) ** 2 * c_p1
        v2 = (c_p0 + c_a) / total_py + c_p1
        return _phi_shift(z_a, num1, v1) + _phi_shift(z_a, delta_log, v2) - 1.0

    if design_kind == DESIGN_CONSERVATIVE_ACCF:
        q = c_p0 / total_py + c_p1
        a_coef = c_e + g**2 * c_a
        v1 = a_coef / total_py + (1.0 - g) ** 2 * q
        ratio1 = (math.sqrt(a_coef / total_py) + (1.0 - g) * math.sqrt(q)) / math.sqrt(v1)
        v2 = (c_p0 + c_a) / total_py + c_p1
        ratio2 = (math.sqrt(q) + math.sqrt(c_a / total_py)) / math.sqrt(v2)
        return (normal_cdf(ratio1 * z_a + num1 / math.sqrt(v1))
                + normal_cdf(ratio2 * z_a + delta_log / math.sqrt(v2)) - 1.0)

    raise InvalidInputError(f"unknown design kind: {design_kind!r}")
