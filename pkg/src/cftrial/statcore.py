"""Scalar statistical primitives used by every other module.

Conventions
-----------
* Incidence rates are cases per person-year (PY); log-incidence means the
  natural log of that rate.
* ``normal_quantile`` follows the lower-tail convention: the 0.025 quantile
  is approximately -1.96 (a negative number).  Rejection regions elsewhere
  in the package are written against that sign convention.
* Randomness comes from ``numpy.random.Generator`` objects.  All of them
  must be derived through :func:`derive_stream`, which maps
  ``(root_seed, *path)`` to an independent substream.  Two calls with the
  same arguments yield byte-identical streams, which is what makes every
  simulation in the package replayable and order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError

# Events substituted for an observed zero count so that log-incidence and
# its standard error stay finite (continuity correction).
ZERO_EVENT_CORRECTION = 0.5


@dataclass(frozen=True)
class ArmSummary:
    """Observed events and person-years for one trial arm."""

    events: int
    person_years: float

    def __post_init__(self):
        if self.events < 0 or self.events != int(self.events):
            raise InvalidInputError(f"events must be a non-negative integer, got {self.events}")
        if not (self.person_years > 0) or not math.isfinite(self.person_years):
            raise InvalidInputError(f"person_years must be positive, got {self.person_years}")


@dataclass(frozen=True)
class LogIncidenceEstimate:
    """A log-incidence point estimate together with its standard error."""

    log_rate: float
    std_err: float

    def __post_init__(self):
        if not math.isfinite(self.log_rate):
            raise InvalidInputError(f"log_rate must be finite, got {self.log_rate}")
        if not (self.std_err > 0) or not math.isfinite(self.std_err):
            raise InvalidInputError(f"std_err must be positive, got {self.std_err}")

    @property
    def variance(self) -> float:
        return self.std_err**2


def normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to well below 1e-12 absolute error.

    Uses the complementary error function, which the C math library
    evaluates via a published rational approximation; the identity is
    Phi(x) = erfc(-x / sqrt(2)) / 2 and keeps full precision in both tails.
    """
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Coefficients of Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` for p in (0, 1).

    Note the sign convention: ``normal_quantile(0.025)`` is about -1.96.
    Acklam's approximation gives ~1e-9 relative error; one Halley step
    against :func:`normal_cdf` tightens the round trip to ~1e-15.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))

    # Halley refinement: u = (Phi(x) - p) / phi(x)
    err = normal_cdf(x) - p
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        u = err / pdf
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def estimate_log_incidence(arm: ArmSummary) -> LogIncidenceEstimate:
    """Log incidence rate and its standard error from one arm's counts.

    The estimate is log(events / person_years) with standard error
    1/sqrt(events), the observed-information form.  A zero count is
    replaced by ``ZERO_EVENT_CORRECTION`` events so both values stay
    finite.
    """
    events = arm.events if arm.events >= 1 else ZERO_EVENT_CORRECTION
    return LogIncidenceEstimate(
        log_rate=math.log(events / arm.person_years),
        std_err=1.0 / math.sqrt(events),
    )


def poisson_draw(mean: float, rng: np.random.Generator) -> int:
    """One Poisson(mean) event count from the given stream."""
    if not (mean > 0):
        raise DomainError(f"poisson mean must be positive, got {mean}")
    return int(rng.poisson(mean))


def derive_stream(seed: int, *path: int) -> np.random.Generator:
    """Deterministic substream for a simulation unit.

    The root seed plus an integer path (for example
    ``(STREAM_OC, batch_index)`` or ``(STREAM_SWEEP, cell, batch)``)
    identifies the stream; NumPy's ``SeedSequence`` spawn-key machinery
    guarantees streams with distinct paths are independent.  Replicates
    can therefore run in any order, on any number of workers, and tally
    identically.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=path)))
