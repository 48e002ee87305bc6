"""Seeded Monte Carlo evaluation of empirical operating characteristics.

Replicate model
---------------
Each replicate simulates one full trial:

* ``ni`` - draw the historical placebo-controlled trial (Poisson counts on
  each arm), set the margin with the 95%-95% rule, size the trial from
  that margin (closed form), draw the trial arms and apply the NI test.
  A margin <= 0 is the no-margin signal: the replicate counts as a
  non-rejection and is tallied under ``n_estimator_undefined``.
* ``accf`` / ``conservative_accf`` - the trial size is fixed before any
  replicate runs (solved from the design parameters unless the plan pins
  ``trial_py``); each replicate draws one counterfactual placebo estimate
  and Poisson counts for both arms, then applies the matching two-step
  test.  Recency draws that leave the placebo estimator undefined count
  as non-rejections and are tallied.
* ``single_arm`` - one arm plus a counterfactual placebo estimate.

Event counts are Poisson with mean rate * person-years; person-years are
fixed (no dropout process), matching the variance model the sizing
formulas assume.  The statistics computed here are exactly those of
:mod:`cftrial.procedures`, vectorised; a differential test in the suite
holds the two implementations together.

Determinism
-----------
Replicates are processed in fixed batches of ``BATCH_SIZE``.  Batch ``b``
of a run draws everything from the substream
``derive_stream(seed, stream_id, [cell,] b)`` in a fixed order, so a
replicate's outcome depends only on ``(plan, seed)`` - never on execution
order or worker count.  Tallies are reduced in batch-index order, which
keeps aggregation identical across thread counts.

Assumption-violation sweeps hold the design fixed (trial size, margin
source, counterfactual source) while only the true incidence pair moves;
``cf_lambda_p`` carries the incidence of the population behind the
counterfactual estimate so that the consistency assumption can be
violated deliberately.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cfmodels import (
    CfPlaceboModel,
    ExternalFollowUp,
    FixedVariance,
    RecencyScreening,
    recency_prob_recent,
    screening_counts,
    variance_constants,
)
from .errors import InvalidInputError
from .procedures import RaeDesignSpec
from .sizing import (
    DESIGN_ACCF,
    DESIGN_CONSERVATIVE_ACCF,
    DESIGN_KINDS,
    DESIGN_NI,
    DESIGN_SINGLE_ARM,
    IncidenceScenario,
    lambda_e_at_gamma,
    size_accf,
    size_conservative_accf,
    size_single_arm,
    variance_coefficients,
)
from .statcore import derive_stream, normal_quantile

BATCH_SIZE = 4096
NI_PRESIZE_DRAWS = 10_000

# Stream roles for derive_stream paths.
_STREAM_OC = 0
_STREAM_SWEEP = 1
_STREAM_NI_PRESIZE = 2

HYPOTHESIS_NULL = "null"
HYPOTHESIS_ALTERNATIVE = "alternative"


@dataclass(frozen=True)
class HistoricalTrial:
    """Historical placebo-controlled trial generating the NI margin;
    person-years are split equally between its two arms."""

    lambda_p0: float
    lambda_a0: float
    total_py: float

    def __post_init__(self):
        if not (self.lambda_p0 > 0 and self.lambda_a0 > 0 and self.total_py > 0):
            raise InvalidInputError("historical trial parameters must be positive")

    @property
    def arm_py(self) -> float:
        return self.total_py / 2.0


@dataclass(frozen=True)
class SimulationPlan:
    """Everything one Monte Carlo run needs.

    ``trial_py=None`` means "size the trial from the design parameters":
    once up front for the counterfactual designs, per replicate for NI.
    ``cf_lambda_p=None`` means the counterfactual source is consistent
    with ``truth.lambda_p``; a sweep sets it to the design value so that
    consistency breaks when the truth moves.
    """

    design_kind: str
    spec: RaeDesignSpec
    truth: IncidenceScenario
    hypothesis_state: str
    n_replicates: int
    seed: int
    cf_model: CfPlaceboModel | None = None
    historical: HistoricalTrial | None = None
    delta_alt: float | None = None
    gamma_e_null: float | None = None
    gamma_e_alt: float | None = None
    trial_py: float | None = None
    cf_lambda_p: float | None = None

    def __post_init__(self):
        if self.design_kind not in DESIGN_KINDS:
            raise InvalidInputError(f"unknown design kind: {self.design_kind!r}")
        if self.hypothesis_state not in (HYPOTHESIS_NULL, HYPOTHESIS_ALTERNATIVE):
            raise InvalidInputError(f"unknown hypothesis state: {self.hypothesis_state!r}")
        if self.n_replicates < 1:
            raise InvalidInputError("n_replicates must be at least 1")
        if self.design_kind == DESIGN_NI:
            if self.historical is None or self.delta_alt is None:
                raise InvalidInputError("NI plans need historical parameters and delta_alt")
        elif self.cf_model is None:
            raise InvalidInputError(f"{self.design_kind} plans need a cf_model")

    @property
    def cf_source_lambda_p(self) -> float:
        return self.cf_lambda_p if self.cf_lambda_p is not None else self.truth.lambda_p


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Aggregated rejection behaviour of a plan."""

    rejection_rate: float
    mc_std_err: float
    n_replicates: int
    n_estimator_undefined: int
    trial_py: float | None = None
    mean_sized_py: float | None = None
    mean_margin: float | None = None


@dataclass(frozen=True)
class SweepCell:
    """One grid cell of an assumption-violation sweep."""

    lambda_p: float
    lambda_a: float
    rejection_rate: float
    mc_std_err: float
    n_estimator_undefined: int = 0
    feasible: bool = True


@dataclass
class _BatchResult:
    reject: np.ndarray
    undefined: np.ndarray
    sized_py: np.ndarray | None = None  # NaN where no usable margin
    margin: np.ndarray | None = None


def _corrected(events: np.ndarray) -> np.ndarray:
    """Zero counts become 0.5 events, matching estimate_log_incidence."""
    return np.where(events == 0, 0.5, events.astype(float))


def resolved_gamma_e(plan: SimulationPlan) -> tuple[float, float]:
    """Single-arm efficacy margins, derived from the RAE spec when unset."""
    delta_log = plan.truth.log_effect
    g_null = plan.gamma_e_null if plan.gamma_e_null is not None else plan.spec.gamma_null * delta_log
    g_alt = plan.gamma_e_alt if plan.gamma_e_alt is not None else plan.spec.gamma_alt * delta_log
    return g_null, g_alt


def _truth_lambda_e(plan: SimulationPlan) -> float:
    """True E-arm incidence implied by the hypothesis state."""
    if plan.truth.lambda_e is not None:
        return plan.truth.lambda_e
    if plan.design_kind == DESIGN_SINGLE_ARM:
        g_null, g_alt = resolved_gamma_e(plan)
        margin = g_null if plan.hypothesis_state == HYPOTHESIS_NULL else g_alt
        return plan.truth.lambda_p * math.exp(-margin)
    g = plan.spec.gamma_null if plan.hypothesis_state == HYPOTHESIS_NULL else plan.spec.gamma_alt
    return lambda_e_at_gamma(plan.truth.lambda_p, plan.truth.lambda_a, g)


def resolve_trial_py(plan: SimulationPlan) -> float | None:
    """Trial size shared by every replicate (None for self-sizing NI runs)."""
    if plan.trial_py is not None:
        return float(plan.trial_py)
    if plan.design_kind == DESIGN_NI:
        return None
    constants = variance_constants(plan.cf_model, plan.cf_source_lambda_p, plan.truth.tau)
    if plan.design_kind == DESIGN_ACCF:
        return float(size_accf(plan.spec, plan.truth, constants).total_py)
    if plan.design_kind == DESIGN_CONSERVATIVE_ACCF:
        return float(size_conservative_accf(plan.spec, plan.truth, constants).total_py)
    g_null, g_alt = resolved_gamma_e(plan)
    return float(size_single_arm(plan.spec, plan.truth, constants, g_null, g_alt).total_py)


def _draw_cf_batch(plan: SimulationPlan, trial_py: float, rng: np.random.Generator, m: int):
    """Vectorised counterfactual placebo draws.

    Returns (log_rate, variance, undefined) arrays; undefined entries hold
    placeholder values and must be masked out by the caller.
    """
    model = plan.cf_model
    lam = plan.cf_source_lambda_p
    if isinstance(model, ExternalFollowUp):
        events = _corrected(rng.poisson(lam * model.follow_up_py, m))
        return np.log(events / model.follow_up_py), 1.0 / events, np.zeros(m, dtype=bool)
    if isinstance(model, RecencyScreening):
        counts = screening_counts(trial_py, plan.truth.tau, model, lam)
        p_r = recency_prob_recent(lam, model)
        n_recent = rng.binomial(counts.n_hiv_pos, p_r, m)
        omega = rng.normal(model.mdri_omega_t, model.se_mdri, m)
        beta = rng.normal(model.frr_beta_t, model.se_frr, m)
        p_r_hat = n_recent / counts.n_hiv_pos
        duration = omega - beta * model.cutoff_t
        gap = p_r_hat - beta
        undefined = (gap <= 0) | (duration <= 0)
        gap = np.where(undefined, 1.0, gap)
        duration = np.where(undefined, 1.0, duration)
        p = model.prevalence_p
        lam_hat = gap * p / ((1.0 - p) * duration)
        c0 = (1.0 / p) * (p_r_hat * (1.0 - p_r_hat) / gap**2
                          + 1.0 / (1.0 - p)
                          + (1.0 - p) * model.se_frr**2 / gap**2)
        c1 = model.se_mdri**2 / duration**2 + model.se_frr**2 / gap**2
        variance = c0 / counts.n_screened + c1
        return np.log(lam_hat), variance, undefined
    if isinstance(model, FixedVariance):
        variance = model.c_p0 / trial_py + model.c_p1
        log_rate = rng.normal(math.log(lam), math.sqrt(variance), m)
        return log_rate, np.full(m, variance), np.zeros(m, dtype=bool)
    raise InvalidInputError(f"unknown counterfactual placebo model: {model!r}")


def _ni_margins(plan: SimulationPlan, rng: np.random.Generator, m: int) -> np.ndarray:
    hist = plan.historical
    ev_p0 = _corrected(rng.poisson(hist.lambda_p0 * hist.arm_py, m))
    ev_a0 = _corrected(rng.poisson(hist.lambda_a0 * hist.arm_py, m))
    se = np.sqrt(1.0 / ev_p0 + 1.0 / ev_a0)
    return (1.0 - plan.spec.gamma_null) * (np.log(ev_p0 / ev_a0) + normal_quantile(0.025) * se)


def _ni_closed_form_py(plan: SimulationPlan, delta: np.ndarray) -> np.ndarray:
    lam_e_alt = plan.truth.lambda_a * math.exp(plan.delta_alt)
    c_e, c_a = variance_coefficients(plan.truth, lam_e_alt)
    z_span = normal_quantile(plan.spec.target_power) - normal_quantile(plan.spec.alpha)
    return np.ceil((c_e + c_a) * z_span**2 / (delta - plan.delta_alt) ** 2)


def _run_batch(plan: SimulationPlan, trial_py: float | None,
               rng: np.random.Generator, m: int) -> _BatchResult:
    """The replicate kernel: per-replicate decisions for one batch.

    Draw order is fixed per design (historical/counterfactual first, then
    the E arm, then the A arm) and must not change: it defines the
    replicate streams.
    """
    if plan.design_kind == DESIGN_NI:
        z_a = normal_quantile(plan.spec.alpha)
        lam_e = _truth_lambda_e(plan)
        delta = _ni_margins(plan, rng, m)
        if trial_py is None:
            ok = (delta > 0) & (delta > plan.delta_alt)
            n_py = np.where(ok, _ni_closed_form_py(plan, np.where(ok, delta, plan.delta_alt + 1.0)), 1.0)
        else:
            ok = delta > 0
            n_py = np.full(m, float(trial_py))
        py_e = n_py * plan.truth.allocation_e
        py_a = n_py * (1.0 - plan.truth.allocation_e)
        ev_e = _corrected(rng.poisson(lam_e * py_e))
        ev_a = _corrected(rng.poisson(plan.truth.lambda_a * py_a))
        t_ni = (np.log(ev_e / py_e) - np.log(ev_a / py_a) - delta) / np.sqrt(1.0 / ev_e + 1.0 / ev_a)
        return _BatchResult(
            reject=ok & (t_ni <= z_a),
            undefined=~ok,
            sized_py=np.where(ok, n_py, np.nan),
            margin=delta,
        )

    if plan.design_kind == DESIGN_SINGLE_ARM:
        z_a = normal_quantile(plan.spec.alpha)
        g_null, _ = resolved_gamma_e(plan)
        lam_e = _truth_lambda_e(plan)
        lp, sp2, undefined = _draw_cf_batch(plan, trial_py, rng, m)
        ev_e = _corrected(rng.poisson(lam_e * trial_py, m))
        le = np.log(ev_e / trial_py)
        t_e = (le - lp + g_null) / np.sqrt(sp2 + 1.0 / ev_e)
        return _BatchResult(reject=~undefined & (t_e <= z_a), undefined=undefined)

    # Two-step designs.
    g = plan.spec.gamma_null
    crit = -normal_quantile(plan.spec.alpha)
    lam_e = _truth_lambda_e(plan)
    py_e = trial_py * plan.truth.allocation_e
    py_a = trial_py * (1.0 - plan.truth.allocation_e)
    lp, sp2, undefined = _draw_cf_batch(plan, trial_py, rng, m)
    ev_e = _corrected(rng.poisson(lam_e * py_e, m))
    ev_a = _corrected(rng.poisson(plan.truth.lambda_a * py_a, m))
    le = np.log(ev_e / py_e)
    la = np.log(ev_a / py_a)
    if plan.design_kind == DESIGN_CONSERVATIVE_ACCF:
        lp_use = lp + normal_quantile(0.025) * np.sqrt(sp2)
        t_pa = (lp_use - la) / (1.0 / np.sqrt(ev_a))
        v_gamma = 1.0 / ev_e + g**2 / ev_a
    else:
        lp_use = lp
        t_pa = (lp_use - la) / np.sqrt(sp2 + 1.0 / ev_a)
        v_gamma = (1.0 - g) ** 2 * sp2 + 1.0 / ev_e + g**2 / ev_a
    t_cf = ((1.0 - g) * lp_use - le + g * la) / np.sqrt(v_gamma)
    return _BatchResult(
        reject=~undefined & (t_pa >= crit) & (t_cf >= crit),
        undefined=undefined,
    )


def _batch_sizes(n: int) -> list[int]:
    return [min(BATCH_SIZE, n - start) for start in range(0, n, BATCH_SIZE)]


def _aggregate(plan: SimulationPlan, trial_py: float | None,
               batches: list[_BatchResult]) -> OperatingCharacteristics:
    n = plan.n_replicates
    n_reject = sum(int(b.reject.sum()) for b in batches)
    n_undefined = sum(int(b.undefined.sum()) for b in batches)
    rate = n_reject / n
    mc_se = math.sqrt(rate * (1.0 - rate) / n)
    mean_sized = mean_margin = None
    if plan.design_kind == DESIGN_NI:
        n_sized = n - n_undefined
        if n_sized > 0:
            mean_sized = sum(float(np.nansum(b.sized_py)) for b in batches) / n_sized
            mean_margin = sum(float(b.margin[~b.undefined].sum()) for b in batches) / n_sized
    return OperatingCharacteristics(
        rejection_rate=rate,
        mc_std_err=mc_se,
        n_replicates=n,
        n_estimator_undefined=n_undefined,
        trial_py=trial_py,
        mean_sized_py=mean_sized,
        mean_margin=mean_margin,
    )


def run_replicate(plan: SimulationPlan, replicate_index: int) -> bool:
    """Rejection decision of one replicate, identical to what a batched
    run produces at the same index."""
    if not (0 <= replicate_index < plan.n_replicates):
        raise InvalidInputError(f"replicate_index out of range: {replicate_index}")
    trial_py = resolve_trial_py(plan)
    batch = replicate_index // BATCH_SIZE
    m = _batch_sizes(plan.n_replicates)[batch]
    rng = derive_stream(plan.seed, _STREAM_OC, batch)
    result = _run_batch(plan, trial_py, rng, m)
    return bool(result.reject[replicate_index - batch * BATCH_SIZE])


def operating_characteristics(plan: SimulationPlan, threads: int = 1) -> OperatingCharacteristics:
    """Aggregate rejection rate (with MC standard error) over the plan."""
    trial_py = resolve_trial_py(plan)
    sizes = _batch_sizes(plan.n_replicates)

    def one(b_and_m: tuple[int, int]) -> _BatchResult:
        b, m = b_and_m
        return _run_batch(plan, trial_py, derive_stream(plan.seed, _STREAM_OC, b), m)

    work = list(enumerate(sizes))
    if threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(one, work))
    else:
        batches = [one(item) for item in work]
    return _aggregate(plan, trial_py, batches)


def ni_margin_summary(plan: SimulationPlan, n_draws: int = NI_PRESIZE_DRAWS) -> tuple[float, float]:
    """(mean margin, mean self-sized trial PYs) over simulated historical
    trials, restricted to draws with a usable margin.

    Used to freeze the NI trial size before a sweep; runs on a dedicated
    substream, independent of the operating-characteristic streams.
    """
    if plan.design_kind != DESIGN_NI:
        raise InvalidInputError("margin summaries only apply to NI plans")
    total_py = 0.0
    total_margin = 0.0
    count = 0
    for b, start in enumerate(range(0, n_draws, BATCH_SIZE)):
        m = min(BATCH_SIZE, n_draws - start)
        rng = derive_stream(plan.seed, _STREAM_NI_PRESIZE, b)
        delta = _ni_margins(plan, rng, m)
        ok = (delta > 0) & (delta > plan.delta_alt)
        n_py = _ni_closed_form_py(plan, np.where(ok, delta, plan.delta_alt + 1.0))
        total_py += float(n_py[ok].sum())
        total_margin += float(delta[ok].sum())
        count += int(ok.sum())
    if count == 0:
        raise InvalidInputError("no usable margins drawn; historical trial too weak")
    return total_margin / count, total_py / count


def ni_mean_sized_py(plan: SimulationPlan, n_draws: int = NI_PRESIZE_DRAWS) -> float:
    """Mean self-sized trial PYs over simulated historical trials."""
    return ni_margin_summary(plan, n_draws)[1]


def sweep_grid(
    base_plan: SimulationPlan,
    lambda_p_grid,
    lambda_a_grid,
    reps_per_cell: int,
    threads: int = 1,
) -> list[SweepCell]:
    """Empirical rejection rate over a grid of true (lambda_P, lambda_A).

    The design is frozen at the base plan's values: trial size (the mean
    self-sized PYs for NI), counterfactual source incidence, historical
    margin distribution, and single-arm margins.  Each cell re-derives the
    true lambda_E from its own (lambda_P, lambda_A) and the hypothesis
    state.  Cells with lambda_A > lambda_P are infeasible and emitted with
    NaN rates rather than dropped.  Cell order is row-major over
    (lambda_p_grid, lambda_a_grid).
    """
    lambda_p_grid = [float(v) for v in lambda_p_grid]
    lambda_a_grid = [float(v) for v in lambda_a_grid]
    if not lambda_p_grid or not lambda_a_grid:
        raise InvalidInputError("sweep grids must be non-empty")
    if reps_per_cell < 1:
        raise InvalidInputError("reps_per_cell must be at least 1")

    if base_plan.trial_py is not None:
        trial_py = float(base_plan.trial_py)
    elif base_plan.design_kind == DESIGN_NI:
        trial_py = ni_mean_sized_py(base_plan)
    else:
        trial_py = resolve_trial_py(base_plan)

    gamma_e = (resolved_gamma_e(base_plan)
               if base_plan.design_kind == DESIGN_SINGLE_ARM else (None, None))
    cf_lambda_p = (base_plan.cf_source_lambda_p
                   if base_plan.design_kind != DESIGN_NI else None)

    cells: list[tuple[int, float, float]] = []
    results: list[SweepCell | None] = []
    index = 0
    for lam_p in lambda_p_grid:
        for lam_a in lambda_a_grid:
            if lam_a > lam_p:
                results.append(SweepCell(lam_p, lam_a, math.nan, math.nan, feasible=False))
            else:
                cells.append((index, lam_p, lam_a))
                results.append(None)
            index += 1

    def run_cell(cell: tuple[int, float, float]) -> tuple[int, SweepCell]:
        cell_index, lam_p, lam_a = cell
        plan = replace(
            base_plan,
            truth=replace(base_plan.truth, lambda_p=lam_p, lambda_a=lam_a, lambda_e=None),
            n_replicates=reps_per_cell,
            trial_py=trial_py,
            cf_lambda_p=cf_lambda_p,
            gamma_e_null=gamma_e[0],
            gamma_e_alt=gamma_e[1],
        )
        sizes = _batch_sizes(reps_per_cell)
        batches = [
            _run_batch(plan, trial_py, derive_stream(plan.seed, _STREAM_SWEEP, cell_index, b), m)
            for b, m in enumerate(sizes)
        ]
        oc = _aggregate(plan, trial_py, batches)
        return cell_index, SweepCell(
            lambda_p=lam_p,
            lambda_a=lam_a,
            rejection_rate=oc.rejection_rate,
            mc_std_err=oc.mc_std_err,
            n_estimator_undefined=oc.n_estimator_undefined,
        )

    if threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            finished = list(pool.map(run_cell, cells))
    else:
        finished = [run_cell(cell) for cell in cells]
    for cell_index, cell_result in finished:
        results[cell_index] = cell_result
    return results
