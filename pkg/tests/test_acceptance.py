"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line when its criterion holds (run with
``pytest tests/test_acceptance.py -v -s``); tolerances are pinned here,
not configurable.  Criteria 1-8 must pass; criterion 9 re-states what is
deliberately not reproduced and checks its documented substitutes.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from cftrial.cfmodels import ExternalFollowUp, screening_counts, variance_constants
from cftrial.mc import (
    HistoricalTrial,
    SimulationPlan,
    operating_characteristics,
)
from cftrial.procedures import (
    RaeDesignSpec,
    accf_two_step_test,
    conservative_accf_two_step_test,
)
from cftrial.reproduce import reproduce
from cftrial.scenarios import (
    MODERATE,
    SINGLE_ARM,
    build_plan,
    default_recency_assay,
    named_scenario,
    size_for_config,
    with_design,
    with_power,
)
from cftrial.sizing import (
    DESIGN_ACCF,
    DESIGN_CONSERVATIVE_ACCF,
    DESIGN_NI,
    DESIGN_SINGLE_ARM,
    IncidenceScenario,
    analytic_power,
    analytic_type1_conservative_accf,
    analytic_type1_ni_rae,
    size_accf,
    size_conservative_accf,
    size_single_arm,
)
from cftrial.statcore import ArmSummary, LogIncidenceEstimate, derive_stream

SPEC08 = RaeDesignSpec(0.5, 1.36, 0.025, 0.8)
SPEC09 = RaeDesignSpec(0.5, 1.36, 0.025, 0.9)
MOD_SCENARIO = IncidenceScenario(lambda_p=0.03, lambda_a=0.03 / 2.2)
EXT = variance_constants(ExternalFollowUp(1805.0), 0.03, 1.0)
LOG22 = math.log(2.2)


def _report(criterion: str, detail: str):
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def test_criterion_1_sizing_moderate_setting():
    values = {}
    for name, solve, expected in [
        ("accf_0.8", lambda: size_accf(SPEC08, MOD_SCENARIO, EXT), 4942),
        ("accf_0.9", lambda: size_accf(SPEC09, MOD_SCENARIO, EXT), 6554),
        ("cons_0.8", lambda: size_conservative_accf(SPEC08, MOD_SCENARIO, EXT), 8205),
        ("cons_0.9", lambda: size_conservative_accf(SPEC09, MOD_SCENARIO, EXT), 10938),
        ("single_arm_0.8",
         lambda: size_single_arm(SPEC08, MOD_SCENARIO, EXT, 0.5 * LOG22, 1.36 * LOG22), 2398),
    ]:
        start = time.perf_counter()
        total = solve().total_py
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"{name} took {elapsed:.2f}s"
        assert total == pytest.approx(expected, rel=0.02), name
        values[name] = total
    _report("1", f"sized {values} each under 1s, all within 2%")


def test_criterion_2_sizing_high_efficacy_setting(tmp_path):
    start = time.perf_counter()
    report = reproduce("table4", tmp_path)
    elapsed = time.perf_counter() - start
    py_checks = [c for c in report.checks if c.name.startswith("py_")]
    assert len(py_checks) == 6
    assert all(c.passed for c in py_checks), [c.name for c in py_checks if not c.passed]
    assert elapsed < 120.0
    observed = {c.name: round(c.observed) for c in py_checks}
    _report("2", f"high-efficacy sizes {observed} within 3% in {elapsed:.1f}s")


def test_criterion_3_ni_mean_sized_pys():
    config = with_design(named_scenario(MODERATE).config, DESIGN_NI)
    results = {}
    for power, expected in ((0.8, 12016), (0.9, 16190)):
        oc = operating_characteristics(
            build_plan(with_power(config, power), "alternative", replicates=10_000))
        assert oc.mean_sized_py == pytest.approx(expected, rel=0.03), power
        results[power] = round(oc.mean_sized_py, 1)
    _report("3", f"NI mean sized PYs {results} within 3% over 10,000 replicates")


def test_criterion_4_empirical_operating_characteristics():
    start = time.perf_counter()
    base = named_scenario(MODERATE).config
    observed = {}

    accf = with_design(base, DESIGN_ACCF)
    oc_null = operating_characteristics(build_plan(accf, "null", 10_000))
    oc_alt = operating_characteristics(build_plan(accf, "alternative", 10_000))
    assert 0.016 <= oc_null.rejection_rate <= 0.026
    assert oc_alt.rejection_rate == pytest.approx(0.844, abs=0.015)
    observed["accf"] = (oc_null.rejection_rate, oc_alt.rejection_rate)

    cons = with_design(base, DESIGN_CONSERVATIVE_ACCF)
    oc_null = operating_characteristics(build_plan(cons, "null", 10_000))
    oc_alt = operating_characteristics(build_plan(cons, "alternative", 10_000))
    assert oc_null.rejection_rate <= 0.006
    assert oc_alt.rejection_rate == pytest.approx(0.822, abs=0.015)
    observed["cons"] = (oc_null.rejection_rate, oc_alt.rejection_rate)

    ni = with_design(base, DESIGN_NI)
    oc_null = operating_characteristics(build_plan(ni, "null", 10_000))
    oc_alt = operating_characteristics(build_plan(ni, "alternative", 10_000))
    assert oc_null.rejection_rate <= 0.006
    assert oc_alt.rejection_rate == pytest.approx(0.801, abs=0.015)
    observed["ni"] = (oc_null.rejection_rate, oc_alt.rejection_rate)

    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    _report("4", f"(type1, power) at 10,000 replicates: {observed} in {elapsed:.1f}s")


def test_criterion_5_analytic_formulas():
    # NI-vs-RAE curve: minimum and limits.
    assert analytic_type1_ni_rae(1.0) == pytest.approx(0.0028, abs=1e-4)
    xs = np.logspace(-4, 4, 201)
    assert min(analytic_type1_ni_rae(float(x)) for x in xs) == pytest.approx(
        analytic_type1_ni_rae(1.0), abs=1e-12)
    assert analytic_type1_ni_rae(1e-10) == pytest.approx(0.025, abs=1e-4)
    assert analytic_type1_ni_rae(1e10) == pytest.approx(0.025, abs=1e-4)

    # Conservative two-step bound: never above alpha on the 50x50 grid.
    axis = np.geomspace(0.05, 20.0, 50)
    worst = max(analytic_type1_conservative_accf(float(a), float(b), 0.5)
                for a in axis for b in axis)
    assert worst <= 0.025 + 1e-12

    # Analytic power returns the target at the benchmark external-source
    # sizes (the recency sizes depend on assay-parameter standard errors
    # that are package defaults, so they are covered by criterion 9).
    for design, spec, n, target in [
        (DESIGN_ACCF, SPEC08, 4942, 0.8),
        (DESIGN_ACCF, SPEC09, 6554, 0.9),
        (DESIGN_CONSERVATIVE_ACCF, SPEC08, 8205, 0.8),
        (DESIGN_CONSERVATIVE_ACCF, SPEC09, 10938, 0.9),
    ]:
        assert analytic_power(design, spec, MOD_SCENARIO, EXT, n) == pytest.approx(
            target, abs=0.01), (design, n)
    assert analytic_power(DESIGN_SINGLE_ARM, SPEC08, MOD_SCENARIO, EXT, 2398,
                          gamma_e_null=0.5 * LOG22,
                          gamma_e_alt=1.36 * LOG22) == pytest.approx(0.8, abs=0.01)

    # And at this package's own solved sizes it meets the target exactly
    # (within the one-PY rounding of the solver).
    for design, sizer in [(DESIGN_ACCF, size_accf),
                          (DESIGN_CONSERVATIVE_ACCF, size_conservative_accf)]:
        for spec in (SPEC08, SPEC09):
            n = sizer(spec, MOD_SCENARIO, EXT).total_py
            power = analytic_power(design, spec, MOD_SCENARIO, EXT, n)
            assert spec.target_power <= power <= spec.target_power + 0.001

    _report("5", f"curve min {analytic_type1_ni_rae(1.0):.5f}, surface max {worst:.5f}, "
                 "benchmark sizes return target power within 0.01")


def test_criterion_6_screening_arithmetic():
    rows = [
        (5432.0, 1.0, 6391, 959, 70),
        (6668.0, 2.0, 3922, 588, 43),
        (6868.0, 1.0, 8080, 1212, 88),
        (8396.0, 2.0, 4939, 741, 54),
        (8266.0, 1.0, 9725, 1459, 106),
        (10468.0, 2.0, 6158, 924, 67),
        (10132.0, 1.0, 11920, 1788, 130),
        (12780.0, 2.0, 7518, 1128, 82),
    ]
    assay = default_recency_assay()
    for trial_py, tau, screened, hiv_pos, recent in rows:
        counts = screening_counts(trial_py, tau, assay, 0.03)
        assert counts.n_screened == screened, trial_py
        assert counts.n_hiv_pos == hiv_pos, trial_py
        assert abs(counts.expected_recent - recent) <= 1.0, trial_py
    _report("6", f"all {len(rows)} screening rows exact (recents within 1)")


def test_criterion_7_robustness_thresholds(tmp_path):
    start = time.perf_counter()
    report = reproduce("fig1", tmp_path, threads=4)
    elapsed = time.perf_counter() - start
    by_name = {c.name: c for c in report.checks}
    ni = by_name["ni_protected_at_efficacy_threshold"]
    cons = by_name["cons_protected_at_lambda_p_threshold"]
    accf = by_name["accf_inflates_when_placebo_overstated"]
    assert ni.passed, ni.observed
    assert cons.passed, cons.observed
    assert accf.passed, accf.observed
    assert elapsed < 1200.0
    _report("7", f"21x21 grid at 2,000 reps/cell in {elapsed:.1f}s: NI excess "
                 f"{ni.observed:.4f}, conservative excess {cons.observed:.4f}, "
                 f"AC-CF peak inflation {accf.observed:.3f}")


def _random_datasets(n: int, seed: int):
    """Vectorised draws for the randomized differential properties."""
    rng = derive_stream(seed, 77)
    lam_p = rng.uniform(0.005, 0.08, n)
    cf_events = np.maximum(rng.poisson(lam_p * 1805.0), 1)
    py = rng.uniform(1000.0, 12000.0, n)
    lam_a = lam_p / rng.uniform(1.0, 4.0, n)
    lam_e = lam_p * rng.uniform(0.2, 1.2, n)
    ev_e = rng.poisson(lam_e * py / 2)
    ev_a = rng.poisson(lam_a * py / 2)
    for i in range(n):
        cf = LogIncidenceEstimate(math.log(cf_events[i] / 1805.0),
                                  1.0 / math.sqrt(cf_events[i]))
        yield (cf, ArmSummary(int(ev_e[i]), py[i] / 2), ArmSummary(int(ev_a[i]), py[i] / 2))


def test_criterion_8_property_suites():
    n = 100_000
    crit = 1.9599639845400545

    # Two-step rejection containment + conservative dominance.
    n_reject = n_cons_reject = 0
    for cf, trial_e, trial_a in _random_datasets(n, seed=808):
        plain = accf_two_step_test(cf, trial_e, trial_a, 0.5, 0.025)
        cons = conservative_accf_two_step_test(cf, trial_e, trial_a, 0.5, 0.025)
        if plain.reject:
            n_reject += 1
            assert plain.statistics["T_PA"] >= crit
            assert plain.statistics["T_CF"] >= crit
        if cons.reject:
            n_cons_reject += 1
            assert cons.statistics["T_PA"] >= crit
            assert cons.statistics["T_CF"] >= crit
            assert plain.reject, "conservative rejected where plain did not"
    assert 0 < n_cons_reject < n_reject < n

    # Sizing bisection equals the brute-force scan oracle (grid step 10)
    # on 20 random configurations.
    rng = np.random.default_rng(424242)
    for i in range(20):
        lam_p = rng.uniform(0.015, 0.06)
        scenario = IncidenceScenario(lam_p, lam_p / rng.uniform(1.6, 4.0))
        spec = RaeDesignSpec(rng.uniform(0.3, 0.7), rng.uniform(1.05, 1.6), 0.025,
                             float(rng.choice([0.8, 0.9])))
        constants = variance_constants(ExternalFollowUp(rng.uniform(1200, 5000)), lam_p, 1.0)
        design, sizer = ((DESIGN_ACCF, size_accf) if i % 2 == 0
                         else (DESIGN_CONSERVATIVE_ACCF, size_conservative_accf))
        solved = sizer(spec, scenario, constants).total_py
        scan = 10
        while analytic_power(design, spec, scenario, constants, scan) < spec.target_power:
            scan += 10
        assert abs(solved - scan) <= 10, (i, solved, scan)

    # Determinism under thread-count variation.
    plan = SimulationPlan(
        design_kind=DESIGN_ACCF, spec=SPEC08, truth=MOD_SCENARIO,
        hypothesis_state="alternative", n_replicates=12_000, seed=555,
        cf_model=ExternalFollowUp(1805.0))
    assert operating_characteristics(plan, threads=1) == operating_characteristics(plan, threads=4)

    # Size ordering in the moderate setting.
    single = size_single_arm(SPEC08, MOD_SCENARIO, EXT, 0.5 * LOG22, 1.36 * LOG22).total_py
    accf = size_accf(SPEC08, MOD_SCENARIO, EXT).total_py
    cons = size_conservative_accf(SPEC08, MOD_SCENARIO, EXT).total_py
    ni_plan = SimulationPlan(
        design_kind=DESIGN_NI, spec=SPEC08, truth=MOD_SCENARIO,
        hypothesis_state="alternative", n_replicates=10_000, seed=20240601,
        historical=HistoricalTrial(0.05, 0.023, 3610.0), delta_alt=math.log(0.75))
    ni_mean = operating_characteristics(ni_plan).mean_sized_py
    assert single < accf < cons < ni_mean

    _report("8", f"containment and dominance on {n:,} datasets "
                 f"({n_reject:,} plain / {n_cons_reject:,} conservative rejections), "
                 f"bisection==scan on 20 configs, thread invariance, "
                 f"ordering {single} < {accf} < {cons} < {ni_mean:.0f}")


def test_criterion_9_documented_non_reproductions():
    # Recency-based sizes are checked only to within 10% under the
    # package's documented assay-parameter standard errors.
    base = named_scenario(MODERATE).config
    recency = replace(base, cf_model=default_recency_assay())
    observed = {}
    for power, tau, expected in [(0.8, 1.0, 5432), (0.8, 2.0, 6668),
                                 (0.9, 1.0, 6868), (0.9, 2.0, 8396)]:
        cfg = with_power(replace(recency, scenario=replace(recency.scenario, tau=tau)), power)
        total = size_for_config(cfg).total_py
        assert total == pytest.approx(expected, rel=0.10), (power, tau)
        observed[(power, tau)] = total
    for power, tau, expected in [(0.8, 1.0, 8266), (0.8, 2.0, 10468),
                                 (0.9, 1.0, 10132), (0.9, 2.0, 12780)]:
        cfg = with_design(with_power(
            replace(recency, scenario=replace(recency.scenario, tau=tau)), power),
            DESIGN_CONSERVATIVE_ACCF)
        total = size_for_config(cfg).total_py
        assert total == pytest.approx(expected, rel=0.10), (power, tau)
        observed[("cons", power, tau)] = total

    # The benchmark event column is never asserted: the package reports
    # its own documented convention instead.
    sized = size_accf(SPEC08, MOD_SCENARIO, EXT)
    lam_e_alt = math.exp(math.log(0.03) - 1.36 * LOG22)
    own_convention = sized.total_py * 0.5 * (lam_e_alt + 0.03 / 2.2)
    assert sized.expected_events == pytest.approx(own_convention, rel=1e-12)

    # The expectations file marks every event cell unreproducible.
    from cftrial.reproduce import _expectations
    stored = _expectations()
    event_cells = [c for t in ("table2", "table4") for c in stored[t]["checks"]
                   if c["name"].startswith("events_")]
    assert event_cells and all(c.get("unreproducible") for c in event_cells)

    _report("9", f"recency sizes within 10% {observed}; event counts reported "
                 "under the package convention only")
