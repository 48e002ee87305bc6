"""Command-line interface.

Five commands, each a thin composition of library calls:

    cftrial size      --scenario moderate-efficacy --design accf
    cftrial analyze   --scenario moderate-efficacy --which ni-rae-type1
    cftrial simulate  --scenario moderate-efficacy --state alternative
    cftrial sweep     --scenario moderate-efficacy --design ni
    cftrial reproduce table2 --out runs

Exit codes: 0 success, 1 validation error, 2 infeasible design,
3 reproduction mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .cfmodels import ExternalFollowUp, RecencyScreening, screening_counts, variance_constants
from .config import ScenarioConfig, load_config
from .errors import CftrialError, ConfigError, InfeasibleDesignError, InfeasibleScenarioError
from .mc import ni_margin_summary, ni_mean_sized_py, operating_characteristics, sweep_grid
from .reporting import (
    CURVE_HEADER,
    SIZING_HEADER,
    SWEEP_HEADER,
    oc_rows,
    render_csv,
    render_table,
    sizing_row,
    sweep_rows,
    write_csv,
)
from .reproduce import TARGETS, reproduce
from .scenarios import (
    SCENARIO_NAMES,
    build_plan,
    default_recency_assay,
    named_scenario,
    size_for_config,
    with_design,
    with_power,
)
from .sizing import (
    DESIGN_KINDS,
    DESIGN_NI,
    SizingResult,
    analytic_power,
    analytic_type1_conservative_accf,
    analytic_type1_ni_rae,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_MISMATCH = 3


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--scenario", choices=SCENARIO_NAMES, help="built-in scenario")
    parser.add_argument("--config", type=Path, help="scenario TOML file")
    parser.add_argument("--design", choices=DESIGN_KINDS, help="override the design kind")
    parser.add_argument("--power", type=float, help="override the target power")
    parser.add_argument("--cf", choices=("external", "recency"),
                        help="switch the counterfactual source to a bundled default")
    parser.add_argument("--tau", type=float, help="override per-participant follow-up years")
    parser.add_argument("--state", choices=("null", "alternative"),
                        help="override the hypothesis state")
    parser.add_argument("--seed", type=int, help="override the root seed")
    parser.add_argument("--replicates", type=int, help="override the replicate count")
    parser.add_argument("--threads", type=int, default=1, help="engine parallelism cap")
    parser.add_argument("--out", type=Path, help="directory for output files")
    parser.add_argument("--format", choices=("table", "csv"), default="table",
                        help="stdout rendering")


def _resolve_config(args) -> ScenarioConfig:
    if args.config is not None and args.scenario is not None:
        raise ConfigError("give either --scenario or --config, not both")
    if args.config is not None:
        config = load_config(args.config)
    elif args.scenario is not None:
        config = named_scenario(args.scenario).config
    else:
        raise ConfigError("one of --scenario or --config is required")
    if args.design:
        config = with_design(config, args.design)
    if args.power is not None:
        config = with_power(config, args.power)
    if args.cf == "recency":
        config = replace(config, cf_model=default_recency_assay())
    elif args.cf == "external":
        config = replace(config, cf_model=ExternalFollowUp(follow_up_py=1805.0))
    if args.tau is not None:
        config = replace(config, scenario=replace(config.scenario, tau=args.tau))
    if args.state:
        config = replace(config, hypothesis_state=args.state)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.replicates is not None:
        if args.replicates < 1:
            raise ConfigError("must be at least 1", "replicates")
        config = replace(config, replicates=args.replicates)
    return config


def _emit(args, headers: list[str], rows: list[list], filename: str):
    if args.format == "csv":
        sys.stdout.write(render_csv(headers, rows))
    else:
        print(render_table(headers, rows))
    if args.out is not None:
        path = write_csv(args.out / filename, headers, rows)
        print(f"wrote {path}", file=sys.stderr)


def _size_config(config: ScenarioConfig) -> SizingResult:
    if config.design_kind != DESIGN_NI:
        result = size_for_config(config)
        if isinstance(config.cf_model, RecencyScreening):
            counts = screening_counts(result.total_py, config.scenario.tau,
                                      config.cf_model, config.scenario.lambda_p)
            result.auxiliary.update(
                n_screened=counts.n_screened,
                n_hiv_pos=counts.n_hiv_pos,
                expected_recent=counts.expected_recent,
            )
        return result
    plan = build_plan(config, replicates=1)
    mean_py = ni_mean_sized_py(plan)
    lam_e_alt = config.scenario.lambda_a * config.delta_alt_ratio
    a = config.scenario.allocation_e
    return SizingResult(
        total_py=round(mean_py),
        expected_events=mean_py * (a * lam_e_alt + (1 - a) * config.scenario.lambda_a),
        auxiliary={"mean_sized_py": mean_py, "sizing": "mean over simulated historical trials"},
    )


def cmd_size(args) -> int:
    config = _resolve_config(args)
    result = _size_config(config)
    _emit(args, SIZING_HEADER, [sizing_row(config.design_kind, result)], "size.csv")
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = _resolve_config(args)
    if args.which == "ni-rae-type1":
        xs = [10.0 ** (-3.0 + 6.0 * i / 120.0) for i in range(121)]
        rows = [[x, analytic_type1_ni_rae(x, config.spec.alpha)] for x in xs]
        _emit(args, CURVE_HEADER, rows, "ni_rae_type1_curve.csv")
    elif args.which == "conservative-type1":
        axis = [0.05 * (20.0 / 0.05) ** (i / 49.0) for i in range(50)]
        rows = [[r_ap, r_ea,
                 analytic_type1_conservative_accf(r_ap, r_ea, config.spec.gamma_null,
                                                  config.spec.alpha)]
                for r_ap in axis for r_ea in axis]
        _emit(args, ["r_AP", "r_EA", "value"], rows, "conservative_type1_surface.csv")
    else:  # power
        total_py = (args.total_py if args.total_py is not None
                    else _size_config(config).total_py)
        constants = None
        kwargs = {}
        if config.design_kind == DESIGN_NI:
            # Evaluate at the mean margin over simulated historical trials.
            mean_margin, _ = ni_margin_summary(build_plan(config, replicates=1))
            kwargs["delta"] = mean_margin
            kwargs["delta_alt"] = config.delta_alt_log
        else:
            constants = variance_constants(config.cf_model, config.scenario.lambda_p,
                                           config.scenario.tau)
            kwargs["gamma_e_null"] = config.gamma_e_null
            kwargs["gamma_e_alt"] = config.gamma_e_alt
        value = analytic_power(config.design_kind, config.spec, config.scenario,
                               constants, total_py, **kwargs)
        _emit(args, ["design", "total_py", "analytic_power"],
              [[config.design_kind, total_py, value]], "analytic_power.csv")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _resolve_config(args)
    plan = build_plan(config)
    start = time.perf_counter()
    oc = operating_characteristics(plan, threads=args.threads)
    elapsed = time.perf_counter() - start
    rows = oc_rows(oc) + [["seed", plan.seed], ["hypothesis_state", plan.hypothesis_state],
                          ["runtime_seconds", round(elapsed, 3)]]
    _emit(args, ["quantity", "value"], rows, "simulate.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _resolve_config(args)
    if config.grid is None:
        raise ConfigError("sweep needs a [grid] section in the scenario", "grid")
    plan = build_plan(config)
    reps = args.replicates if args.replicates is not None else config.grid.reps_per_cell
    cells = sweep_grid(plan, config.grid.lambda_p_values(), config.grid.lambda_a_values(),
                       reps, threads=args.threads)
    _emit(args, SWEEP_HEADER, sweep_rows(cells), "sweep.csv")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    out_dir = args.out if args.out is not None else Path("reproduction")
    report = reproduce(args.target, out_dir, replicates=args.replicates,
                       threads=args.threads, seed=args.seed,
                       reps_per_cell=args.reps_per_cell)
    for check in report.checks:
        status = "pass" if check.passed else ("reported" if check.unreproducible else "FAIL")
        print(f"[{status:8s}] {check.name}: observed {check.observed:.6g} "
              f"(requirement: {check.requirement})")
    for path in report.files:
        print(f"wrote {path}", file=sys.stderr)
    if not report.ok:
        print(f"{args.target}: reproduction mismatch", file=sys.stderr)
        return EXIT_MISMATCH
    print(f"{args.target}: all comparable cells within tolerance")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cftrial",
        description="Design and evaluate HIV-prevention trials with a "
                    "counterfactual placebo incidence estimate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_size = sub.add_parser("size", help="solve the trial size for a scenario")
    _add_common_flags(p_size)
    p_size.set_defaults(func=cmd_size)

    p_analyze = sub.add_parser("analyze", help="analytic operating characteristics")
    _add_common_flags(p_analyze)
    p_analyze.add_argument("--which",
                           choices=("ni-rae-type1", "conservative-type1", "power"),
                           default="power")
    p_analyze.add_argument("--total-py", type=float,
                           help="evaluate analytic power at this trial size")
    p_analyze.set_defaults(func=cmd_analyze)

    p_sim = sub.add_parser("simulate", help="empirical operating characteristics")
    _add_common_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="assumption-violation grid sweep")
    _add_common_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="rebuild a benchmark table or figure dataset")
    p_rep.add_argument("target", choices=TARGETS)
    p_rep.add_argument("--seed", type=int)
    p_rep.add_argument("--replicates", type=int)
    p_rep.add_argument("--reps-per-cell", type=int)
    p_rep.add_argument("--threads", type=int, default=1)
    p_rep.add_argument("--out", type=Path)
    p_rep.add_argument("--format", choices=("table", "csv"), default="table")
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (InfeasibleDesignError, InfeasibleScenarioError) as exc:
        print(f"infeasible design: {exc}", file=sys.stderr)
        limiting = getattr(exc, "limiting_power", None)
        if limiting is not None:
            print(f"limiting power: {limiting:.4f}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CftrialError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
