"""Scenario configuration: TOML parsing, validation, and emission.

A scenario file is a TOML document (comments and nesting come for free)
with the sections below.  All rates are cases per person-year, durations
are years, and the non-inferiority alternative margin is given on the
rate-ratio scale (0.75 means the new agent cuts incidence 25% below the
active control) and converted to the log scale internally.

    design = "accf"          # ni | accf | conservative_accf | single_arm

    [hypothesis]
    gamma_null = 0.5         # preservation fraction under the null
    gamma_alt = 1.36         # fraction under the design alternative
    alpha = 0.025
    power = 0.8

    [scenario]
    lambda_p = 0.03
    lambda_a = 0.01363636
    allocation_e = 0.5       # optional, default 0.5
    tau = 1.0                # optional, default 1.0 (per-participant years)

    [cf_model]               # required unless design = "ni"
    kind = "external_follow_up"   # | recency_screening | fixed_variance
    follow_up_py = 1805.0
    # recency_screening keys: prevalence, mdri_years, frr, cutoff_years,
    #                         se_mdri, se_frr
    # fixed_variance keys:    c_p0, c_p1

    [historical]             # required for design = "ni"
    lambda_p0 = 0.05
    lambda_a0 = 0.023
    total_py = 3610.0

    [ni]                     # required for design = "ni"
    delta_alt_ratio = 0.75

    [single_arm]             # optional; defaults derive from gamma * effect
    gamma_e_null = 0.394
    gamma_e_alt = 1.072

    [simulation]             # optional
    seed = 20240601
    replicates = 10000
    hypothesis_state = "null"     # | "alternative"

    [grid]                   # required by the sweep command
    lambda_p_start = 0.018
    lambda_p_stop = 0.042
    lambda_p_points = 21
    lambda_a_start = 0.006
    lambda_a_stop = 0.03
    lambda_a_points = 21
    reps_per_cell = 2000

Unknown keys are rejected with their full path; every module invariant is
re-validated on load.  :func:`emit_config` writes a document that parses
back to an identical configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml

from .cfmodels import CfPlaceboModel, ExternalFollowUp, FixedVariance, RecencyScreening
from .errors import ConfigError, InvalidInputError
from .mc import HYPOTHESIS_ALTERNATIVE, HYPOTHESIS_NULL, HistoricalTrial
from .procedures import RaeDesignSpec
from .sizing import DESIGN_KINDS, DESIGN_NI, IncidenceScenario

DEFAULT_SEED = 20240601
DEFAULT_REPLICATES = 10_000

CF_EXTERNAL = "external_follow_up"
CF_RECENCY = "recency_screening"
CF_FIXED = "fixed_variance"
CF_KINDS = (CF_EXTERNAL, CF_RECENCY, CF_FIXED)


@dataclass(frozen=True)
class GridSpec:
    """Sweep grid: inclusive linear ranges for both incidence axes."""

    lambda_p_start: float
    lambda_p_stop: float
    lambda_p_points: int
    lambda_a_start: float
    lambda_a_stop: float
    lambda_a_points: int
    reps_per_cell: int

    def __post_init__(self):
        for name in ("lambda_p", "lambda_a"):
            start = getattr(self, f"{name}_start")
            stop = getattr(self, f"{name}_stop")
            points = getattr(self, f"{name}_points")
            if not (0 < start <= stop):
                raise InvalidInputError(f"{name} range must satisfy 0 < start <= stop")
            if points < 1:
                raise InvalidInputError(f"{name}_points must be at least 1")
        if self.reps_per_cell < 1:
            raise InvalidInputError("reps_per_cell must be at least 1")

    @staticmethod
    def _values(start: float, stop: float, points: int) -> list[float]:
        if points == 1:
            return [start]
        step = (stop - start) / (points - 1)
        return [start + i * step for i in range(points)]

    def lambda_p_values(self) -> list[float]:
        return self._values(self.lambda_p_start, self.lambda_p_stop, self.lambda_p_points)

    def lambda_a_values(self) -> list[float]:
        return self._values(self.lambda_a_start, self.lambda_a_stop, self.lambda_a_points)


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario ready to feed the library."""

    design_kind: str
    spec: RaeDesignSpec
    scenario: IncidenceScenario
    cf_model: CfPlaceboModel | None = None
    historical: HistoricalTrial | None = None
    delta_alt_ratio: float | None = None
    gamma_e_null: float | None = None
    gamma_e_alt: float | None = None
    seed: int = DEFAULT_SEED
    replicates: int = DEFAULT_REPLICATES
    hypothesis_state: str = HYPOTHESIS_NULL
    grid: GridSpec | None = None

    @property
    def delta_alt_log(self) -> float | None:
        if self.delta_alt_ratio is None:
            return None
        return math.log(self.delta_alt_ratio)


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError("required field is missing", f"{path}.{key}")
    return table[key]


def _check_unknown(table: dict, known: set[str], path: str):
    for key in table:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", path)


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    return value


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", path)
    return value


def _parse_cf_model(table: dict) -> CfPlaceboModel:
    kind = _string(_require(table, "kind", "cf_model"), "cf_model.kind")
    if kind == CF_EXTERNAL:
        _check_unknown(table, {"kind", "follow_up_py"}, "cf_model")
        return ExternalFollowUp(
            follow_up_py=_number(_require(table, "follow_up_py", "cf_model"), "cf_model.follow_up_py"))
    if kind == CF_RECENCY:
        known = {"kind", "prevalence", "mdri_years", "frr", "cutoff_years", "se_mdri", "se_frr"}
        _check_unknown(table, known, "cf_model")
        return RecencyScreening(
            prevalence_p=_number(_require(table, "prevalence", "cf_model"), "cf_model.prevalence"),
            mdri_omega_t=_number(_require(table, "mdri_years", "cf_model"), "cf_model.mdri_years"),
            frr_beta_t=_number(_require(table, "frr", "cf_model"), "cf_model.frr"),
            cutoff_t=_number(_require(table, "cutoff_years", "cf_model"), "cf_model.cutoff_years"),
            se_mdri=_number(_require(table, "se_mdri", "cf_model"), "cf_model.se_mdri"),
            se_frr=_number(_require(table, "se_frr", "cf_model"), "cf_model.se_frr"),
        )
    if kind == CF_FIXED:
        _check_unknown(table, {"kind", "c_p0", "c_p1"}, "cf_model")
        return FixedVariance(
            c_p0=_number(_require(table, "c_p0", "cf_model"), "cf_model.c_p0"),
            c_p1=_number(_require(table, "c_p1", "cf_model"), "cf_model.c_p1"),
        )
    raise ConfigError(f"must be one of {CF_KINDS}, got {kind!r}", "cf_model.kind")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document; errors carry field paths."""
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"not valid TOML: {exc}") from None

    known_sections = {"design", "hypothesis", "scenario", "cf_model", "historical",
                      "ni", "single_arm", "simulation", "grid"}
    _check_unknown(raw, known_sections, "(top level)")

    design = _string(_require(raw, "design", "(top level)"), "design")
    if design not in DESIGN_KINDS:
        raise ConfigError(f"must be one of {DESIGN_KINDS}, got {design!r}", "design")

    hyp = _require(raw, "hypothesis", "(top level)")
    _check_unknown(hyp, {"gamma_null", "gamma_alt", "alpha", "power"}, "hypothesis")
    try:
        spec = RaeDesignSpec(
            gamma_null=_number(_require(hyp, "gamma_null", "hypothesis"), "hypothesis.gamma_null"),
            gamma_alt=_number(_require(hyp, "gamma_alt", "hypothesis"), "hypothesis.gamma_alt"),
            alpha=_number(_require(hyp, "alpha", "hypothesis"), "hypothesis.alpha"),
            target_power=_number(_require(hyp, "power", "hypothesis"), "hypothesis.power"),
        )
    except InvalidInputError as exc:
        raise ConfigError(str(exc), "hypothesis") from None

    sc = _require(raw, "scenario", "(top level)")
    _check_unknown(sc, {"lambda_p", "lambda_a", "allocation_e", "tau"}, "scenario")
    try:
        scenario = IncidenceScenario(
            lambda_p=_number(_require(sc, "lambda_p", "scenario"), "scenario.lambda_p"),
            lambda_a=_number(_require(sc, "lambda_a", "scenario"), "scenario.lambda_a"),
            allocation_e=_number(sc.get("allocation_e", 0.5), "scenario.allocation_e"),
            tau=_number(sc.get("tau", 1.0), "scenario.tau"),
        )
    except InvalidInputError as exc:
        raise ConfigError(str(exc), "scenario") from None

    cf_model = None
    if design != DESIGN_NI:
        if "cf_model" not in raw:
            raise ConfigError(f"design {design!r} needs a [cf_model] section", "cf_model")
    if "cf_model" in raw:
        try:
            cf_model = _parse_cf_model(raw["cf_model"])
        except InvalidInputError as exc:
            raise ConfigError(str(exc), "cf_model") from None

    historical = None
    if "historical" in raw:
        h = raw["historical"]
        _check_unknown(h, {"lambda_p0", "lambda_a0", "total_py"}, "historical")
        try:
            historical = HistoricalTrial(
                lambda_p0=_number(_require(h, "lambda_p0", "historical"), "historical.lambda_p0"),
                lambda_a0=_number(_require(h, "lambda_a0", "historical"), "historical.lambda_a0"),
                total_py=_number(_require(h, "total_py", "historical"), "historical.total_py"),
            )
        except InvalidInputError as exc:
            raise ConfigError(str(exc), "historical") from None

    delta_alt_ratio = None
    if "ni" in raw:
        _check_unknown(raw["ni"], {"delta_alt_ratio"}, "ni")
        delta_alt_ratio = _number(
            _require(raw["ni"], "delta_alt_ratio", "ni"), "ni.delta_alt_ratio")
        if not (0.0 < delta_alt_ratio <= 1.0):
            raise ConfigError(
                f"must be a rate ratio in (0, 1], got {delta_alt_ratio}", "ni.delta_alt_ratio")
    if design == DESIGN_NI:
        if historical is None:
            raise ConfigError("design 'ni' needs a [historical] section", "historical")
        if delta_alt_ratio is None:
            raise ConfigError("design 'ni' needs [ni].delta_alt_ratio", "ni")

    gamma_e_null = gamma_e_alt = None
    if "single_arm" in raw:
        sa = raw["single_arm"]
        _check_unknown(sa, {"gamma_e_null", "gamma_e_alt"}, "single_arm")
        if "gamma_e_null" in sa:
            gamma_e_null = _number(sa["gamma_e_null"], "single_arm.gamma_e_null")
        if "gamma_e_alt" in sa:
            gamma_e_alt = _number(sa["gamma_e_alt"], "single_arm.gamma_e_alt")
        if gamma_e_null is not None and gamma_e_alt is not None and gamma_e_alt <= gamma_e_null:
            raise ConfigError("gamma_e_alt must exceed gamma_e_null", "single_arm")

    seed, replicates, state = DEFAULT_SEED, DEFAULT_REPLICATES, HYPOTHESIS_NULL
    if "simulation" in raw:
        sim = raw["simulation"]
        _check_unknown(sim, {"seed", "replicates", "hypothesis_state"}, "simulation")
        if "seed" in sim:
            seed = _integer(sim["seed"], "simulation.seed")
        if "replicates" in sim:
            replicates = _integer(sim["replicates"], "simulation.replicates")
            if replicates < 1:
                raise ConfigError("must be at least 1", "simulation.replicates")
        if "hypothesis_state" in sim:
            state = _string(sim["hypothesis_state"], "simulation.hypothesis_state")
            if state not in (HYPOTHESIS_NULL, HYPOTHESIS_ALTERNATIVE):
                raise ConfigError(
                    f"must be 'null' or 'alternative', got {state!r}", "simulation.hypothesis_state")

    grid = None
    if "grid" in raw:
        g = raw["grid"]
        known = {"lambda_p_start", "lambda_p_stop", "lambda_p_points",
                 "lambda_a_start", "lambda_a_stop", "lambda_a_points", "reps_per_cell"}
        _check_unknown(g, known, "grid")
        try:
            grid = GridSpec(
                lambda_p_start=_number(_require(g, "lambda_p_start", "grid"), "grid.lambda_p_start"),
                lambda_p_stop=_number(_require(g, "lambda_p_stop", "grid"), "grid.lambda_p_stop"),
                lambda_p_points=_integer(_require(g, "lambda_p_points", "grid"), "grid.lambda_p_points"),
                lambda_a_start=_number(_require(g, "lambda_a_start", "grid"), "grid.lambda_a_start"),
                lambda_a_stop=_number(_require(g, "lambda_a_stop", "grid"), "grid.lambda_a_stop"),
                lambda_a_points=_integer(_require(g, "lambda_a_points", "grid"), "grid.lambda_a_points"),
                reps_per_cell=_integer(_require(g, "reps_per_cell", "grid"), "grid.reps_per_cell"),
            )
        except InvalidInputError as exc:
            raise ConfigError(str(exc), "grid") from None

    return ScenarioConfig(
        design_kind=design,
        spec=spec,
        scenario=scenario,
        cf_model=cf_model,
        historical=historical,
        delta_alt_ratio=delta_alt_ratio,
        gamma_e_null=gamma_e_null,
        gamma_e_alt=gamma_e_alt,
        seed=seed,
        replicates=replicates,
        hypothesis_state=state,
        grid=grid,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise InvalidInputError(f"cannot emit TOML value {value!r}")


def emit_config(config: ScenarioConfig) -> str:
    """Render a configuration back to TOML; parse(emit(c)) == c."""
    lines = [f"design = {_toml_value(config.design_kind)}", ""]

    def section(name: str, items: dict):
        entries = {k: v for k, v in items.items() if v is not None}
        if not entries:
            return
        lines.append(f"[{name}]")
        for key, value in entries.items():
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")

    section("hypothesis", {
        "gamma_null": config.spec.gamma_null,
        "gamma_alt": config.spec.gamma_alt,
        "alpha": config.spec.alpha,
        "power": config.spec.target_power,
    })
    section("scenario", {
        "lambda_p": config.scenario.lambda_p,
        "lambda_a": config.scenario.lambda_a,
        "allocation_e": config.scenario.allocation_e,
        "tau": config.scenario.tau,
    })
    model = config.cf_model
    if isinstance(model, ExternalFollowUp):
        section("cf_model", {"kind": CF_EXTERNAL, "follow_up_py": model.follow_up_py})
    elif isinstance(model, RecencyScreening):
        section("cf_model", {
            "kind": CF_RECENCY,
            "prevalence": model.prevalence_p,
            "mdri_years": model.mdri_omega_t,
            "frr": model.frr_beta_t,
            "cutoff_years": model.cutoff_t,
            "se_mdri": model.se_mdri,
            "se_frr": model.se_frr,
        })
    elif isinstance(model, FixedVariance):
        section("cf_model", {"kind": CF_FIXED, "c_p0": model.c_p0, "c_p1": model.c_p1})
    if config.historical is not None:
        section("historical", {
            "lambda_p0": config.historical.lambda_p0,
            "lambda_a0": config.historical.lambda_a0,
            "total_py": config.historical.total_py,
        })
    if config.delta_alt_ratio is not None:
        section("ni", {"delta_alt_ratio": config.delta_alt_ratio})
    section("single_arm", {"gamma_e_null": config.gamma_e_null, "gamma_e_alt": config.gamma_e_alt})
    section("simulation", {
        "seed": config.seed,
        "replicates": config.replicates,
        "hypothesis_state": config.hypothesis_state,
    })
    if config.grid is not None:
        section("grid", {
            "lambda_p_start": config.grid.lambda_p_start,
            "lambda_p_stop": config.grid.lambda_p_stop,
            "lambda_p_points": config.grid.lambda_p_points,
            "lambda_a_start": config.grid.lambda_a_start,
            "lambda_a_stop": config.grid.lambda_a_stop,
            "lambda_a_points": config.grid.lambda_a_points,
            "reps_per_cell": config.grid.reps_per_cell,
        })
    return "\n".join(lines)
