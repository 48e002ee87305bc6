"""Design toolkit for active-controlled HIV-prevention trials augmented
with a counterfactual placebo incidence estimate.

The package sizes trials, runs the associated hypothesis-testing
procedures, evaluates analytic and empirical operating characteristics,
and rebuilds the bundled benchmark tables and robustness figure datasets.
"""

from .config import (
    GridSpec,
    ScenarioConfig,
    emit_config,
    load_config,
    parse_config,
)
from .scenarios import (
    NamedScenario,
    build_plan,
    default_recency_assay,
    named_scenario,
    size_for_config,
    with_design,
    with_power,
)
from .reproduce import ReproductionReport, reproduce
from .cfmodels import (
    CfPlaceboModel,
    ExternalFollowUp,
    FixedVariance,
    RecencyScreening,
    ScreeningCounts,
    VarianceConstants,
    recency_prob_recent,
    screening_counts,
    simulate_cf_estimate,
    variance_constants,
)
from .errors import (
    CftrialError,
    ConfigError,
    DomainError,
    InfeasibleDesignError,
    InfeasibleScenarioError,
    InvalidInputError,
)
from .mc import (
    HistoricalTrial,
    OperatingCharacteristics,
    SimulationPlan,
    SweepCell,
    ni_margin_summary,
    ni_mean_sized_py,
    operating_characteristics,
    run_replicate,
    sweep_grid,
)
from .procedures import (
    RaeDesignSpec,
    TestOutcome,
    accf_two_step_test,
    conservative_accf_two_step_test,
    has_margin,
    ni_margin_95_95,
    ni_test,
    single_arm_test,
)
from .sizing import (
    DESIGN_ACCF,
    DESIGN_CONSERVATIVE_ACCF,
    DESIGN_KINDS,
    DESIGN_NI,
    DESIGN_SINGLE_ARM,
    IncidenceScenario,
    SizingResult,
    analytic_power,
    analytic_type1_conservative_accf,
    analytic_type1_ni_rae,
    lambda_e_at_gamma,
    size_accf,
    size_conservative_accf,
    size_ni,
    size_single_arm,
    variance_coefficients,
)
from .statcore import (
    ArmSummary,
    LogIncidenceEstimate,
    derive_stream,
    estimate_log_incidence,
    normal_cdf,
    normal_quantile,
    poisson_draw,
)

__version__ = "0.1.0"
