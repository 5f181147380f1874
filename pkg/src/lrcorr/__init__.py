"""Correlation between log-rank test statistics for multiple time-to-event
endpoints, estimated from subject-level data through an iid decomposition,
with conjunctive-power and hierarchical-testing-order tools built on top.
"""

from .errors import (
    BadThetaError,
    DatasetError,
    DomainError,
    EmptyArmError,
    InsufficientEventsError,
    NegativeTimeError,
    NoEventsError,
    NotPSDError,
    RaggedEndpointsError,
    UnknownStatusError,
    ZeroDenominatorError,
    ZeroVarianceError,
)
from .survival import (
    EndpointTimeline,
    StepFunction,
    SubjectRecord,
    TrialDataset,
    build_timeline,
    logrank_numerator,
    logrank_z,
    nelson_aalen,
    validate_dataset,
)
from .influence import (
    CorrelationMatrix,
    InfluenceMatrix,
    correlation_matrix,
    expected_numerator,
    influence_column,
    influence_matrix,
)
from .mvn import (
    MvnProblem,
    ProbabilityEstimate,
    mvn_probability,
    psd_repair,
    std_normal_cdf,
    std_normal_quantile,
)
from .power import (
    EndpointPlan,
    HierarchyResult,
    PowerSpec,
    conjunctive_power,
    delta_from_hr,
    events_for_power,
    marginal_power,
    optimize_hierarchy,
    sensitivity_sweep,
)
from .copulas import COPULAS, sample_copula
from .simulate import (
    ScenarioConfig,
    StudyResult,
    inv_piecewise_exp,
    run_study,
    simulate_trial,
)

__version__ = "0.1.0"

__all__ = [
    "BadThetaError",
    "COPULAS",
    "CorrelationMatrix",
    "DatasetError",
    "DomainError",
    "EmptyArmError",
    "EndpointPlan",
    "EndpointTimeline",
    "HierarchyResult",
    "InfluenceMatrix",
    "InsufficientEventsError",
    "MvnProblem",
    "NegativeTimeError",
    "NoEventsError",
    "NotPSDError",
    "PowerSpec",
    "ProbabilityEstimate",
    "RaggedEndpointsError",
    "ScenarioConfig",
    "StepFunction",
    "StudyResult",
    "SubjectRecord",
    "TrialDataset",
    "UnknownStatusError",
    "ZeroDenominatorError",
    "ZeroVarianceError",
    "build_timeline",
    "conjunctive_power",
    "correlation_matrix",
    "delta_from_hr",
    "events_for_power",
    "expected_numerator",
    "influence_column",
    "influence_matrix",
    "inv_piecewise_exp",
    "logrank_numerator",
    "logrank_z",
    "marginal_power",
    "mvn_probability",
    "nelson_aalen",
    "optimize_hierarchy",
    "psd_repair",
    "run_study",
    "sample_copula",
    "sensitivity_sweep",
    "simulate_trial",
    "std_normal_cdf",
    "std_normal_quantile",
    "validate_dataset",
]
