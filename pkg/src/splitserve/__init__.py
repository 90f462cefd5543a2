"""Cost optimization and deterministic trace replay for SLO-aware
multi-stage inference split across VM and serverless pools."""

__version__ = "0.1.0"

from .balancer import EpochRouting, route_epoch
from .configurator import (
    CandidateEvaluation,
    CandidateOption,
    Crossing,
    DeploymentPlan,
    SweepAxis,
    SweepContext,
    SweepPoint,
    SweepResult,
    candidate_cost,
    evaluate_candidates,
    find_t_cip,
    load_plan,
    select_plan,
    slo_feasible,
    sweep,
    t_cip_or_default,
    worst_case_seconds,
)
from .costmodel import (
    CostBreakdown,
    Setup,
    cost_faas_only,
    cost_hybrid,
    cost_iaas_only,
    serverless_seconds_per_request,
    vm_packing,
)
from .errors import (
    ConfigKindError,
    InfeasibleError,
    InputError,
    ProfileShapeError,
    SplitServeError,
)
from .pricing import (
    PlatformConfig,
    PlatformKind,
    PricingCatalog,
    default_catalog,
    load_catalog,
    serverless_exec_cost,
    vm_epoch_cost,
)
from .profiles import (
    ExitDistribution,
    PartitionProfile,
    StagedModelProfile,
    expected_runtime,
    load_distribution,
    load_distribution_family,
    load_profile,
    propagate_rates,
)
from .simengine import (
    PoolComparison,
    SimParams,
    SimReport,
    TrafficTrace,
    compare_pools,
    load_trace,
    replay,
    save_trace,
    split_exit_counts,
)
from .traffic import MonitorState, ScaleDecision, scale_target

__all__ = [
    "CandidateEvaluation",
    "CandidateOption",
    "ConfigKindError",
    "CostBreakdown",
    "Crossing",
    "DeploymentPlan",
    "EpochRouting",
    "ExitDistribution",
    "InfeasibleError",
    "InputError",
    "MonitorState",
    "PartitionProfile",
    "PlatformConfig",
    "PlatformKind",
    "PoolComparison",
    "PricingCatalog",
    "ProfileShapeError",
    "ScaleDecision",
    "Setup",
    "SimParams",
    "SimReport",
    "SplitServeError",
    "StagedModelProfile",
    "SweepAxis",
    "SweepContext",
    "SweepPoint",
    "SweepResult",
    "TrafficTrace",
    "candidate_cost",
    "compare_pools",
    "cost_faas_only",
    "cost_hybrid",
    "cost_iaas_only",
    "default_catalog",
    "evaluate_candidates",
    "expected_runtime",
    "find_t_cip",
    "load_catalog",
    "load_distribution",
    "load_distribution_family",
    "load_plan",
    "load_profile",
    "load_trace",
    "propagate_rates",
    "replay",
    "route_epoch",
    "save_trace",
    "select_plan",
    "serverless_exec_cost",
    "serverless_seconds_per_request",
    "slo_feasible",
    "split_exit_counts",
    "sweep",
    "scale_target",
    "t_cip_or_default",
    "vm_epoch_cost",
    "vm_packing",
    "worst_case_seconds",
]
