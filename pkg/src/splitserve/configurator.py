"""Offline configuration: SLO feasibility filtering, lowest-cost setup
selection, cost-indifference-point search, and grid sweeps.

Candidate setups are evaluated at the long-term average ingestion rate.
Feasibility is judged at the worst case: a full capacity batch that
traverses every assigned partition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .costmodel import (
    CostBreakdown,
    Setup,
    cost_faas_only,
    cost_hybrid,
    cost_iaas_only,
    serverless_seconds_per_request,
)
from .errors import InfeasibleError, InputError
from .pricing import PlatformConfig, PricingCatalog, vm_epoch_cost
from .profiles import ExitDistribution, StagedModelProfile

POOLS = {
    Setup.IAAS_ONLY: ("IaaS", "FaaS"),
    Setup.HYBRID: ("Hybrid", "FaaS"),
    Setup.FAAS_ONLY: ("FaaS",),
}


@dataclass(frozen=True)
class DeploymentPlan:
    """A chosen setup with its configs and scaling threshold.

    ``theta_f`` is always present: even the VM-only pool pairs with a
    serverless config to absorb spill. ``t_cip`` may equal ``r_max``,
    meaning the residual never justifies an extra instance.
    """

    setup: Setup
    theta_i: str | None
    theta_f: str | None
    cut_id: int | None
    t_cip: float
    r_max: int

    def __post_init__(self):
        if self.setup is Setup.HYBRID and (self.theta_i is None or self.theta_f is None or self.cut_id is None):
            raise InputError("a hybrid plan needs theta_i, theta_f and cut_id")
        if self.setup is Setup.FAAS_ONLY and (self.theta_i is not None or self.cut_id is not None):
            raise InputError("a serverless-only plan must not carry theta_i or cut_id")
        if self.setup is Setup.IAAS_ONLY and self.theta_i is None:
            raise InputError("a VM-only plan needs theta_i")
        if not 0 <= self.t_cip <= self.r_max:
            raise InputError(f"t_cip must be within [0, r_max], got {self.t_cip}")
        if self.r_max <= 0:
            raise InputError(f"r_max must be positive, got {self.r_max}")

    @property
    def pool(self) -> tuple[str, ...]:
        return POOLS[self.setup]

    def to_dict(self) -> dict:
        return {
            "setup": self.setup.value,
            "theta_i": self.theta_i,
            "theta_f": self.theta_f,
            "cut_id": self.cut_id,
            "t_cip": self.t_cip,
            "r_max": self.r_max,
            "pool": list(self.pool),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DeploymentPlan":
        try:
            return cls(
                setup=Setup(data["setup"]),
                theta_i=data.get("theta_i"),
                theta_f=data.get("theta_f"),
                cut_id=data.get("cut_id"),
                t_cip=float(data["t_cip"]),
                r_max=int(data["r_max"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"invalid plan: {exc}") from exc


def load_plan(path: str | Path) -> DeploymentPlan:
    try:
        with open(path) as fh:
            return DeploymentPlan.from_dict(json.load(fh))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class CandidateOption:
    """Identity of one candidate: a setup plus its config choices."""

    setup: Setup
    theta_i: str | None
    theta_f: str | None
    cut_id: int | None


@dataclass(frozen=True)
class CandidateEvaluation:
    option: CandidateOption
    worst_case_seconds: float
    feasible: bool


def worst_case_seconds(
    profile: StagedModelProfile,
    option: CandidateOption,
    catalog: PricingCatalog,
    r_max: int,
    transmission_seconds: float = 0.0,
) -> float:
    """Latency of one full batch of ``r_max`` requests traversing every
    partition assigned by the option (no early exits)."""
    cut = profile.num_partitions if option.setup is Setup.IAAS_ONLY else 0
    if option.setup is Setup.HYBRID:
        cut = option.cut_id
    head = tail = 0.0
    if cut > 0:
        head = float(sum(profile.per_request_seconds(catalog[option.theta_i])[:cut])) * r_max
    if cut < profile.num_partitions:
        tail = float(sum(profile.per_request_seconds(catalog[option.theta_f])[cut:])) * r_max
    hop = transmission_seconds if option.setup is Setup.HYBRID and cut < profile.num_partitions else 0.0
    return head + hop + tail


def evaluate_candidates(
    profile: StagedModelProfile,
    candidates: PricingCatalog,
    r_max: int,
    slo: float,
    cut_range: Sequence[int] | None = None,
    transmission_seconds: float = 0.0,
) -> list[CandidateEvaluation]:
    """Worst-case latency of every candidate tuple, in deterministic
    catalog order. Hybrid candidates default to every cut short of the
    final partition."""
    if not candidates.configs:
        raise InputError("candidate catalog is empty")
    if cut_range is None:
        cut_range = range(1, profile.num_partitions)
    options: list[CandidateOption] = []
    for theta_f in candidates.serverless():
        options.append(CandidateOption(Setup.FAAS_ONLY, None, theta_f.id, None))
    for theta_i in candidates.vms():
        for theta_f in candidates.serverless():
            options.append(CandidateOption(Setup.IAAS_ONLY, theta_i.id, theta_f.id, None))
    for theta_i in candidates.vms():
        for theta_f in candidates.serverless():
            for cut in cut_range:
                if not 1 <= cut <= profile.num_partitions:
                    raise InputError(f"cut_id {cut} outside 1..{profile.num_partitions}")
                options.append(CandidateOption(Setup.HYBRID, theta_i.id, theta_f.id, cut))
    out = []
    for option in options:
        seconds = worst_case_seconds(profile, option, candidates, r_max, transmission_seconds)
        out.append(CandidateEvaluation(option, seconds, seconds <= slo))
    return out


def slo_feasible(
    profile: StagedModelProfile,
    candidates: PricingCatalog,
    r_max: int,
    slo: float,
    cut_range: Sequence[int] | None = None,
    transmission_seconds: float = 0.0,
) -> frozenset[CandidateOption]:
    """All candidate tuples whose worst-case batch latency fits the SLO."""
    evaluations = evaluate_candidates(
        profile, candidates, r_max, slo, cut_range, transmission_seconds
    )
    return frozenset(e.option for e in evaluations if e.feasible)


def find_t_cip(
    setup: Setup,
    theta_i: PlatformConfig,
    theta_f: PlatformConfig,
    profile: StagedModelProfile,
    dist: ExitDistribution,
    r_max: int,
    slo: float,
    cut_id: int | None = None,
    transmission_seconds: float = 0.0,
) -> float | None:
    """Residual load at which one dedicated instance costs the same as
    spilling that residual to serverless.

    Below the crossing serverless is cheaper, above it the instance is.
    Returns 0 when the instance is uniformly cheaper and None when there
    is no crossing inside [0, r_max) (serverless uniformly cheaper).
    """
    if setup is Setup.FAAS_ONLY:
        raise ValueError("a serverless-only pool has no instance to trade off")
    instance_cost = vm_epoch_cost(theta_i, slo)
    faas_marginal = theta_f.unit_price * serverless_seconds_per_request(profile, dist, theta_f)
    instance_marginal = 0.0
    if setup is Setup.HYBRID:
        if cut_id is None:
            raise ValueError("hybrid t_cip search needs cut_id")
        tail = serverless_seconds_per_request(profile, dist, theta_f, cut_id + 1)
        offload_share = (
            float(dist.arrival_shares()[cut_id]) if cut_id < profile.num_partitions else 0.0
        )
        instance_marginal = theta_f.unit_price * (tail + transmission_seconds * offload_share)
    if instance_cost == 0:
        return 0.0
    slope = faas_marginal - instance_marginal
    if slope <= 0:
        return None
    crossing = instance_cost / slope
    return crossing if crossing < r_max else None


def t_cip_or_default(crossing: float | None, r_max: int) -> float:
    """Plan threshold from a crossing: with no crossing inside the
    residual domain, serverless is always cheaper, so never add the
    extra instance."""
    return float(r_max) if crossing is None else crossing


def candidate_cost(
    option: CandidateOption,
    profile: StagedModelProfile,
    dist: ExitDistribution,
    catalog: PricingCatalog,
    n: float,
    r_max: int,
    slo: float,
    transmission_seconds: float,
) -> tuple[CostBreakdown, float]:
    """Cost of a candidate at rate ``n`` with its own indifference point."""
    theta_f = catalog[option.theta_f]
    if option.setup is Setup.FAAS_ONLY:
        return cost_faas_only(n, profile, dist, theta_f), float(r_max)
    theta_i = catalog[option.theta_i]
    t_cip = t_cip_or_default(
        find_t_cip(
            option.setup, theta_i, theta_f, profile, dist, r_max, slo,
            cut_id=option.cut_id, transmission_seconds=transmission_seconds,
        ),
        r_max,
    )
    if option.setup is Setup.IAAS_ONLY:
        breakdown = cost_iaas_only(
            n, r_max, theta_i, slo, t_cip,
            profile=profile, dist=dist, theta_f=theta_f,
        )
    else:
        breakdown = cost_hybrid(
            n, r_max, theta_i, theta_f, option.cut_id, profile, dist, slo, t_cip,
            transmission_seconds=transmission_seconds,
        )
    return breakdown, t_cip


def select_plan(
    profile: StagedModelProfile,
    dist: ExitDistribution,
    feasible: Iterable[CandidateOption],
    pricing: PricingCatalog,
    n: float,
    r_max: int,
    slo: float,
    transmission_seconds: float = 0.0,
) -> DeploymentPlan:
    """Pick the cheapest feasible setup at the long-term rate ``n``.

    The cheapest feasible candidate of each setup is its base; the bases
    are then compared with the tie order: VM-only wins ties against
    both others, serverless-only wins ties against hybrid. Each plan
    carries the indifference point of its own instance type.
    """
    profile.check_distribution(dist)
    options = sorted(
        feasible,
        key=lambda o: (
            o.setup.value,
            _catalog_index(pricing, o.theta_i),
            _catalog_index(pricing, o.theta_f),
            o.cut_id if o.cut_id is not None else -1,
        ),
    )
    if not options:
        raise InfeasibleError()
    best: dict[Setup, tuple[CostBreakdown, CandidateOption, float]] = {}
    for option in options:
        breakdown, t_cip = candidate_cost(
            option, profile, dist, pricing, n, r_max, slo, transmission_seconds
        )
        incumbent = best.get(option.setup)
        if incumbent is None or breakdown.total < incumbent[0].total:
            best[option.setup] = (breakdown, option, t_cip)

    def total(setup: Setup) -> float:
        return best[setup][0].total if setup in best else math.inf

    cost_i, cost_f, cost_h = total(Setup.IAAS_ONLY), total(Setup.FAAS_ONLY), total(Setup.HYBRID)
    if cost_i <= min(cost_f, cost_h):
        chosen = Setup.IAAS_ONLY
    elif cost_f <= min(cost_i, cost_h):
        chosen = Setup.FAAS_ONLY
    else:
        chosen = Setup.HYBRID
    _, option, t_cip = best[chosen]
    return DeploymentPlan(
        setup=chosen,
        theta_i=option.theta_i,
        theta_f=option.theta_f,
        cut_id=option.cut_id,
        t_cip=t_cip,
        r_max=r_max,
    )


def _catalog_index(catalog: PricingCatalog, config_id: str | None) -> int:
    if config_id is None:
        return -1
    for i, config in enumerate(catalog.configs):
        if config.id == config_id:
            return i
    return len(catalog.configs)


class SweepAxis(str, Enum):
    CONF_THRES = "conf_thres"
    CUT_ID = "cut_id"
    INGESTION = "ingestion"


@dataclass(frozen=True)
class SweepContext:
    """Everything held fixed during a sweep.

    ``theta_i`` is the VM-only instance, ``hybrid_theta_i`` the (usually
    smaller) hybrid instance; ``dist`` serves the cut/ingestion axes and
    ``dist_family`` (threshold -> distribution) the conf_thres axis.
    """

    profile: StagedModelProfile
    theta_f: PlatformConfig
    theta_i: PlatformConfig
    hybrid_theta_i: PlatformConfig | None = None
    cut_id: int = 1
    n: float = 0.0
    r_max: int = 100
    slo: float = 6.0
    t_cip_iaas: float = 0.0
    t_cip_hybrid: float = 0.0
    transmission_seconds: float = 0.0
    dist: ExitDistribution | None = None
    dist_family: Mapping[float, ExitDistribution] | Callable[[float], ExitDistribution] | None = None

    @property
    def vm_for_hybrid(self) -> PlatformConfig:
        return self.hybrid_theta_i if self.hybrid_theta_i is not None else self.theta_i


@dataclass(frozen=True)
class SweepPoint:
    x: float
    costs: Mapping[Setup, CostBreakdown]


@dataclass(frozen=True)
class Crossing:
    """Interpolated x where two setups cost the same."""

    pair: tuple[Setup, Setup]
    x: float


@dataclass(frozen=True)
class SweepResult:
    axis: SweepAxis
    points: tuple[SweepPoint, ...]
    crossings: tuple[Crossing, ...]


def sweep(axis: SweepAxis | str, grid: Sequence[float], context: SweepContext) -> SweepResult:
    """Evaluate all three setups across a grid and locate cost crossings.

    Crossings are found per setup pair by sign change of the cost
    difference between adjacent grid points, refined by linear
    interpolation. On the conf_thres axis they are the sparsity
    cost-indifference points.
    """
    axis = SweepAxis(axis)
    if len(grid) == 0:
        raise ValueError("sweep grid must be non-empty")
    if list(grid) != sorted(grid):
        raise ValueError("sweep grid must be sorted ascending")
    points = tuple(SweepPoint(float(x), _costs_at(axis, float(x), context)) for x in grid)
    crossings = _locate_crossings(points)
    return SweepResult(axis=axis, points=points, crossings=crossings)


def _dist_at(context: SweepContext, threshold: float) -> ExitDistribution:
    family = context.dist_family
    if family is None:
        raise ValueError("conf_thres sweep needs a dist_family in the context")
    if callable(family):
        return family(threshold)
    try:
        return family[threshold]
    except KeyError:
        raise InputError(f"no distribution for conf_thres={threshold} in the family") from None


def _costs_at(axis: SweepAxis, x: float, ctx: SweepContext) -> dict[Setup, CostBreakdown]:
    dist, n, cut = ctx.dist, ctx.n, ctx.cut_id
    if axis is SweepAxis.CONF_THRES:
        dist = _dist_at(ctx, x)
    elif axis is SweepAxis.CUT_ID:
        if x != int(x):
            raise ValueError(f"cut_id grid must be integral, got {x}")
        cut = int(x)
    elif axis is SweepAxis.INGESTION:
        n = x
    if dist is None:
        raise ValueError("sweep context needs a dist for this axis")
    return {
        Setup.FAAS_ONLY: cost_faas_only(n, ctx.profile, dist, ctx.theta_f),
        Setup.IAAS_ONLY: cost_iaas_only(
            n, ctx.r_max, ctx.theta_i, ctx.slo, ctx.t_cip_iaas,
            profile=ctx.profile, dist=dist, theta_f=ctx.theta_f,
        ),
        Setup.HYBRID: cost_hybrid(
            n, ctx.r_max, ctx.vm_for_hybrid, ctx.theta_f, cut, ctx.profile, dist,
            ctx.slo, ctx.t_cip_hybrid, transmission_seconds=ctx.transmission_seconds,
        ),
    }


_PAIRS = (
    (Setup.IAAS_ONLY, Setup.HYBRID),
    (Setup.FAAS_ONLY, Setup.HYBRID),
    (Setup.IAAS_ONLY, Setup.FAAS_ONLY),
)


def _locate_crossings(points: tuple[SweepPoint, ...], tol: float = 1e-6) -> tuple[Crossing, ...]:
    """Sign changes of each pairwise cost difference, refined by linear
    interpolation between the bracketing grid points.

    Differences within ``tol`` of zero (relative to the largest observed
    difference) count as zero: a zero the difference merely touches is
    not a crossing, while a zero plateau between opposite signs yields
    one crossing at its first grid point.
    """
    crossings: list[Crossing] = []
    for a, b in _PAIRS:
        diffs = [p.costs[a].total - p.costs[b].total for p in points]
        xs = [p.x for p in points]
        scale = max((abs(d) for d in diffs), default=0.0)
        zero = tol * scale
        prev_sign = 0
        prev_idx = -1
        for i, d in enumerate(diffs):
            sign = 0 if abs(d) <= zero else (1 if d > 0 else -1)
            if sign == 0:
                continue
            if prev_sign != 0 and sign != prev_sign:
                if i == prev_idx + 1:
                    d0, d1 = diffs[prev_idx], d
                    x_star = xs[prev_idx] + (xs[i] - xs[prev_idx]) * d0 / (d0 - d1)
                else:
                    x_star = xs[prev_idx + 1]  # first point of the zero plateau
                crossings.append(Crossing((a, b), x_star))
            prev_sign, prev_idx = sign, i
    return tuple(crossings)
