"""Closed-form per-epoch cost of the three deployment setups.

Everything is normalized to one epoch of SLO seconds: ``n`` is requests
per epoch, VM instances bill for the full epoch, serverless bills the
seconds actually consumed by the stages each request reaches.

The VM term packs ``n`` into instances of capacity ``r_max``: one VM per
full batch, plus one more only when the leftover (residual) exceeds the
traffic cost-indifference point ``t_cip``. A residual at or below
``t_cip`` is cheaper on serverless and is billed there as spill; spilled
requests run the whole model serverless-side and never touch a VM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigKindError
from .pricing import PlatformConfig, vm_epoch_cost
from .profiles import ExitDistribution, StagedModelProfile


class Setup(str, Enum):
    FAAS_ONLY = "FaaSOnly"
    IAAS_ONLY = "IaaSOnly"
    HYBRID = "Hybrid"


@dataclass(frozen=True)
class CostBreakdown:
    """Per-epoch cost of one setup, split by platform."""

    setup: Setup
    vm_cost: float
    faas_cost: float
    vm_count: int
    cut_id: int | None = None
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.vm_cost + self.faas_cost)

    def to_dict(self) -> dict:
        return {
            "setup": self.setup.value,
            "vm_cost": self.vm_cost,
            "faas_cost": self.faas_cost,
            "total": self.total,
            "vm_count": self.vm_count,
            "cut_id": self.cut_id,
        }


def serverless_seconds_per_request(
    profile: StagedModelProfile,
    dist: ExitDistribution,
    theta_f: PlatformConfig,
    first_stage: int = 1,
) -> float:
    """Expected serverless seconds billed per entering request, counting
    only stages >= ``first_stage``.

    A request reaches stage k with probability equal to the survival of
    the exit distribution past stage k-1, and then consumes that stage's
    per-request time.
    """
    _require_serverless(theta_f)
    if not 1 <= first_stage <= profile.num_partitions + 1:
        raise ValueError(f"first_stage out of range: {first_stage}")
    profile.check_distribution(dist)
    shares = dist.arrival_shares()[first_stage - 1 :]
    times = profile.per_request_seconds(theta_f)[first_stage - 1 :]
    return float(np.dot(shares, times))


def vm_packing(n: float, r_max: float, t_cip: float) -> tuple[int, float, bool]:
    """Split ``n`` requests into full instances, residual, and the
    add-one-more-VM decision.

    Returns ``(full_instances, residual, extra_vm)`` where the extra VM
    is added only if the residual exceeds ``t_cip``.
    """
    if n < 0:
        raise ValueError(f"request count must be non-negative, got {n}")
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if not 0 <= t_cip <= r_max:
        raise ValueError(f"t_cip must be within [0, r_max], got {t_cip}")
    full = math.floor(n / r_max)
    residual = n - full * r_max
    return full, residual, residual > t_cip


def cost_faas_only(
    n: float,
    profile: StagedModelProfile,
    dist: ExitDistribution,
    theta_f: PlatformConfig,
) -> CostBreakdown:
    """Serverless-only cost: every request is billed for the stages it
    reaches, at the serverless per-second price."""
    _require_serverless(theta_f)
    if n < 0:
        raise ValueError(f"request count must be non-negative, got {n}")
    billed = n * serverless_seconds_per_request(profile, dist, theta_f)
    return CostBreakdown(
        setup=Setup.FAAS_ONLY,
        vm_cost=0.0,
        faas_cost=theta_f.unit_price * billed,
        vm_count=0,
    )


def cost_iaas_only(
    n: float,
    r_max: float,
    theta_i: PlatformConfig,
    slo: float,
    t_cip: float,
    *,
    profile: StagedModelProfile | None = None,
    dist: ExitDistribution | None = None,
    theta_f: PlatformConfig | None = None,
    include_spill_cost: bool = True,
) -> CostBreakdown:
    """VM-only cost with the residual either promoted to one more VM or
    spilled to the paired serverless config.

    When ``include_spill_cost`` is False the spill is routed but not
    billed, reproducing the bare VM-count formula; the default bills the
    spill at full-model serverless cost, which is what the spill actually
    costs, so ``profile``/``dist``/``theta_f`` are then required whenever
    a spill exists.
    """
    _require_vm(theta_i)
    full, residual, extra = vm_packing(n, r_max, t_cip)
    vm_count = full + (1 if extra else 0)
    vm_cost = vm_count * vm_epoch_cost(theta_i, slo)
    spill = 0.0 if extra else residual
    faas_cost = 0.0
    if include_spill_cost and spill > 0:
        if profile is None or dist is None or theta_f is None:
            raise ValueError(
                "billing a residual spill needs profile, dist and theta_f "
                "(or pass include_spill_cost=False)"
            )
        faas_cost = theta_f.unit_price * (
            spill * serverless_seconds_per_request(profile, dist, theta_f)
        )
    return CostBreakdown(
        setup=Setup.IAAS_ONLY, vm_cost=vm_cost, faas_cost=faas_cost, vm_count=vm_count
    )


def cost_hybrid(
    n: float,
    r_max: float,
    theta_i: PlatformConfig,
    theta_f: PlatformConfig,
    cut_id: int,
    profile: StagedModelProfile,
    dist: ExitDistribution,
    slo: float,
    t_cip: float,
    *,
    transmission_seconds: float = 0.0,
    include_spill_cost: bool = True,
) -> CostBreakdown:
    """Hybrid cost: stages 1..cut_id on VMs, later stages offloaded to
    serverless, residual spill (when no extra VM is added) running the
    whole model serverless-side.

    ``transmission_seconds`` is billed once per request crossing the cut
    (the hand-off of intermediate state). ``cut_id == L`` disables
    offloading and reduces exactly to the VM-only form.
    """
    _require_vm(theta_i)
    _require_serverless(theta_f)
    profile.check_distribution(dist)
    num = profile.num_partitions
    if not 1 <= cut_id <= num:
        raise ValueError(f"cut_id must be in 1..{num}, got {cut_id}")
    full, residual, extra = vm_packing(n, r_max, t_cip)
    vm_count = full + (1 if extra else 0)
    vm_cost = vm_count * vm_epoch_cost(theta_i, slo)

    tail_per_request = serverless_seconds_per_request(profile, dist, theta_f, cut_id + 1)
    offload_share = float(dist.arrival_shares()[cut_id]) if cut_id < num else 0.0

    if include_spill_cost:
        spill = 0.0 if extra else residual
        n_vm = n - spill
        billed = (
            n_vm * tail_per_request
            + spill * serverless_seconds_per_request(profile, dist, theta_f)
            + transmission_seconds * (n_vm * offload_share)
        )
    else:
        # bare formula: offload tail for all n, spill routed but unbilled
        billed = n * tail_per_request + transmission_seconds * (n * offload_share)
    return CostBreakdown(
        setup=Setup.HYBRID,
        vm_cost=vm_cost,
        faas_cost=theta_f.unit_price * billed,
        vm_count=vm_count,
        cut_id=cut_id,
    )


def _require_vm(config: PlatformConfig) -> None:
    if not config.is_vm:
        raise ConfigKindError(f"{config.id} is not a VM config")


def _require_serverless(config: PlatformConfig) -> None:
    if not config.is_serverless:
        raise ConfigKindError(f"{config.id} is not a serverless config")
