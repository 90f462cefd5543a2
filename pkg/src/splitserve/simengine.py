"""Deterministic epoch-by-epoch trace replay.

Each trace row is one epoch (one SLO interval). Per epoch the engine
updates the traffic monitor, routes arrivals over the currently healthy
instances, accrues VM and serverless cost, and checks batch latencies
against the SLO. Every ``scale_interval_epochs`` it re-targets the
instance pool; newly provisioned VMs bill immediately but serve only
after their cold start, while terminations take effect at once.

Billing follows the closed-form cost model: in the default ``expected``
exit mode a batch's serverless seconds are the exit-distribution
expectation, so a constant trace with a warm start reproduces the
closed-form cost exactly. The ``rounded`` mode books integer per-stage
request counts (largest-remainder), and ``multinomial`` draws them from
the seeded generator.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .balancer import EpochRouting, route_epoch
from .configurator import DeploymentPlan
from .costmodel import Setup, serverless_seconds_per_request
from .errors import InputError
from .pricing import PlatformConfig, PricingCatalog, vm_epoch_cost
from .profiles import ExitDistribution, StagedModelProfile
from .traffic import MonitorState, scale_target

EXIT_MODES = ("expected", "rounded", "multinomial")


@dataclass(frozen=True)
class TrafficTrace:
    """A sequence of per-epoch arrival counts."""

    epochs: tuple[int, ...]
    epoch_seconds: float
    source: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(int(x) for x in self.epochs))
        if not self.epochs:
            raise InputError("trace must have at least one epoch")
        if any(x < 0 for x in self.epochs):
            raise InputError("trace request counts must be non-negative")
        if self.epoch_seconds <= 0:
            raise InputError(f"epoch_seconds must be positive, got {self.epoch_seconds}")

    def truncate(self, num_epochs: int) -> "TrafficTrace":
        if not 1 <= num_epochs <= len(self.epochs):
            raise InputError(
                f"cannot truncate a {len(self.epochs)}-epoch trace to {num_epochs}"
            )
        return TrafficTrace(self.epochs[:num_epochs], self.epoch_seconds, self.source)

    def sha256(self) -> str:
        digest = hashlib.sha256()
        for x in self.epochs:
            digest.update(f"{x}\n".encode())
        return digest.hexdigest()


def load_trace(path: str | Path, epoch_seconds: float) -> TrafficTrace:
    """Read a trace CSV with header ``epoch,requests``; rows are
    consecutive epochs (the epoch column is a label, replay renumbers
    from 1)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["epoch", "requests"]:
                raise InputError(f"{path}: expected CSV header 'epoch,requests', got {header}")
            requests = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    int(row[0])
                    requests.append(int(row[1]))
                except (IndexError, ValueError) as exc:
                    raise InputError(f"{path}:{lineno}: bad trace row {row}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    return TrafficTrace(tuple(requests), epoch_seconds, source=str(path))


def save_trace(trace: TrafficTrace, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "requests"])
        for epoch, requests in enumerate(trace.epochs, start=1):
            writer.writerow([epoch, requests])


class InstanceState(Enum):
    COLD_STARTING = "cold_starting"
    HEALTHY = "healthy"
    TERMINATED = "terminated"


@dataclass
class VmInstance:
    """Lifecycle of one long-lived instance inside a replay."""

    id: int
    config_id: str
    provisioned_epoch: int
    ready_epoch: int
    state: InstanceState = InstanceState.COLD_STARTING

    def __post_init__(self):
        if self.ready_epoch <= self.provisioned_epoch:
            raise ValueError("ready_epoch must come after provisioned_epoch")


@dataclass(frozen=True)
class SimParams:
    """Replay knobs. ``r_max`` and ``t_cip`` default to the plan's values.

    ``initial_mu``/``initial_sigma``/``initial_instances`` allow starting
    from a warmed-up state; the defaults reproduce the cold start from
    zero, which under-provisions for the first epochs by design.
    """

    scale_interval_epochs: int = 25
    cold_start_epochs: int = 19
    w_mu: float = 0.5
    w_sigma: float = 0.5
    phi: float = 1.0
    t_cip: float | None = None
    r_max: int | None = None
    seed: int = 0
    exit_mode: str = "expected"
    transmission_seconds: float = 0.0
    cold_start_jitter_epochs: int = 0
    initial_mu: float = 0.0
    initial_sigma: float = 0.0
    initial_instances: int = 0

    def __post_init__(self):
        if self.scale_interval_epochs < 1:
            raise InputError("scale_interval_epochs must be >= 1")
        if self.cold_start_epochs < 0 or self.cold_start_jitter_epochs < 0:
            raise InputError("cold start durations must be >= 0")
        if self.exit_mode not in EXIT_MODES:
            raise InputError(f"exit_mode must be one of {EXIT_MODES}, got {self.exit_mode!r}")
        if self.initial_instances < 0:
            raise InputError("initial_instances must be >= 0")

    def to_dict(self) -> dict:
        return {
            "scale_interval_epochs": self.scale_interval_epochs,
            "cold_start_epochs": self.cold_start_epochs,
            "w_mu": self.w_mu,
            "w_sigma": self.w_sigma,
            "phi": self.phi,
            "t_cip": self.t_cip,
            "r_max": self.r_max,
            "seed": self.seed,
            "exit_mode": self.exit_mode,
            "transmission_seconds": self.transmission_seconds,
            "cold_start_jitter_epochs": self.cold_start_jitter_epochs,
            "initial_mu": self.initial_mu,
            "initial_sigma": self.initial_sigma,
            "initial_instances": self.initial_instances,
        }


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    arrivals: int
    mu: float
    sigma: float
    healthy: int
    target: int
    routing: EpochRouting
    vm_cost: float
    faas_cost: float
    violations: int


CSV_COLUMNS = (
    "epoch", "lambda", "mu", "sigma", "healthy", "target",
    "vm_batches", "faas_batches", "vm_cost", "faas_cost", "violations",
)


@dataclass(frozen=True)
class SimReport:
    """Full replay output: per-epoch rows plus exact column totals."""

    rows: tuple[EpochRecord, ...]
    metadata: dict
    totals: dict = field(init=False)

    def __post_init__(self):
        totals = {
            "epochs": len(self.rows),
            "arrivals": sum(r.arrivals for r in self.rows),
            "vm_cost": math.fsum(r.vm_cost for r in self.rows),
            "faas_cost": math.fsum(r.faas_cost for r in self.rows),
            "violations": sum(r.violations for r in self.rows),
        }
        totals["total_cost"] = totals["vm_cost"] + totals["faas_cost"]
        object.__setattr__(self, "totals", totals)

    @property
    def total_cost(self) -> float:
        return self.totals["total_cost"]

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "totals": self.totals,
            "rows": [
                {
                    "epoch": r.epoch,
                    "lambda": r.arrivals,
                    "mu": r.mu,
                    "sigma": r.sigma,
                    "healthy": r.healthy,
                    "target": r.target,
                    "vm_batches": list(r.routing.vm_batches),
                    "faas_batches": list(r.routing.faas_batches),
                    "threshold": r.routing.threshold,
                    "vm_cost": r.vm_cost,
                    "faas_cost": r.faas_cost,
                    "violations": r.violations,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.epoch,
                r.arrivals,
                repr(r.mu),
                repr(r.sigma),
                r.healthy,
                r.target,
                ";".join(str(b) for b in r.routing.vm_batches),
                ";".join(str(b) for b in r.routing.faas_batches),
                repr(r.vm_cost),
                repr(r.faas_cost),
                r.violations,
            ])
        return buf.getvalue()


def split_exit_counts(
    batch_size: int,
    dist: ExitDistribution,
    mode: str = "rounded",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Integer per-stage exit counts for one batch.

    ``rounded`` books the proportional split with largest-remainder
    rounding (ties to the shallower stage); ``multinomial`` draws from
    the seeded generator. Counts always sum to ``batch_size``.
    """
    fractions = np.asarray(dist.fractions, dtype=float)
    if mode == "multinomial":
        if rng is None:
            raise ValueError("multinomial split needs a generator")
        return rng.multinomial(batch_size, fractions / fractions.sum())
    if mode != "rounded":
        raise ValueError(f"unknown split mode {mode!r}")
    quotas = fractions * batch_size
    counts = np.floor(quotas).astype(int)
    shortfall = batch_size - int(counts.sum())
    if shortfall > 0:
        # quantize remainders so float noise cannot flip ties; exact ties
        # go to the shallower stage (stable sort by index)
        remainders = np.round(quotas - counts, 12)
        order = np.argsort(-remainders, kind="stable")
        counts[order[:shortfall]] += 1
    return counts


class _BillingModel:
    """Precomputed per-batch serverless billing and latency figures."""

    def __init__(
        self,
        plan: DeploymentPlan,
        profile: StagedModelProfile,
        dist: ExitDistribution,
        theta_i: PlatformConfig | None,
        theta_f: PlatformConfig,
        r_max: int,
        slo: float,
        transmission_seconds: float,
        exit_mode: str,
    ):
        self.dist = dist
        self.theta_f = theta_f
        self.exit_mode = exit_mode
        self.transmission = transmission_seconds
        self.cut = profile.num_partitions
        if plan.setup is Setup.HYBRID:
            self.cut = plan.cut_id
        elif plan.setup is Setup.FAAS_ONLY:
            self.cut = 0
        num = profile.num_partitions
        self.faas_per_request = profile.per_request_seconds(theta_f)
        self.full_expect = serverless_seconds_per_request(profile, dist, theta_f)
        self.tail_expect = (
            serverless_seconds_per_request(profile, dist, theta_f, self.cut + 1)
            if self.cut < num
            else 0.0
        )
        self.offload_share = float(dist.arrival_shares()[self.cut]) if self.cut < num else 0.0

        # worst-case latency of one capacity batch on each path
        tail_secs = float(np.sum(self.faas_per_request[self.cut:])) * r_max
        self.faas_batch_seconds = float(np.sum(self.faas_per_request)) * r_max
        if theta_i is not None:
            head = float(np.sum(profile.per_request_seconds(theta_i)[: self.cut])) * r_max
            hop = transmission_seconds if self.cut < num else 0.0
            self.vm_batch_seconds = head + hop + tail_secs
        else:
            self.vm_batch_seconds = 0.0
        self.slo = slo

    def _drawn_arrivals(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        exits = split_exit_counts(batch, self.dist, self.exit_mode, rng)
        arrivals = np.empty(len(exits), dtype=float)
        arrivals[0] = batch
        arrivals[1:] = batch - np.cumsum(exits)[:-1]
        return arrivals

    def vm_batch_faas_seconds(self, batch: int, rng: np.random.Generator) -> float:
        """Serverless seconds billed by one VM-served batch (offloaded
        tail plus per-offload transmission)."""
        if self.cut >= len(self.dist.fractions):
            return 0.0
        if self.exit_mode == "expected":
            return batch * self.tail_expect + self.transmission * (batch * self.offload_share)
        arrivals = self._drawn_arrivals(batch, rng)
        tail = float(np.dot(arrivals[self.cut:], self.faas_per_request[self.cut:]))
        return tail + self.transmission * float(arrivals[self.cut])

    def faas_batch_seconds_billed(self, batch: int, rng: np.random.Generator) -> float:
        """Serverless seconds billed by one spilled batch (whole model)."""
        if self.exit_mode == "expected":
            return batch * self.full_expect
        arrivals = self._drawn_arrivals(batch, rng)
        return float(np.dot(arrivals, self.faas_per_request))


def replay(
    trace: TrafficTrace,
    plan: DeploymentPlan,
    profile: StagedModelProfile,
    dist: ExitDistribution,
    pricing: PricingCatalog,
    params: SimParams = SimParams(),
) -> SimReport:
    """Replay a trace under one deployment plan.

    Identical inputs (including the seed) produce bit-identical reports.
    """
    profile.check_distribution(dist)
    if plan.theta_f is None or plan.theta_f not in pricing:
        raise InputError(f"plan needs a serverless config present in the catalog: {plan.theta_f!r}")
    theta_f = pricing[plan.theta_f]
    theta_i = None
    if plan.setup is not Setup.FAAS_ONLY:
        if plan.theta_i is None or plan.theta_i not in pricing:
            raise InputError(f"plan needs a VM config present in the catalog: {plan.theta_i!r}")
        theta_i = pricing[plan.theta_i]
    if plan.setup is Setup.HYBRID and not 1 <= plan.cut_id <= profile.num_partitions:
        raise InputError(f"plan cut_id {plan.cut_id} outside profile 1..{profile.num_partitions}")
    r_max = params.r_max if params.r_max is not None else plan.r_max
    t_cip = params.t_cip if params.t_cip is not None else plan.t_cip
    if not 0 <= t_cip <= r_max:
        raise InputError(f"t_cip must be within [0, r_max], got {t_cip}")

    billing = _BillingModel(
        plan, profile, dist, theta_i, theta_f, r_max, trace.epoch_seconds,
        params.transmission_seconds, params.exit_mode,
    )
    has_vms = plan.setup is not Setup.FAAS_ONLY
    instance_epoch_cost = vm_epoch_cost(theta_i, trace.epoch_seconds) if has_vms else 0.0
    rng = np.random.default_rng(params.seed)

    state = MonitorState(
        mu=params.initial_mu, sigma=params.initial_sigma,
        w_mu=params.w_mu, w_sigma=params.w_sigma, phi=params.phi,
    )
    instances: list[VmInstance] = []
    next_id = 1
    if has_vms:
        for _ in range(params.initial_instances):
            instances.append(VmInstance(next_id, theta_i.id, 0, 1))
            next_id += 1
    standing_target = len(instances)

    rows: list[EpochRecord] = []
    for epoch, arrivals in enumerate(trace.epochs, start=1):
        state = state.update(arrivals)
        for inst in instances:
            if inst.state is InstanceState.COLD_STARTING and inst.ready_epoch <= epoch:
                inst.state = InstanceState.HEALTHY
        healthy = sum(1 for i in instances if i.state is InstanceState.HEALTHY)

        routing = route_epoch(arrivals, healthy, r_max, state.balancer_threshold, epoch)

        vm_cost = len(instances) * instance_epoch_cost
        faas_seconds = 0.0
        violations = 0
        for batch in routing.vm_batches:
            faas_seconds += billing.vm_batch_faas_seconds(batch, rng)
            if billing.vm_batch_seconds > trace.epoch_seconds:
                violations += 1
        for batch in routing.faas_batches:
            faas_seconds += billing.faas_batch_seconds_billed(batch, rng)
            if billing.faas_batch_seconds > trace.epoch_seconds:
                violations += 1
        faas_cost = theta_f.unit_price * faas_seconds

        if has_vms and epoch % params.scale_interval_epochs == 0:
            decision = scale_target(state, r_max, t_cip)
            standing_target = decision.target
            alive = len(instances)
            if decision.target > alive:
                for _ in range(decision.target - alive):
                    boot = params.cold_start_epochs
                    if params.cold_start_jitter_epochs > 0:
                        boot += int(rng.integers(0, params.cold_start_jitter_epochs + 1))
                    instances.append(
                        VmInstance(next_id, theta_i.id, epoch, epoch + max(1, boot))
                    )
                    next_id += 1
            elif decision.target < alive:
                instances.sort(key=lambda i: i.id)
                for inst in instances[decision.target:]:
                    inst.state = InstanceState.TERMINATED
                instances = instances[: decision.target]

        rows.append(
            EpochRecord(
                epoch=epoch,
                arrivals=arrivals,
                mu=state.mu,
                sigma=state.sigma,
                healthy=healthy,
                target=standing_target,
                routing=routing,
                vm_cost=vm_cost,
                faas_cost=faas_cost,
                violations=violations,
            )
        )

    metadata = {
        "plan": plan.to_dict(),
        "params": params.to_dict(),
        "profile": profile.name,
        "conf_thres": dist.conf_thres,
        "trace": {
            "source": trace.source,
            "epochs": len(trace.epochs),
            "epoch_seconds": trace.epoch_seconds,
            "sha256": trace.sha256(),
        },
        "effective": {"r_max": r_max, "t_cip": t_cip},
    }
    return SimReport(rows=tuple(rows), metadata=metadata)


@dataclass(frozen=True)
class PoolComparisonEntry:
    label: str
    plan: DeploymentPlan
    report: SimReport
    total_cost: float
    pct_over_best: float


@dataclass(frozen=True)
class PoolComparison:
    """Replay totals of several plans over one identical trace, cheapest
    first, with pairwise percentage differences."""

    entries: tuple[PoolComparisonEntry, ...]

    def pairwise_pct(self) -> list[tuple[str, str, float]]:
        out = []
        for a in self.entries:
            for b in self.entries:
                if a.label != b.label and b.total_cost > 0:
                    out.append((a.label, b.label, (a.total_cost / b.total_cost - 1.0) * 100.0))
        return out


def compare_pools(
    trace: TrafficTrace,
    plans: Sequence[DeploymentPlan],
    profile: StagedModelProfile,
    dist: ExitDistribution,
    pricing: PricingCatalog,
    params: SimParams = SimParams(),
) -> PoolComparison:
    """Replay every plan on the identical trace and rank the totals."""
    if len(plans) < 2:
        raise InputError("pool comparison needs at least two plans")
    labeled = []
    for i, plan in enumerate(plans):
        label = f"{i}:{'+'.join(plan.pool)}"
        labeled.append((label, plan, replay(trace, plan, profile, dist, pricing, params)))
    best = min(r.total_cost for _, _, r in labeled)
    entries = [
        PoolComparisonEntry(
            label=label,
            plan=plan,
            report=report,
            total_cost=report.total_cost,
            pct_over_best=((report.total_cost / best - 1.0) * 100.0) if best > 0 else 0.0,
        )
        for label, plan, report in labeled
    ]
    entries.sort(key=lambda e: (e.total_cost, e.label))
    return PoolComparison(entries=tuple(entries))
