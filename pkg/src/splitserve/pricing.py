"""Resource configuration catalog and unit-cost primitives.

Prices are configuration, never code: the default catalog is a JSON data
file shipped with the package and can be copied and edited. All costs in
this package are normalized to one epoch, where an epoch lasts exactly
the SLO in seconds.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import ConfigKindError, InputError

# Some serverless providers grant whole vCPUs only at multiples of this
# memory size; other sizes share hardware and add latency jitter.
FULL_VCPU_MEMORY_MB = 1769


class PlatformKind(str, Enum):
    VM = "VM"
    SERVERLESS = "Serverless"


@dataclass(frozen=True)
class PlatformConfig:
    """One purchasable resource configuration.

    ``unit_price`` is currency per second: per instance-second for VMs,
    per execution-second (at this memory size) for serverless.
    ``r_max`` is the SLO-aware capacity in requests per epoch, which is
    also the mini-batch size the runtimes were profiled at.
    ``billing_granularity_s`` > 0 rounds billed serverless durations up
    to that granularity; 0 bills exact seconds.
    """

    id: str
    kind: PlatformKind
    unit_price: float
    r_max: int
    memory_mb: int | None = None
    vcpus: float | None = None
    billing_granularity_s: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise InputError("config id must be non-empty")
        if self.unit_price <= 0:
            raise InputError(f"{self.id}: unit_price must be positive, got {self.unit_price}")
        if self.r_max <= 0:
            raise InputError(f"{self.id}: r_max must be positive, got {self.r_max}")
        if self.kind is PlatformKind.SERVERLESS and self.memory_mb is not None:
            if self.memory_mb % FULL_VCPU_MEMORY_MB != 0:
                warnings.warn(
                    f"{self.id}: memory {self.memory_mb} MB is not a multiple of "
                    f"{FULL_VCPU_MEMORY_MB} MB; the instance may share vCPUs",
                    stacklevel=2,
                )

    @property
    def is_vm(self) -> bool:
        return self.kind is PlatformKind.VM

    @property
    def is_serverless(self) -> bool:
        return self.kind is PlatformKind.SERVERLESS


@dataclass(frozen=True)
class PricingCatalog:
    """A set of candidate configs with unique ids."""

    configs: tuple[PlatformConfig, ...]
    currency: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "configs", tuple(self.configs))
        ids = [c.id for c in self.configs]
        if len(set(ids)) != len(ids):
            raise InputError(f"duplicate config ids in catalog: {ids}")

    def __getitem__(self, config_id: str) -> PlatformConfig:
        for config in self.configs:
            if config.id == config_id:
                return config
        raise KeyError(config_id)

    def __contains__(self, config_id: str) -> bool:
        return any(c.id == config_id for c in self.configs)

    def vms(self) -> tuple[PlatformConfig, ...]:
        return tuple(c for c in self.configs if c.is_vm)

    def serverless(self) -> tuple[PlatformConfig, ...]:
        return tuple(c for c in self.configs if c.is_serverless)


def serverless_exec_cost(config: PlatformConfig, duration: float) -> float:
    """Cost of one serverless execution of ``duration`` seconds."""
    if not config.is_serverless:
        raise ConfigKindError(f"{config.id} is a VM config, expected serverless")
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    if config.billing_granularity_s > 0 and duration > 0:
        duration = math.ceil(duration / config.billing_granularity_s) * config.billing_granularity_s
    return duration * config.unit_price


def vm_epoch_cost(config: PlatformConfig, slo: float) -> float:
    """Cost of keeping one VM up for a whole epoch (= SLO seconds)."""
    if not config.is_vm:
        raise ConfigKindError(f"{config.id} is a serverless config, expected VM")
    if slo < 0:
        raise ValueError(f"slo must be non-negative, got {slo}")
    return config.unit_price * slo


def load_catalog(path: str | Path) -> PricingCatalog:
    """Read a pricing JSON file: {currency, configs: [...]}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc
    return catalog_from_dict(data, source=str(path))


def catalog_from_dict(data: dict, source: str = "<catalog>") -> PricingCatalog:
    try:
        configs = tuple(
            PlatformConfig(
                id=str(c["id"]),
                kind=PlatformKind(c["kind"]),
                unit_price=float(c["unit_price_per_s"]),
                r_max=int(c["r_max"]),
                memory_mb=None if c.get("memory_mb") is None else int(c["memory_mb"]),
                vcpus=None if c.get("vcpus") is None else float(c["vcpus"]),
                billing_granularity_s=float(c.get("billing_granularity_s", 0.0)),
            )
            for c in data["configs"]
        )
        return PricingCatalog(configs=configs, currency=str(data.get("currency", "USD")))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: invalid pricing file: {exc}") from exc


def catalog_to_dict(catalog: PricingCatalog) -> dict:
    return {
        "currency": catalog.currency,
        "configs": [
            {
                "id": c.id,
                "kind": c.kind.value,
                "unit_price_per_s": c.unit_price,
                "r_max": c.r_max,
                "memory_mb": c.memory_mb,
                "vcpus": c.vcpus,
                "billing_granularity_s": c.billing_granularity_s,
            }
            for c in catalog.configs
        ],
    }


def default_catalog() -> PricingCatalog:
    """The editable default catalog shipped with the package."""
    text = resources.files("splitserve.data").joinpath("default_pricing.json").read_text()
    return catalog_from_dict(json.loads(text), source="default_pricing.json")
