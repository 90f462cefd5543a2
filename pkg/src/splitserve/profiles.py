"""Partitioned model profiles and early-exit distributions.

A staged model is an ordered chain of partitions; a request enters at
partition 1 and may exit at any partition that ends in a classifier.
Runtimes are profiled per mini-batch (one batch holds ``r_max`` requests,
the capacity of the config the runtime was measured on), so per-request
times are ``batch_seconds / r_max``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, ProfileShapeError
from .pricing import PlatformConfig

FRACTION_SUM_TOL = 1e-9


@dataclass(frozen=True)
class PartitionProfile:
    """One contiguous block of the model, ending in a classifier or not.

    ``runtimes`` maps a platform config id to the profiled seconds for
    one full mini-batch on that config.
    """

    pid: int
    runtimes: Mapping[str, float]
    ends_in_classifier: bool = True

    def __post_init__(self):
        if self.pid < 1:
            raise ProfileShapeError(f"partition ids are 1-based, got {self.pid}")
        for config_id, seconds in self.runtimes.items():
            if not (seconds > 0 and math.isfinite(seconds)):
                raise ProfileShapeError(
                    f"partition {self.pid}: runtime for {config_id!r} must be "
                    f"positive and finite, got {seconds}"
                )

    def batch_seconds(self, config_id: str) -> float:
        try:
            return self.runtimes[config_id]
        except KeyError:
            raise ProfileShapeError(
                f"partition {self.pid} has no runtime entry for config {config_id!r}"
            ) from None


@dataclass(frozen=True)
class StagedModelProfile:
    """A partitioned model with its latency objective.

    Partitions are ordered and contiguously numbered 1..L; the last one
    always ends in the final classifier.
    """

    name: str
    slo: float
    partitions: tuple[PartitionProfile, ...]

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        if not self.partitions:
            raise ProfileShapeError("profile needs at least one partition")
        pids = [p.pid for p in self.partitions]
        if pids != list(range(1, len(pids) + 1)):
            raise ProfileShapeError(f"partition ids must be contiguous 1..L, got {pids}")
        if not self.partitions[-1].ends_in_classifier:
            raise ProfileShapeError("the last partition must end in the final classifier")
        if self.slo <= 0:
            raise ProfileShapeError(f"slo must be positive seconds, got {self.slo}")

    @property
    def num_partitions(self) -> int:
        return len(self.partitions)

    def batch_seconds(self, config_id: str) -> np.ndarray:
        """Profiled per-batch seconds of every partition on one config."""
        return np.array([p.batch_seconds(config_id) for p in self.partitions])

    def per_request_seconds(self, config: PlatformConfig) -> np.ndarray:
        """Per-request stage seconds on ``config`` (batch time over batch size)."""
        return self.batch_seconds(config.id) / config.r_max

    def check_distribution(self, dist: "ExitDistribution") -> None:
        if len(dist.fractions) != self.num_partitions:
            raise ProfileShapeError(
                f"distribution has {len(dist.fractions)} fractions but profile "
                f"{self.name!r} has {self.num_partitions} partitions"
            )


@dataclass(frozen=True)
class ExitDistribution:
    """Unconditional exit fractions: fraction of *all* arriving requests
    that exit at each partition. Fractions sum to 1; the final classifier
    absorbs whatever does not exit earlier.

    ``conf_thres`` is the classifier confidence threshold the fractions
    were measured at; ``accuracy`` is optional top-1 accuracy metadata.
    """

    conf_thres: float
    fractions: tuple[float, ...]
    accuracy: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if not 0.0 <= self.conf_thres <= 1.0:
            raise ProfileShapeError(f"conf_thres must be in [0, 1], got {self.conf_thres}")
        if not self.fractions:
            raise ProfileShapeError("need at least one exit fraction")
        if any(f < 0 for f in self.fractions):
            raise ProfileShapeError(f"exit fractions must be non-negative: {self.fractions}")
        total = math.fsum(self.fractions)
        if abs(total - 1.0) > FRACTION_SUM_TOL:
            raise ProfileShapeError(f"exit fractions must sum to 1, got {total!r}")
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise ProfileShapeError(f"accuracy must be in [0, 1], got {self.accuracy}")

    @classmethod
    def from_conditional(
        cls,
        betas: Sequence[float],
        conf_thres: float = 1.0,
        accuracy: float | None = None,
    ) -> "ExitDistribution":
        """Build from conditional exit probabilities (share of the requests
        *reaching* a partition that exit there). The last entry is forced to
        1 so the final classifier absorbs every surviving request.
        """
        betas = list(betas)
        if not betas:
            raise ProfileShapeError("need at least one conditional exit probability")
        if any(not 0.0 <= b <= 1.0 for b in betas):
            raise ProfileShapeError(f"conditional exit probabilities must be in [0, 1]: {betas}")
        fractions = []
        survival = 1.0
        for beta in betas[:-1]:
            fractions.append(beta * survival)
            survival *= 1.0 - beta
        # the remainder exits at the final classifier; float residue from an
        # exhausted chain (some earlier beta == 1) is clamped at zero
        fractions.append(max(0.0, 1.0 - math.fsum(fractions)))
        return cls(conf_thres=conf_thres, fractions=tuple(fractions), accuracy=accuracy)

    def to_conditional(self) -> tuple[float, ...]:
        """Recover conditional exit probabilities where survival > 0
        (downstream of a total exit, the conditional value is undefined
        and reported as 0).
        """
        betas = []
        survival = 1.0
        for f in self.fractions:
            betas.append(f / survival if survival > 0 else 0.0)
            survival -= f
        betas[-1] = 1.0 if math.fsum(self.fractions[:-1]) < 1.0 else betas[-1]
        return tuple(betas)

    def cumulative(self) -> np.ndarray:
        """Cumulative exit fraction after each partition."""
        return np.cumsum(self.fractions)

    def arrival_shares(self) -> np.ndarray:
        """Share of arriving requests that *reach* each partition.

        Entry k is 1 minus the cumulative exits before k; entry 0 is
        exactly 1. Tiny negative tails from float residue are clamped.
        """
        shares = np.empty(len(self.fractions))
        shares[0] = 1.0
        shares[1:] = 1.0 - self.cumulative()[:-1]
        return np.maximum(shares, 0.0)


def propagate_rates(dist: ExitDistribution, n: float) -> np.ndarray:
    """Arrival rate at every partition for ``n`` requests entering stage 1.

    ``rate[0] == n`` exactly; deeper entries shrink by the cumulative exit
    fraction, so the sequence is non-negative and non-increasing.
    """
    if n < 0:
        raise ValueError(f"request count must be non-negative, got {n}")
    return n * dist.arrival_shares()


def expected_runtime(
    profile: StagedModelProfile,
    dist: ExitDistribution,
    assignment: Mapping[int, PlatformConfig],
) -> float:
    """Mean per-request latency under a partition-to-config assignment.

    A request exiting at partition k pays the per-request times of
    partitions 1..k, so the mean is the exit-fraction-weighted prefix sum.
    """
    profile.check_distribution(dist)
    per_request = []
    for partition in profile.partitions:
        try:
            config = assignment[partition.pid]
        except KeyError:
            raise ProfileShapeError(
                f"assignment is missing partition {partition.pid}"
            ) from None
        per_request.append(partition.batch_seconds(config.id) / config.r_max)
    prefix = np.cumsum(per_request)
    return float(np.dot(dist.fractions, prefix))


def load_profile(path: str | Path) -> StagedModelProfile:
    """Read a profile JSON file: {name, slo_seconds, partitions: [...]}."""
    data = _read_json(path)
    try:
        partitions = tuple(
            PartitionProfile(
                pid=int(p["pid"]),
                runtimes={str(k): float(v) for k, v in p["runtimes"].items()},
                ends_in_classifier=bool(p.get("ends_in_classifier", True)),
            )
            for p in sorted(data["partitions"], key=lambda p: p["pid"])
        )
        return StagedModelProfile(
            name=str(data["name"]),
            slo=float(data["slo_seconds"]),
            partitions=partitions,
        )
    except (KeyError, TypeError, ValueError, ProfileShapeError) as exc:
        raise InputError(f"{path}: invalid profile file: {exc}") from exc


def profile_to_dict(profile: StagedModelProfile) -> dict:
    return {
        "name": profile.name,
        "slo_seconds": profile.slo,
        "partitions": [
            {
                "pid": p.pid,
                "ends_in_classifier": p.ends_in_classifier,
                "runtimes": dict(p.runtimes),
            }
            for p in profile.partitions
        ],
    }


def load_distribution(path: str | Path) -> ExitDistribution:
    """Read a single exit-distribution JSON file: {conf_thres, fractions, accuracy}."""
    data = _read_json(path)
    if isinstance(data, list):
        raise InputError(f"{path}: expected one distribution, found a family; use load_distribution_family")
    return _dist_from_dict(data, path)


def load_distribution_family(path: str | Path) -> dict[float, ExitDistribution]:
    """Read one-or-many distributions, keyed by their conf_thres.

    Accepts either a single distribution object or a JSON list of them.
    """
    data = _read_json(path)
    entries = data if isinstance(data, list) else [data]
    family: dict[float, ExitDistribution] = {}
    for entry in entries:
        dist = _dist_from_dict(entry, path)
        if dist.conf_thres in family:
            raise InputError(f"{path}: duplicate conf_thres {dist.conf_thres}")
        family[dist.conf_thres] = dist
    return dict(sorted(family.items()))


def distribution_to_dict(dist: ExitDistribution) -> dict:
    return {
        "conf_thres": dist.conf_thres,
        "fractions": list(dist.fractions),
        "accuracy": dist.accuracy,
    }


def _dist_from_dict(data: dict, path) -> ExitDistribution:
    try:
        accuracy = data.get("accuracy")
        return ExitDistribution(
            conf_thres=float(data["conf_thres"]),
            fractions=tuple(float(f) for f in data["fractions"]),
            accuracy=None if accuracy is None else float(accuracy),
        )
    except (KeyError, TypeError, ValueError, ProfileShapeError) as exc:
        raise InputError(f"{path}: invalid distribution file: {exc}") from exc


def _read_json(path: str | Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from exc
