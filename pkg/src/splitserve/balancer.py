"""Per-epoch request routing: fill the long-lived instances with
capacity-sized mini-batches first, spill the rest to serverless."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EpochRouting:
    """How one epoch's arrivals were split into mini-batches.

    ``vm_batches`` went to long-lived instances (at most one batch per
    healthy instance), ``faas_batches`` to serverless. ``threshold`` is
    the balancer's mu + phi*sigma snapshot, recorded for reporting.
    """

    epoch: int
    arrivals: int
    vm_batches: tuple[int, ...]
    faas_batches: tuple[int, ...]
    threshold: float = 0.0

    @property
    def vm_requests(self) -> int:
        return sum(self.vm_batches)

    @property
    def faas_requests(self) -> int:
        return sum(self.faas_batches)


def route_epoch(
    arrivals: int,
    healthy: int,
    r_max: int,
    threshold: float = 0.0,
    epoch: int = 0,
) -> EpochRouting:
    """Split ``arrivals`` into batches of up to ``r_max`` and assign them.

    Batches are formed in arrival order (the last one may be partial);
    the first ``healthy`` batches run on long-lived instances, the rest
    spill to serverless. A partial batch takes an instance whenever one
    is still free.
    """
    if arrivals < 0 or healthy < 0:
        raise ValueError(f"arrivals and healthy must be non-negative: {arrivals}, {healthy}")
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    batches = [r_max] * (arrivals // r_max)
    if arrivals % r_max:
        batches.append(arrivals % r_max)
    return EpochRouting(
        epoch=epoch,
        arrivals=arrivals,
        vm_batches=tuple(batches[:healthy]),
        faas_batches=tuple(batches[healthy:]),
        threshold=threshold,
    )
