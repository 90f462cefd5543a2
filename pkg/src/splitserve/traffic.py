"""Online traffic monitor: EWMA mean/deviation of the arrival rate and
the instance-count target derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MonitorState:
    """EWMA mean ``mu`` and EWMA absolute deviation ``sigma`` of the
    per-epoch arrival rate, with their weights and the balancer
    multiplier ``phi``."""

    mu: float = 0.0
    sigma: float = 0.0
    w_mu: float = 0.5
    w_sigma: float = 0.5
    phi: float = 1.0

    def __post_init__(self):
        if self.mu < 0 or self.sigma < 0:
            raise ValueError(f"mu and sigma must be non-negative: {self.mu}, {self.sigma}")
        if not (0 < self.w_mu <= 1 and 0 < self.w_sigma <= 1):
            raise ValueError(f"weights must lie in (0, 1]: {self.w_mu}, {self.w_sigma}")

    def update(self, rate: float) -> "MonitorState":
        """Fold one observed arrival rate into the averages.

        The deviation is taken against the already-updated mean.
        """
        if rate < 0:
            raise ValueError(f"arrival rate must be non-negative, got {rate}")
        mu = (1.0 - self.w_mu) * self.mu + self.w_mu * rate
        sigma = (1.0 - self.w_sigma) * self.sigma + self.w_sigma * abs(rate - mu)
        return replace(self, mu=mu, sigma=sigma)

    @property
    def smoothed_demand(self) -> float:
        """Scaling target rate: mean plus one deviation."""
        return self.mu + self.sigma

    @property
    def balancer_threshold(self) -> float:
        """Stable-traffic threshold for the load balancer: mu + phi*sigma."""
        return self.mu + self.phi * self.sigma


@dataclass(frozen=True)
class ScaleDecision:
    """Instance-count decision: ``k`` full instances plus possibly one
    more for the residual."""

    k: int
    residual: float
    target: int


def scale_target(state: MonitorState, r_max: float, t_cip: float) -> ScaleDecision:
    """Instances needed for the smoothed demand: one per full ``r_max``
    of ``mu + sigma``, plus one more only when the leftover exceeds the
    cost-indifference point."""
    if r_max <= 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if not 0 <= t_cip <= r_max:
        raise ValueError(f"t_cip must be within [0, r_max], got {t_cip}")
    demand = state.smoothed_demand
    k = math.floor(demand / r_max)
    residual = demand - k * r_max
    target = k + (1 if residual > t_cip else 0)
    return ScaleDecision(k=k, residual=residual, target=target)
