"""Inputs shared by the demo scripts: a seven-partition model profile
and three exit distributions.

Batch runtimes (seconds per 100-request mini-batch) are shaped so that:
  * the whole model fits the 6 s objective on the big VM (5.5 s),
  * but not on the small VM (10.3 s),
  * serverless runs the whole model in 4.3 s,
  * a hybrid head on the small VM stays within 6 s only up to cut 5.
"""

import numpy as np

from splitserve import ExitDistribution, PartitionProfile, StagedModelProfile, TrafficTrace

SLO = 6.0
R_MAX = 100

FAAS_BATCH = (0.4, 0.5, 0.55, 0.6, 0.65, 0.75, 0.85)
LARGE_BATCH = (0.55, 0.65, 0.75, 0.85, 0.95, 2.8, 3.75)
XLARGE_BATCH = (0.45, 0.55, 0.6, 0.7, 0.8, 1.1, 1.3)


def build_profile() -> StagedModelProfile:
    partitions = tuple(
        PartitionProfile(
            pid=i + 1,
            runtimes={
                "c6i.large": LARGE_BATCH[i],
                "c6i.xlarge": XLARGE_BATCH[i],
                "serverless-8845mb": FAAS_BATCH[i],
            },
        )
        for i in range(7)
    )
    return StagedModelProfile(name="staged-cnn", slo=SLO, partitions=partitions)


# Lower confidence thresholds push exits toward the shallow classifiers.
DISTRIBUTIONS = {
    0.50: ExitDistribution(0.50, (0.5, 0.3, 0.1, 0.05, 0.03, 0.01, 0.01), accuracy=0.80),
    0.70: ExitDistribution(0.70, (0.05, 0.05, 0.25, 0.3, 0.25, 0.05, 0.05), accuracy=0.85),
    0.85: ExitDistribution(0.85, (0.005, 0.005, 0.01, 0.03, 0.05, 0.3, 0.6), accuracy=0.86),
}


def bursty_trace(epochs: int = 400, seed: int = 123) -> TrafficTrace:
    """Seasonal demand around 160 req/epoch with noise and rare spikes."""
    rng = np.random.default_rng(seed)
    t = np.arange(epochs)
    base = 160 + 90 * np.sin(2 * np.pi * t / 80)
    noise = rng.normal(0, 25, size=epochs)
    spikes = (rng.random(epochs) < 0.05) * rng.integers(100, 300, size=epochs)
    lam = np.maximum(0, base + noise + spikes).astype(int)
    return TrafficTrace(tuple(int(x) for x in lam), SLO, source="synthetic-bursty")
