"""Shared fixtures: a seven-partition profile with per-config batch
runtimes shaped so that the big VM fits the SLO alone, the small VM only
fits as a hybrid head up to cut 5, and serverless fits everywhere."""

import pytest

from splitserve import (
    ExitDistribution,
    PartitionProfile,
    StagedModelProfile,
    default_catalog,
)

# per-batch seconds (batch = 100 requests) for each partition
FAAS_BATCH = (0.4, 0.5, 0.55, 0.6, 0.65, 0.75, 0.85)   # sums to 4.3
LARGE_BATCH = (0.55, 0.65, 0.75, 0.85, 0.95, 2.8, 3.75)  # sums to 10.3
XLARGE_BATCH = (0.45, 0.55, 0.6, 0.7, 0.8, 1.1, 1.3)   # sums to 5.5

SLO = 6.0
R_MAX = 100


def build_profile(name="staged-cnn", slo=SLO):
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
    return StagedModelProfile(name=name, slo=slo, partitions=partitions)


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def profile():
    return build_profile()


@pytest.fixture(scope="session")
def shallow_dist():
    return ExitDistribution(0.5, (0.5, 0.3, 0.1, 0.05, 0.03, 0.01, 0.01), accuracy=0.80)


@pytest.fixture(scope="session")
def middle_dist():
    return ExitDistribution(0.7, (0.05, 0.05, 0.25, 0.3, 0.25, 0.05, 0.05), accuracy=0.85)


@pytest.fixture(scope="session")
def deep_dist():
    return ExitDistribution(0.85, (0.005, 0.005, 0.01, 0.03, 0.05, 0.3, 0.6), accuracy=0.86)
