import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitserve import (
    ExitDistribution,
    PartitionProfile,
    ProfileShapeError,
    StagedModelProfile,
    expected_runtime,
    propagate_rates,
)
from splitserve.profiles import load_profile, profile_to_dict


class TestFromConditional:
    def test_two_thirds_chain(self):
        dist = ExitDistribution.from_conditional([0.6, 0.75, 0.2])
        assert dist.fractions == pytest.approx((0.6, 0.3, 0.1))
        assert math.fsum(dist.fractions) == 1.0

    def test_all_exit_first(self):
        dist = ExitDistribution.from_conditional([1.0, 0.5, 0.5])
        assert dist.fractions == (1.0, 0.0, 0.0)

    def test_none_exit_early(self):
        dist = ExitDistribution.from_conditional([0.0, 0.0, 0.0])
        assert dist.fractions == (0.0, 0.0, 1.0)

    def test_last_beta_is_forced(self):
        a = ExitDistribution.from_conditional([0.3, 0.2, 0.0])
        b = ExitDistribution.from_conditional([0.3, 0.2, 1.0])
        assert a.fractions == b.fractions

    def test_rejects_out_of_range(self):
        with pytest.raises(ProfileShapeError):
            ExitDistribution.from_conditional([0.5, 1.5])

    @given(st.lists(st.floats(min_value=0.0, max_value=0.999), min_size=1, max_size=8))
    def test_roundtrip_identity_where_survival_positive(self, betas):
        # reconstruction divides by the survival probability, so float
        # precision fades as survival vanishes; assert where it is sound
        dist = ExitDistribution.from_conditional(betas)
        recovered = dist.to_conditional()
        survival = 1.0
        for beta, back in zip(betas[:-1], recovered[:-1]):
            if survival <= 1e-6:
                break
            assert back == pytest.approx(beta, abs=1e-9 / survival)
            survival *= 1.0 - beta
        if math.fsum(dist.fractions[:-1]) < 1.0:
            assert recovered[-1] == 1.0
        else:
            assert recovered[-1] == 0.0  # nothing reaches the last stage

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8))
    def test_fractions_always_form_a_distribution(self, betas):
        dist = ExitDistribution.from_conditional(betas)
        assert all(f >= 0 for f in dist.fractions)
        assert math.fsum(dist.fractions) == pytest.approx(1.0, abs=1e-9)


class TestExitDistributionValidation:
    def test_rejects_bad_sum(self):
        with pytest.raises(ProfileShapeError):
            ExitDistribution(0.5, (0.5, 0.4))

    def test_rejects_negative_fraction(self):
        with pytest.raises(ProfileShapeError):
            ExitDistribution(0.5, (1.5, -0.5))

    def test_cumulative_is_monotone(self, middle_dist):
        cum = middle_dist.cumulative()
        assert np.all(np.diff(cum) >= 0)


class TestPropagateRates:
    def test_cumulative_subtraction(self):
        dist = ExitDistribution(0.7, (0.6, 0.3, 0.1))
        assert propagate_rates(dist, 100).tolist() == pytest.approx([100.0, 40.0, 10.0])

    def test_zero_arrivals(self):
        dist = ExitDistribution(0.7, (0.6, 0.3, 0.1))
        assert propagate_rates(dist, 0).tolist() == [0.0, 0.0, 0.0]

    def test_deeper_partitions_see_fewer_requests(self, middle_dist):
        rates = propagate_rates(middle_dist, 100)
        assert rates[0] == 100.0
        assert np.all(np.diff(rates) < 0)

    @given(
        st.lists(st.floats(min_value=0.001, max_value=0.999), min_size=1, max_size=8),
        st.floats(min_value=0.0, max_value=1e6),
    )
    def test_non_negative_non_increasing_and_exact_head(self, betas, n):
        dist = ExitDistribution.from_conditional(betas)
        rates = propagate_rates(dist, n)
        assert rates[0] == n
        assert np.all(rates >= 0)
        assert np.all(np.diff(rates) <= 1e-12)

    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8),
        st.integers(min_value=0, max_value=10**6),
    )
    def test_request_conservation(self, betas, n):
        dist = ExitDistribution.from_conditional(betas)
        exits = n * np.asarray(dist.fractions)
        assert math.fsum(exits) == pytest.approx(n, rel=1e-12, abs=1e-9)


class TestExpectedRuntime:
    def _profile(self, batch_times, r_max=1):
        partitions = tuple(
            PartitionProfile(pid=i + 1, runtimes={"cfg": t * r_max})
            for i, t in enumerate(batch_times)
        )
        return StagedModelProfile(name="toy", slo=10.0, partitions=partitions)

    def _config(self, r_max=1):
        from splitserve import PlatformConfig, PlatformKind

        return PlatformConfig(id="cfg", kind=PlatformKind.SERVERLESS, unit_price=1.0, r_max=r_max)

    def test_half_and_half(self):
        profile = self._profile([1.0, 2.0])
        dist = ExitDistribution(0.5, (0.5, 0.5))
        assignment = {1: self._config(), 2: self._config()}
        assert expected_runtime(profile, dist, assignment) == pytest.approx(2.0)

    def test_all_exit_first_stage(self):
        profile = self._profile([1.0, 2.0])
        dist = ExitDistribution(0.5, (1.0, 0.0))
        assignment = {1: self._config(), 2: self._config()}
        assert expected_runtime(profile, dist, assignment) == pytest.approx(1.0)

    def test_uniform_three_stages(self):
        # prefix sums 1, 2, 3 weighted uniformly -> mean 2
        profile = self._profile([1.0, 1.0, 1.0])
        dist = ExitDistribution(0.5, (1 / 3, 1 / 3, 1 / 3))
        assignment = {pid: self._config() for pid in (1, 2, 3)}
        assert expected_runtime(profile, dist, assignment) == pytest.approx(2.0)

    def test_batch_normalization_uses_config_capacity(self):
        # batch times are for r_max requests; per-request shrinks accordingly
        profile = self._profile([1.0, 2.0], r_max=10)
        dist = ExitDistribution(0.5, (0.5, 0.5))
        assignment = {1: self._config(r_max=10), 2: self._config(r_max=10)}
        assert expected_runtime(profile, dist, assignment) == pytest.approx(2.0)

    def test_missing_assignment_raises(self):
        profile = self._profile([1.0, 2.0])
        dist = ExitDistribution(0.5, (0.5, 0.5))
        with pytest.raises(ProfileShapeError):
            expected_runtime(profile, dist, {1: self._config()})

    def test_length_mismatch_raises(self, profile):
        with pytest.raises(ProfileShapeError):
            profile.check_distribution(ExitDistribution(0.5, (0.5, 0.5)))


class TestProfileValidation:
    def test_rejects_gap_in_pids(self):
        with pytest.raises(ProfileShapeError):
            StagedModelProfile(
                name="bad",
                slo=6.0,
                partitions=(
                    PartitionProfile(pid=1, runtimes={"a": 1.0}),
                    PartitionProfile(pid=3, runtimes={"a": 1.0}),
                ),
            )

    def test_rejects_nonpositive_runtime(self):
        with pytest.raises(ProfileShapeError):
            PartitionProfile(pid=1, runtimes={"a": 0.0})

    def test_last_partition_must_classify(self):
        with pytest.raises(ProfileShapeError):
            StagedModelProfile(
                name="bad",
                slo=6.0,
                partitions=(PartitionProfile(pid=1, runtimes={"a": 1.0}, ends_in_classifier=False),),
            )

    def test_missing_runtime_entry(self, profile):
        with pytest.raises(ProfileShapeError):
            profile.batch_seconds("no-such-config")


def test_profile_json_roundtrip(tmp_path, profile):
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(profile_to_dict(profile)))
    loaded = load_profile(path)
    assert loaded == profile


def test_distribution_file_single_and_family(tmp_path, shallow_dist, middle_dist):
    from splitserve.errors import InputError
    from splitserve.profiles import (
        distribution_to_dict,
        load_distribution,
        load_distribution_family,
    )

    single = tmp_path / "dist.json"
    single.write_text(json.dumps(distribution_to_dict(middle_dist)))
    assert load_distribution(single) == middle_dist

    family_path = tmp_path / "family.json"
    family_path.write_text(
        json.dumps([distribution_to_dict(d) for d in (middle_dist, shallow_dist)])
    )
    family = load_distribution_family(family_path)
    assert list(family) == [0.5, 0.7]  # keyed and sorted by conf_thres
    with pytest.raises(InputError):
        load_distribution(family_path)
