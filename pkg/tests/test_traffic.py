import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splitserve import MonitorState, ScaleDecision, scale_target


class TestUpdate:
    def test_direct_substitution(self):
        state = MonitorState(mu=10.0, sigma=2.0, w_mu=0.5, w_sigma=0.5)
        out = state.update(20.0)
        assert out.mu == pytest.approx(15.0)
        # deviation uses the already-updated mean: 1 + 0.5*|20-15|
        assert out.sigma == pytest.approx(3.5)

    def test_fixed_point(self):
        state = MonitorState(mu=42.0, sigma=0.0)
        out = state.update(42.0)
        assert (out.mu, out.sigma) == (42.0, 0.0)

    def test_constant_input_gap_halves_each_step(self):
        # with both weights 0.5 every value is exactly representable,
        # so the decay law holds with no rounding at all
        state = MonitorState()
        c = 100.0
        for t in range(1, 49):
            state = state.update(c)
            assert c - state.mu == (c - 0.0) * 0.5**t

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            MonitorState().update(-1.0)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            MonitorState(w_mu=0.0)
        with pytest.raises(ValueError):
            MonitorState(w_sigma=1.5)

    def test_closed_form_recursion_long_run(self):
        # independent oracle: unroll mu_t = (1-w)^t mu0 + w sum (1-w)^(t-1-i) x_i
        rng = np.random.default_rng(7)
        rates = rng.uniform(0.0, 400.0, size=10_000)
        w_mu, w_sigma = 0.5, 0.5
        state = MonitorState(w_mu=w_mu, w_sigma=w_sigma)
        mus, sigmas = [], []
        for rate in rates:
            state = state.update(rate)
            mus.append(state.mu)
            sigmas.append(state.sigma)

        decay_mu = (1.0 - w_mu) ** np.arange(len(rates))
        for t in (0, 1, 5, 99, 999, 9_999):
            weights = decay_mu[: t + 1][::-1]
            mu_ref = w_mu * float(np.dot(weights, rates[: t + 1]))
            assert mus[t] == pytest.approx(mu_ref, rel=1e-12, abs=1e-12)
        dev = np.abs(rates - np.asarray(mus))
        decay_s = (1.0 - w_sigma) ** np.arange(len(rates))
        for t in (0, 1, 5, 99, 999, 9_999):
            weights = decay_s[: t + 1][::-1]
            sigma_ref = w_sigma * float(np.dot(weights, dev[: t + 1]))
            assert sigmas[t] == pytest.approx(sigma_ref, rel=1e-12, abs=1e-12)

    @given(
        st.floats(min_value=0.0, max_value=1e6),
        st.floats(min_value=0.0, max_value=1e6),
        st.floats(min_value=0.0, max_value=1e6),
        st.floats(min_value=1e-9, max_value=1e3),
    )
    def test_order_one_homogeneity(self, mu, sigma, rate, scale):
        base = MonitorState(mu=mu, sigma=sigma).update(rate)
        scaled = MonitorState(mu=mu * scale, sigma=sigma * scale).update(rate * scale)
        assert scaled.mu == pytest.approx(base.mu * scale, rel=1e-12, abs=1e-12)
        assert scaled.sigma == pytest.approx(base.sigma * scale, rel=1e-12, abs=1e-9)


class TestScaleTarget:
    def test_residual_below_threshold_keeps_k(self):
        state = MonitorState(mu=200.0, sigma=50.0)
        assert scale_target(state, 100, 90) == ScaleDecision(k=2, residual=50.0, target=2)

    def test_residual_above_threshold_adds_one(self):
        state = MonitorState(mu=200.0, sigma=95.0)
        assert scale_target(state, 100, 90) == ScaleDecision(k=2, residual=95.0, target=3)

    def test_zero_demand_zero_instances(self):
        assert scale_target(MonitorState(), 100, 90).target == 0

    @given(
        st.floats(min_value=0.0, max_value=1e5),
        st.floats(min_value=0.0, max_value=1e5),
    )
    def test_monotone_in_smoothed_demand(self, demand, bump):
        lo = scale_target(MonitorState(mu=demand, sigma=0.0), 100, 90)
        hi = scale_target(MonitorState(mu=demand + bump, sigma=0.0), 100, 90)
        assert hi.target >= lo.target
        assert 0 <= lo.residual < 100

    def test_balancer_threshold_uses_phi(self):
        state = MonitorState(mu=10.0, sigma=4.0, phi=2.0)
        assert state.balancer_threshold == pytest.approx(18.0)
        assert state.smoothed_demand == pytest.approx(14.0)
