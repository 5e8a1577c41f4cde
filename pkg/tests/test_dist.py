import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from rsshide.dist import (
    LlrState,
    NoiseDistribution as D,
    cdf,
    confidence_from_llr,
    kl_divergence,
    kl_numerical,
    llr_threshold,
    llr_update,
    log_likelihood_ratio,
    log_pdf,
    sample,
    sf,
)
from rsshide.errors import ImpossibleObservationError, ParameterError

finite = st.floats(-50, 50, allow_nan=False)
scales = st.floats(0.05, 20)


class TestConstruction:
    @pytest.mark.parametrize("make", [
        lambda: D.laplace(0, 0),
        lambda: D.normal(0, -1),
        lambda: D.truncated_normal(0, 1, 1, 1),
        lambda: D.truncated_normal(0, 0, -1, 1),
        lambda: D("point_mass", 0, 1.0),
        lambda: D.normal(math.inf, 1),
        lambda: D("normal", 0, 1, -1, 1),
    ])
    def test_malformed_rejected(self, make):
        with pytest.raises(ParameterError):
            make()

    def test_kind_from_string(self):
        assert D("laplace", 1, 2) == D.laplace(1, 2)

    def test_negated_and_shifted(self):
        t = D.truncated_normal(1, 2, 0, 4)
        assert t.negated() == D.truncated_normal(-1, 2, -4, 0)
        assert t.shifted(3) == D.truncated_normal(4, 2, 3, 7)


class TestLogPdf:
    def test_laplace_peak(self):
        assert log_pdf(D.laplace(0, 1), 0) == pytest.approx(-math.log(2), abs=1e-15)

    def test_normal_peak(self):
        assert log_pdf(D.normal(0, 1), 0) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-15)

    def test_truncated_outside(self):
        assert log_pdf(D.truncated_normal(0, 1, -1, 1), 2) == -math.inf

    def test_point_mass(self):
        d = D.point_mass(4)
        assert log_pdf(d, 4) == 0.0
        assert log_pdf(d, 4.5) == -math.inf

    @pytest.mark.parametrize("d", [
        D.laplace(1, 0.7), D.normal(-2, 3), D.truncated_normal(0.5, 1.5, 0, 4), D.truncated_normal(0, 1, 6, 9),
    ])
    def test_integrates_to_one(self, d):
        lo, hi = max(d.lo, d.mu - 80 * d.sigma), min(d.hi, d.mu + 80 * d.sigma)
        mass, _ = integrate.quad(lambda x: math.exp(log_pdf(d, x)), lo, hi, points=[d.mu] if lo < d.mu < hi else None,
                                 limit=200)
        assert mass == pytest.approx(1.0, abs=1e-9)

    def test_vectorized_matches_scalar(self):
        d = D.truncated_normal(0, 1, -1, 2)
        xs = np.array([-3.0, -1.0, 0.0, 1.5, 2.0, 2.5])
        np.testing.assert_array_equal(log_pdf(d, xs), [log_pdf(d, x) for x in xs])


class TestCdf:
    @pytest.mark.parametrize("d, ref", [
        (D.normal(1, 2), stats.norm(1, 2)),
        (D.laplace(-1, 0.5), stats.laplace(-1, 0.5)),
        (D.truncated_normal(1, 2, 0, 3), stats.truncnorm(-0.5, 1.0, loc=1, scale=2)),
    ])
    def test_against_scipy(self, d, ref):
        xs = np.linspace(-4, 5, 37)
        np.testing.assert_allclose(cdf(d, xs), ref.cdf(xs), atol=1e-13)
        np.testing.assert_allclose(sf(d, xs), ref.sf(xs), atol=1e-13)

    def test_truncated_mean(self):
        d = D.truncated_normal(24, 2, 0, 30)
        num, _ = integrate.quad(lambda x: x * math.exp(log_pdf(d, x)), 0, 30, points=[24])
        assert d.mean() == pytest.approx(num, rel=1e-10)


class TestSample:
    def test_point_mass(self):
        rng = np.random.default_rng(0)
        assert sample(D.point_mass(4), rng) == 4
        assert np.all(sample(D.point_mass(4), rng, 10) == 4)

    def test_truncated_support(self):
        xs = sample(D.truncated_normal(0, 1, 0, 3), np.random.default_rng(1), 100_000)
        assert xs.min() >= 0 and xs.max() <= 3

    def test_far_tail_truncation(self):
        xs = sample(D.truncated_normal(0, 1, 8, 9), np.random.default_rng(2), 10_000)
        assert xs.min() >= 8 and xs.max() <= 9
        assert np.all(np.isfinite(xs))

    def test_normal_moments(self):
        xs = sample(D.normal(10, 2), np.random.default_rng(3), 1_000_000)
        assert abs(xs.mean() - 10) < 0.01
        assert abs(xs.std() - 2) < 0.01

    def test_deterministic(self):
        d = D.truncated_normal(2, 0.5, 0, 4)
        a = sample(d, np.random.default_rng(9), 100)
        b = sample(d, np.random.default_rng(9), 100)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("d", [D.truncated_normal(2, 0.5, 0, 4), D.truncated_normal(0, 1, 1.5, 5),
                                   D.normal(3, 2), D.laplace(-1, 0.5)])
    def test_ks_against_rejection_oracle(self, d):
        n = 20_000
        rng = np.random.default_rng(11)
        got = sample(d, rng, n)
        oracle = _oracle_sampler(d, np.random.default_rng(12), n)
        crit = 1.63 * math.sqrt(2 / n)
        assert stats.ks_2samp(got, oracle).statistic < crit


def _oracle_sampler(d, rng, n):
    """Independent reference: inverse CDF for Laplace, Box-Muller plus rejection for normals."""
    if d.kind.value == "laplace":
        u = rng.random(n) - 0.5
        return d.mu - d.sigma * np.sign(u) * np.log1p(-2 * np.abs(u))
    out = np.empty(0)
    while out.size < n:
        u1, u2 = rng.random(4 * n), rng.random(4 * n)
        z = np.sqrt(-2 * np.log1p(-u1)) * np.cos(2 * np.pi * u2)
        x = d.mu + d.sigma * z
        out = np.concatenate([out, x[(x >= d.lo) & (x <= d.hi)]])
    return out[:n]


class TestKL:
    def test_identical(self):
        assert kl_divergence(D.normal(0, 1), D.normal(0, 1)) == 0

    def test_normal_unit_shift(self):
        assert kl_divergence(D.normal(0, 1), D.normal(1, 1)) == pytest.approx(0.5, rel=1e-15)

    def test_laplace_closed_form(self):
        expected = math.exp(-1)
        assert kl_divergence(D.laplace(1, 1), D.laplace(0, 1)) == pytest.approx(expected, rel=1e-14)
        assert kl_numerical(D.laplace(1, 1), D.laplace(0, 1)) == pytest.approx(expected, rel=1e-8)

    def test_support_violation_is_infinite(self):
        assert kl_divergence(D.normal(0, 1), D.truncated_normal(0, 1, 0, 1)) == math.inf
        assert kl_divergence(D.point_mass(1), D.point_mass(2)) == math.inf
        assert kl_divergence(D.point_mass(1), D.normal(1, 1)) == math.inf

    def test_truncated_vs_parent(self):
        # KL(trunc || parent) = -ln Z for the truncation mass Z
        t = D.truncated_normal(0, 1, -1, 2)
        z = stats.norm.cdf(2) - stats.norm.cdf(-1)
        assert kl_divergence(t, D.normal(0, 1)) == pytest.approx(-math.log(z), rel=1e-8)

    def test_closed_forms_match_quadrature(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            m1, m2 = rng.uniform(-5, 5, 2)
            s1, s2 = rng.uniform(0.2, 4, 2)
            p, q = D.normal(m1, s1), D.normal(m2, s2)
            assert kl_divergence(p, q) == pytest.approx(kl_numerical(p, q), rel=1e-6)
            p, q = D.laplace(m1, s1), D.laplace(m2, s1)
            assert kl_divergence(p, q) == pytest.approx(kl_numerical(p, q), rel=1e-6)

    def test_laplace_unequal_scale_matches_quadrature(self):
        p, q = D.laplace(0.3, 0.5), D.laplace(-1, 2)
        assert kl_divergence(p, q) == pytest.approx(kl_numerical(p, q), rel=1e-7)

    @settings(max_examples=200, deadline=None)
    @given(finite, scales, finite, scales, st.sampled_from(["normal", "laplace"]))
    def test_nonnegative_and_zero_iff_equal(self, m1, s1, m2, s2, kind):
        p, q = D(kind, m1, s1), D(kind, m2, s2)
        kl = kl_divergence(p, q)
        assert kl >= 0
        if p == q:
            assert kl == 0
        elif abs(m1 - m2) > 1e-6 * max(s1, s2) or abs(s1 - s2) > 1e-4 * s1:
            assert kl > 0


class TestLlr:
    def test_laplace_at_true_mean(self):
        s = llr_update(LlrState(), 5, D.laplace(5, 1), D.laplace(4, 1))
        assert s.cum_llr == pytest.approx(1.0, abs=1e-15) and s.n == 1

    def test_laplace_midpoint(self):
        s = llr_update(LlrState(), 4.5, D.laplace(5, 1), D.laplace(4, 1))
        assert s.cum_llr == 0.0

    def test_support_violation_flags(self):
        s = llr_update(LlrState(), 2, D.normal(0, 1), D.truncated_normal(0, 1, 0, 1))
        assert s.cum_llr == math.inf and s.immediate
        s = llr_update(s, 0.5, D.normal(0, 1), D.truncated_normal(0, 1, 0, 1))
        assert s.cum_llr == math.inf and s.n == 2

    def test_negative_saturation(self):
        s = llr_update(LlrState(), 2, D.truncated_normal(0, 1, 0, 1), D.normal(0, 1))
        assert s.cum_llr == -math.inf and s.immediate

    def test_impossible_observation(self):
        with pytest.raises(ImpossibleObservationError):
            llr_update(LlrState(), 5, D.truncated_normal(0, 1, 0, 1), D.truncated_normal(0, 1, -1, 1))

    def test_contradictory_sequence(self):
        a, b = D.truncated_normal(5, 1, 3, 7), D.truncated_normal(4, 1, 2, 6)
        s = llr_update(LlrState(), 6.5, a, b)
        with pytest.raises(ImpossibleObservationError):
            llr_update(s, 2.5, a, b)

    def test_point_mass_against_density(self):
        assert log_likelihood_ratio(D.point_mass(3), D.normal(3, 1), 3.0) == math.inf
        assert log_likelihood_ratio(D.point_mass(3), D.normal(3, 1), 2.0) == -math.inf

    def test_state_invariants(self):
        with pytest.raises(ParameterError):
            LlrState(1.0, 0)
        with pytest.raises(ParameterError):
            LlrState(math.inf, 3, False)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200), finite, finite, scales)
    def test_laplace_cap(self, xs, m1, m2, sigma):
        true, alt = D.laplace(m1, sigma), D.laplace(m2, sigma)
        total = float(np.sum(log_likelihood_ratio(true, alt, np.array(xs))))
        assert abs(total) <= len(xs) * abs(m1 - m2) / sigma + 1e-9 * max(1.0, len(xs) * abs(m1 - m2) / sigma)

    @pytest.mark.parametrize("true, alt", [
        (D.normal(0, 6), D.normal(-1, 6)),
        (D.laplace(0, 3), D.laplace(-1, 3)),
        (D.normal(0, 3), D.normal(-5, 5)),
    ])
    def test_mean_llr_is_n_times_kl(self, true, alt):
        trials, n = 1000, 200
        x = sample(true, np.random.default_rng(21), trials * n).reshape(trials, n)
        per = log_likelihood_ratio(true, alt, x).sum(axis=1) / n
        se = per.std(ddof=1) / math.sqrt(trials)
        assert abs(per.mean() - kl_divergence(true, alt)) < 3 * se


class TestConfidence:
    def test_values(self):
        assert confidence_from_llr(0.0) == 0.5
        assert confidence_from_llr(math.log(19)) == pytest.approx(0.95, rel=1e-15)
        assert confidence_from_llr(math.inf) == 1.0
        assert confidence_from_llr(-math.inf) == 0.0

    @given(st.floats(-800, 800))
    def test_symmetry_exact(self, m):
        assert confidence_from_llr(m) + confidence_from_llr(-m) == 1.0

    @given(st.floats(-40, 40), st.floats(1e-6, 10))
    def test_monotone(self, m, step):
        assert confidence_from_llr(m + step) >= confidence_from_llr(m)

    def test_threshold_inverts_map(self):
        for p in (0.01, 0.05, 0.2):
            assert confidence_from_llr(llr_threshold(p)) == pytest.approx(1 - p, rel=1e-14)
        with pytest.raises(ParameterError):
            llr_threshold(0.5)


class TestLaplaceDifferenceForm:
    @given(st.floats(-1e12, 1e12), st.floats(-50, 50), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_per_reading_cap_holds_for_any_reading(self, x, mu, delta, sigma):
        p, q = D.laplace(mu, sigma), D.laplace(mu - delta, sigma)
        # the represented gap, not delta: mu - (mu - delta) need not round back
        assert abs(log_likelihood_ratio(p, q, x)) <= abs(p.mu - q.mu) / sigma

    @given(st.floats(-100, 100), st.floats(-5, 5), st.floats(0.1, 5))
    def test_matches_log_density_difference(self, x, delta, sigma):
        p, q = D.laplace(0, sigma), D.laplace(delta, sigma)
        assert log_likelihood_ratio(p, q, x) == pytest.approx(log_pdf(p, x) - log_pdf(q, x), abs=1e-12)
