// Event sampling, tau estimators and the empirical witness.
#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ndc/io.hpp"
#include "ndc/sampler.hpp"

using namespace ndc;

namespace {

JointTemporalDensity pdc_density(double a, double b, double bl_max, const DispersionKit& kit, std::size_t n = 512) {
  const auto psi = build_pdc_amplitude(pdc_grid(a, b, bl_max, n), a, b);
  return to_time_domain(apply_dispersion_phase(psi, kit));
}

StationaryPairModel classical_model(double window) {
  const FrequencyGrid g(2048, 0.02);
  const auto s1 = gaussian_spectrum(g, 0.2, 1.0, 0.3);
  const auto s2 = gaussian_spectrum(g, 0.1, 0.7, -0.2);
  return classical_extremal_model(s1, s2, window);
}

}  // namespace

TEST(Rng, CounterBasedStreams) {
  rng::Stream a(7, "x", 3), b(7, "x", 3), c(7, "y", 3), d(7, "x", 4);
  const auto a0 = a(), b0 = b();
  EXPECT_EQ(a0, b0);
  EXPECT_NE(a0, c());
  EXPECT_NE(a0, d());
  EXPECT_NE(a(), a0);

  rng::Stream s(1, "moments");
  double m1 = 0, m2 = 0, u1 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    u1 += s.uniform();
  }
  EXPECT_NEAR(m1 / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(m2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(u1 / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
}

TEST(DiscreteSampler, FollowsWeights) {
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
  const DiscreteSampler ds(w);
  EXPECT_EQ(ds.index(0.0), 1u);
  EXPECT_EQ(ds.index(0.2499), 1u);
  EXPECT_EQ(ds.index(0.25), 3u);
  EXPECT_EQ(ds.index(0.9999999), 3u);
  EXPECT_THROW(DiscreteSampler(std::vector<double>(4, 0.0)), Error);
}

TEST(SampleBiphoton, PointMassStaysInItsCell) {
  auto d = pdc_density(1.0, 4.0, 0.0, {}, 64);
  std::fill(d.values.begin(), d.values.end(), 0.0);
  const std::size_t r = 40, c = 20;
  d.values[r * d.grid.cols() + c] = 1.0;
  const auto b = sample_biphoton(d, 2000, 11);
  const double T0 = d.grid.sum.time(r), tau0 = d.grid.diff.time(c);
  for (const auto& e : b.events) {
    EXPECT_LE(std::abs(0.5 * (e.t1 + e.t2) - T0), 0.5 * d.grid.sum.dt() + 1e-12);
    EXPECT_LE(std::abs(e.tau() - tau0), 0.5 * d.grid.diff.dt() + 1e-12);
  }
}

TEST(SampleBiphoton, ProductGaussianVariance) {
  const double a = 0.01, b = 10.0;
  const auto batch = sample_biphoton(pdc_density(a, b, 0.0, {}), 100000, 2024);
  const auto st = estimate_tau_stats(batch, 0.0, 0);
  EXPECT_NEAR(st.var_tau, 1.0 / (b * b), 3 * st.std_error);
  EXPECT_NEAR(st.std_error / st.var_tau, std::sqrt(2.0 / 100000), 0.1 * std::sqrt(2.0 / 100000));
  EXPECT_NEAR(st.mean_tau, 0.0, 4 * std::sqrt(st.var_tau / 100000));
}

TEST(SampleBiphoton, Deterministic) {
  const auto d = pdc_density(0.5, 3.0, 0.0, {}, 128);
  const auto x = sample_biphoton(d, 500, 42);
  EXPECT_EQ(x, sample_biphoton(d, 500, 42));
  EXPECT_NE(x.events, sample_biphoton(d, 500, 43).events);
  // Event i depends only on (seed, i).
  const auto longer = sample_biphoton(d, 1000, 42);
  EXPECT_TRUE(std::equal(x.events.begin(), x.events.end(), longer.events.begin()));
}

TEST(Estimator, JitterAddsTwiceItsVariance) {
  const double sigma = 0.2;
  const auto batch = sample_biphoton(pdc_density(0.01, 10.0, 0.0, {}), 100000, 8);
  const auto bare = estimate_tau_stats(batch, 0.0, 0);
  const auto noisy = estimate_tau_stats(batch, sigma, 99);
  EXPECT_NEAR(noisy.var_tau - bare.var_tau, 2 * sigma * sigma, 3 * std::hypot(noisy.std_error, bare.std_error));
  const TemporalCovariance cov{0.01, 1e-4, 0, 0, 0};
  EXPECT_NEAR(noisy.var_tau, apply_jitter(cov, 2 * sigma * sigma).var_tau, 3 * noisy.std_error);
}

TEST(Estimator, UnbiasedVarianceOfKnownBatch) {
  EventBatch b;
  for (double t : {1.0, 2.0, 3.0, 4.0}) b.events.push_back({t, 0.0});
  const auto st = estimate_tau_stats(b, 0.0, 0);
  EXPECT_DOUBLE_EQ(st.var_tau, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(st.mean_tau, 2.5);
  EXPECT_EQ(st.count, 4u);
  // m4 = 2.5625, s^4 = 25/9, (m4 - (1/3) s^4) / 4
  EXPECT_NEAR(st.std_error, std::sqrt((2.5625 - 25.0 / 27.0) / 4.0), 1e-15);

  EventBatch one;
  one.events.push_back({1.0, 0.0});
  try {
    estimate_tau_stats(one, 0.0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BatchTooSmall);
  }
  EXPECT_THROW(estimate_tau_stats(b, -1.0, 0), Error);
}

TEST(EmpiricalWitness, EntangledPdcViolatesStrongly) {
  const double a = 0.01, b = 10.0;
  const DispersionKit kit{0.05, 0.0, 0.0};
  const auto before = estimate_tau_stats(sample_biphoton(pdc_density(a, b, kit.beta_L, {}), 20000, 1), 0, 0);
  const auto plus = estimate_tau_stats(sample_biphoton(pdc_density(a, b, kit.beta_L, kit), 20000, 2), 0, 0);
  const auto minus =
      estimate_tau_stats(sample_biphoton(pdc_density(a, b, kit.beta_L, kit.swapped()), 20000, 3), 0, 0);
  const auto w = empirical_witness(before, plus, minus, kit);
  EXPECT_TRUE(w.violated);
  EXPECT_GT(significance(w), 5.0);
  EXPECT_LT(w.product, 1.0);
  const auto analytic = evaluate_witness({0.01, 1e-4, 0, 0, 0}, kit);
  EXPECT_NEAR(w.rhs, analytic.rhs, 0.05 * analytic.rhs);
}

TEST(EmpiricalWitness, ClassicalStationaryDoesNot) {
  const auto m = classical_model(200.0);
  const DispersionKit kit{5.0, 0.0, 0.0};
  const auto before = estimate_tau_stats(sample_stationary(m, 20000, 1), 0, 0);
  const auto plus = estimate_tau_stats(sample_stationary(m, 20000, 2, kit), 0, 0);
  const auto minus = estimate_tau_stats(sample_stationary(m, 20000, 3, kit.swapped()), 0, 0);
  const auto w = empirical_witness(before, plus, minus, kit);
  EXPECT_FALSE(w.violated);
  EXPECT_LT(significance(w), 0.0);
}

TEST(EmpiricalWitness, NoDispersionGivesNoSignal) {
  const auto d = pdc_density(0.5, 3.0, 0.0, {}, 128);
  const auto before = estimate_tau_stats(sample_biphoton(d, 5000, 1), 0, 0);
  const auto plus = estimate_tau_stats(sample_biphoton(d, 5000, 2), 0, 0);
  const auto minus = estimate_tau_stats(sample_biphoton(d, 5000, 3), 0, 0);
  const auto w = empirical_witness(before, plus, minus, {});
  EXPECT_TRUE(std::isnan(w.product));
  EXPECT_LT(std::abs(significance(w)), 5.0);
}

TEST(EmpiricalWitness, DegenerateBefore) {
  EventBatch flat;
  for (int i = 0; i < 10; ++i) flat.events.push_back({1.0 * i, 1.0 * i});
  const auto st = estimate_tau_stats(flat, 0, 0);
  try {
    empirical_witness(st, st, st, {1.0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateState);
  }
}

TEST(Significance, ExactReports) {
  WitnessReport r;
  EXPECT_EQ(significance(r), 0.0);
  r.margin = 1.0;
  EXPECT_TRUE(std::isinf(significance(r)));
  r.margin_stderr = 0.5;
  EXPECT_EQ(significance(r), 2.0);
}

TEST(SampleStationary, PureBackgroundTriangle) {
  const FrequencyGrid g(256, 0.1);
  const auto s = gaussian_spectrum(g, 1.0, 1.0, 0.0);
  const StationaryPairModel m(s, s, CrossSpectrum::zero(g), 100.0, Regime::Classical);
  const auto batch = sample_stationary(m, 50000, 5);
  EXPECT_EQ(batch.window, 100.0);
  for (const auto& e : batch.events) {
    EXPECT_GE(e.t1, 0.0);
    EXPECT_LT(e.t1, 100.0);
    EXPECT_GE(e.t2, 0.0);
    EXPECT_LT(e.t2, 100.0);
  }
  const auto st = estimate_tau_stats(batch, 0, 0);
  EXPECT_NEAR(st.var_tau, 1e4 / 6.0, 3 * st.std_error);
}

TEST(SampleStationary, WindowedVarianceAndShear) {
  const auto m = classical_model(40.0);
  const auto predicted = windowed_covariance(m);
  const auto before = estimate_tau_stats(sample_stationary(m, 100000, 17), 0, 0);
  // Edge terms of relative order (signal width)/T sit on top of the statistical error.
  EXPECT_NEAR(before.var_tau, predicted.var_tau, 3 * before.std_error + 0.02 * predicted.var_tau);

  const DispersionKit kit{3.0, 0.5, -0.25};
  const auto after = estimate_tau_stats(sample_stationary(m, 100000, 18, kit), 0, 0);
  const auto sheared = shear_covariance(predicted, kit);
  EXPECT_NEAR(after.var_tau, sheared.var_tau, 3 * after.std_error + 0.02 * sheared.var_tau);
  EXPECT_NEAR(after.mean_tau, sheared.mean_tau, 4 * std::sqrt(after.var_tau / 1e5) + 0.02);
}

TEST(SampleStationary, CorrelatedEventsLandInWindow) {
  const FrequencyGrid g(1024, 0.05);
  const auto s = flat_spectrum(g, 0.01, 3.0);
  std::vector<std::complex<double>> x(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) x[k] = std::sqrt((1 + s[k]) * s[g.reflect(k)]);
  const StationaryPairModel m(s, s, {g, x}, 20.0, Regime::Quantum);
  const auto batch = sample_stationary(m, 20000, 3);
  for (const auto& e : batch.events) {
    ASSERT_GE(std::min(e.t1, e.t2), 0.0);
    ASSERT_LE(std::max(e.t1, e.t2), 20.0);
  }
  EXPECT_EQ(batch, sample_stationary(m, 20000, 3));
}

TEST(EventsCsv, RoundTripsBitExactly) {
  const auto b = sample_stationary(classical_model(40.0), 2000, 77, {}, "unit-test");
  std::stringstream ss;
  io::write_events_csv(ss, b);
  std::string first;
  std::getline(ss, first);
  EXPECT_EQ(first, "# seed=77 window_ps=40 source=unit-test");
  ss.seekg(0);
  const auto back = io::read_events_csv(ss);
  EXPECT_EQ(back, b);

  std::stringstream missing("t1_ps,t2_ps\n1,2\n");
  EXPECT_THROW(io::read_events_csv(missing), Error);
  std::stringstream ragged("# seed=1 window_ps=0 source=x\nt1_ps,t2_ps\n1\n");
  EXPECT_THROW(io::read_events_csv(ragged), Error);
}

TEST(SampleGaussian, ShearedMomentsMatchClosedForm) {
  const TemporalCovariance cov{2.0, 0.5, 0.6, 1.0, 0.3};
  const DispersionKit kit{1.5, 0.4, -0.2};
  const std::size_t n = 200000;
  const auto b = sample_gaussian(cov, n, 12);
  const auto sheared = sample_gaussian(cov, n, 12, kit);
  const double s = 2.0 * kit.beta_L;
  const double var = cov.var_tau + s * s * cov.var_omega + 2.0 * s * cov.cov_tau_omega;
  const double mean = cov.mean_tau + kit.delay_1 - kit.delay_2 + s * cov.mean_omega;

  const auto st0 = estimate_tau_stats(b, 0.0, 0);
  EXPECT_NEAR(st0.var_tau, cov.var_tau, 3.0 * st0.std_error);
  const auto st = estimate_tau_stats(sheared, 0.0, 0);
  EXPECT_NEAR(st.var_tau, var, 3.0 * st.std_error);
  EXPECT_NEAR(st.mean_tau, mean, 3.0 * std::sqrt(var / n));
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(sheared.events[i].t1, -sheared.events[i].t2);
  EXPECT_EQ(sheared, sample_gaussian(cov, n, 12, kit));
  EXPECT_THROW(sample_gaussian(cov, 0, 1), Error);
}
