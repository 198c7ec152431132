#pragma once
// Monte Carlo joint detection events (t1, t2) from a biphoton temporal density
// or a stationary signal-plus-background model, and time-difference
// estimators with their statistical uncertainty.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndc/biphoton.hpp"
#include "ndc/error.hpp"
#include "ndc/moments.hpp"
#include "ndc/rng.hpp"
#include "ndc/stationary.hpp"

namespace ndc {

struct Event {
  double t1 = 0.0;  // ps
  double t2 = 0.0;  // ps

  double tau() const { return t1 - t2; }
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventBatch {
  std::vector<Event> events;
  std::uint64_t seed = 0;
  double window = 0.0;  // ps; 0 when events are not confined to [0, window]
  std::string source;

  std::size_t size() const { return events.size(); }
  friend bool operator==(const EventBatch&, const EventBatch&) = default;
};

struct TauStats {
  double var_tau = 0.0;  // unbiased, ps^2
  double std_error = 0.0;  // standard error of var_tau, ps^2
  double mean_tau = 0.0;
  std::size_t count = 0;
};

/// Inverse-CDF sampling of a cell index from non-negative weights.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights) : cdf_(weights.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += std::max(0.0, weights[i]);
      cdf_[i] = acc;
    }
    detail::require(acc > 0.0, ErrorCode::InvalidArgument, "cannot sample from an all-zero distribution");
  }

  /// Index of the cell containing u * total, for u in [0, 1).
  std::size_t index(double u) const {
    const double target = u * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

/// n independent draws from p(T, tau) with uniform placement inside each cell.
inline EventBatch sample_biphoton(const JointTemporalDensity& d, std::size_t n, std::uint64_t seed,
                                  std::string source = "biphoton") {
  detail::require(n >= 1, ErrorCode::InvalidArgument, "need at least one event");
  const DiscreteSampler cells(d.values);
  const double dT = d.grid.sum.dt();
  const double dtau = d.grid.diff.dt();
  EventBatch b{std::vector<Event>(n), seed, 0.0, std::move(source)};
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream s(seed, "biphoton", i);
    const std::size_t cell = cells.index(s.uniform());
    const std::size_t r = cell / d.grid.cols();
    const std::size_t c = cell % d.grid.cols();
    const double T = d.grid.sum.time(r) + (s.uniform() - 0.5) * dT;
    const double tau = d.grid.diff.time(c) + (s.uniform() - 0.5) * dtau;
    b.events[i] = {T + 0.5 * tau, T - 0.5 * tau};
  }
  return b;
}

namespace detail {

inline double draw_on_grid(const DiscreteSampler& ds, const FrequencyGrid& g, rng::Stream& s, bool time_axis) {
  const std::size_t k = ds.index(s.uniform());
  const double step = time_axis ? g.dt() : g.domega();
  return (time_axis ? g.time(k) : g.omega(k)) + (s.uniform() - 0.5) * step;
}

inline bool is_identity(const DispersionKit& k) {
  return k.beta_L == 0.0 && k.delay_1 == 0.0 && k.delay_2 == 0.0;
}

}  // namespace detail

/// Events from a stationary model observed through shutters open on [0, T].
///
/// Each event is background with probability 1 - signal_fraction (t1, t2
/// independent uniform on the window) or correlated (tau from the signal
/// profile, mean time uniform, re-drawn until both times fall in the window).
/// A non-identity `kit` applies the chronocyclic shear per event: background
/// pairs carry w1 ~ S1 and w2 ~ S2, correlated pairs carry w and -w with
/// w ~ |S12|^2. Propagated batches are not confined to the window.
inline EventBatch sample_stationary(const StationaryPairModel& m, std::size_t n, std::uint64_t seed,
                                    const DispersionKit& kit = {}, std::string source = "stationary") {
  detail::require(n >= 1, ErrorCode::InvalidArgument, "need at least one event");
  detail::require_valid(kit);
  const auto profile = coincidence_profile(m);
  const double f = windowed_tau_variance(profile).signal_fraction;
  const double T = m.window();
  const bool propagate = !detail::is_identity(kit);
  const auto& grid = m.grid();

  std::vector<double> pair_weights(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) pair_weights[k] = std::norm(m.cross()[k]);

  std::optional<DiscreteSampler> tau_dist, w1_dist, w2_dist, pair_dist;
  if (f > 0.0) {
    tau_dist.emplace(profile.signal);
    if (propagate) pair_dist.emplace(pair_weights);
  }
  if (f < 1.0 && propagate) {
    w1_dist.emplace(m.s1().values());
    w2_dist.emplace(m.s2().values());
  }

  const double s = 2.0 * kit.beta_L;
  EventBatch b{std::vector<Event>(n), seed, propagate ? 0.0 : T, std::move(source)};
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream st(seed, "stationary", i);
    Event e;
    if (st.uniform() < f) {
      for (;;) {
        const double tau = detail::draw_on_grid(*tau_dist, grid, st, true);
        if (std::abs(tau) >= T) continue;
        // Both times land in [0, T] iff the mean time lies in [|tau|/2, T - |tau|/2].
        const double half = 0.5 * std::abs(tau);
        double mid = T * st.uniform();
        while (mid < half || mid > T - half) mid = T * st.uniform();
        e = {mid + 0.5 * tau, mid - 0.5 * tau};
        break;
      }
      if (propagate) {
        const double w = detail::draw_on_grid(*pair_dist, grid, st, false);
        e.t1 += kit.delay_1 + s * w;
        e.t2 += kit.delay_2 + s * w;
      }
    } else {
      e = {T * st.uniform(), T * st.uniform()};
      if (propagate) {
        const double w1 = detail::draw_on_grid(*w1_dist, grid, st, false);
        const double w2 = detail::draw_on_grid(*w2_dist, grid, st, false);
        e.t1 += kit.delay_1 + s * w1;
        e.t2 += kit.delay_2 - s * w2;
      }
    }
    b.events[i] = e;
  }
  return b;
}

/// Events from a Gaussian state with the given (tau, Omega) second moments,
/// sheared one by one through `kit`. Only tau is modeled: events carry
/// t1 = tau/2, t2 = -tau/2.
inline EventBatch sample_gaussian(const TemporalCovariance& cov, std::size_t n, std::uint64_t seed,
                                  const DispersionKit& kit = {}, std::string source = "gaussian") {
  detail::require(n >= 1, ErrorCode::InvalidArgument, "need at least one event");
  detail::require_valid(cov);
  detail::require_valid(kit);
  // Cholesky factor of [[var_omega, cov], [cov, var_tau]], Omega first.
  const double l11 = std::sqrt(cov.var_omega);
  const double l21 = l11 > 0.0 ? cov.cov_tau_omega / l11 : 0.0;
  const double l22 = std::sqrt(std::max(0.0, cov.var_tau - l21 * l21));
  const double s = 2.0 * kit.beta_L;
  EventBatch b{std::vector<Event>(n), seed, 0.0, std::move(source)};
  for (std::size_t i = 0; i < n; ++i) {
    rng::Stream st(seed, "gaussian", i);
    const double z1 = st.normal(), z2 = st.normal();
    const double omega = cov.mean_omega + l11 * z1;
    const double tau = cov.mean_tau + l21 * z1 + l22 * z2 + kit.delay_1 - kit.delay_2 + s * omega;
    b.events[i] = {0.5 * tau, -0.5 * tau};
  }
  return b;
}

/// Unbiased tau variance after adding independent Gaussian jitter of std
/// `jitter_sigma` to every detection time. The standard error uses the
/// fourth central moment: Var(s^2) ~ (m4 - (n-3)/(n-1) s^4) / n.
inline TauStats estimate_tau_stats(const EventBatch& b, double jitter_sigma, std::uint64_t seed2) {
  const std::size_t n = b.size();
  detail::require(n >= 2, ErrorCode::BatchTooSmall, "need at least two events, got " + std::to_string(n));
  detail::require(std::isfinite(jitter_sigma) && jitter_sigma >= 0.0, ErrorCode::InvalidArgument,
                  "jitter sigma must be non-negative");
  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t1 = b.events[i].t1, t2 = b.events[i].t2;
    if (jitter_sigma > 0.0) {
      rng::Stream j1(seed2, "jitter/1", i), j2(seed2, "jitter/2", i);
      t1 += jitter_sigma * j1.normal();
      t2 += jitter_sigma * j2.normal();
    }
    tau[i] = t1 - t2;
  }
  double mean = 0.0;
  for (double x : tau) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : tau) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double nd = static_cast<double>(n);
  TauStats out;
  out.count = n;
  out.mean_tau = mean;
  out.var_tau = m2 / (nd - 1.0);
  m4 /= nd;
  const double s4 = out.var_tau * out.var_tau;
  out.std_error = std::sqrt(std::max(0.0, (m4 - (nd - 3.0) / (nd - 1.0) * s4) / nd));
  return out;
}

/// Witness from measured variances: before propagation and after each of the
/// two medium placements. The margin uncertainty propagates the standard
/// errors of all three variances.
///
/// The product field is var_tau(before) times the sum-frequency variance
/// implied by the measured broadening, (lhs - var_before) / (2 beta L)^2;
/// it is NaN when beta_L = 0.
inline WitnessReport empirical_witness(const TauStats& before, const TauStats& after_plus,
                                       const TauStats& after_minus, const DispersionKit& kit) {
  detail::require_valid(kit);
  const double v = before.var_tau;
  detail::require(v > 3.0 * before.std_error, ErrorCode::DegenerateState,
                  "pre-propagation variance is consistent with zero");
  const double s2 = 4.0 * kit.beta_L * kit.beta_L;
  WitnessReport r;
  r.lhs = 0.5 * (after_plus.var_tau + after_minus.var_tau);
  r.rhs = v + s2 / v;
  if (s2 > 0.0) {
    r.product = v * (r.lhs - v) / s2;
    r.margin = s2 * (1.0 - r.product) / v;
  } else {
    r.product = std::numeric_limits<double>::quiet_NaN();
    r.margin = r.rhs - r.lhs;
  }
  r.violated = r.margin > 0.0;
  const double se_lhs = 0.5 * std::hypot(after_plus.std_error, after_minus.std_error);
  const double se_rhs = std::abs(1.0 - s2 / (v * v)) * before.std_error;
  r.margin_stderr = std::hypot(se_lhs, se_rhs);
  return r;
}

/// Margin in units of its standard error; infinite for exact reports.
inline double significance(const WitnessReport& r) {
  if (r.margin_stderr > 0.0) return r.margin / r.margin_stderr;
  if (r.margin == 0.0) return 0.0;
  return r.margin > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace ndc
