#pragma once
// Coincidence statistics of time-stationary Gaussian two-beam states.
//
// Integrating the Wick-form Wigner function over both frequencies gives a
// coincidence-rate density with two parts: a constant background
// B = I1 * I2 from the product of the individual spectra, and a correlated
// term |g(t1 - t2)|^2 with g(tau) = (1/2pi) int S12(w) exp(-i w tau) dw.
// The delta(w1 + w2) factor of the correlated term is consumed by the
// frequency integral and never placed on a grid.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ndc/error.hpp"
#include "ndc/fft.hpp"
#include "ndc/grid.hpp"
#include "ndc/moments.hpp"
#include "ndc/spectral.hpp"

namespace ndc {

enum class Regime { Quantum, Classical };

constexpr const char* to_string(Regime r) { return r == Regime::Classical ? "classical" : "quantum"; }

class StationaryPairModel {
 public:
  /// Validates that the spectra share a grid, the window is positive and
  /// the cross spectrum passes the admissibility check of `regime`.
  StationaryPairModel(SpectralModel s1, SpectralModel s2, CrossSpectrum x, double window, Regime regime)
      : s1_(std::move(s1)), s2_(std::move(s2)), x_(std::move(x)), window_(window), regime_(regime) {
    detail::require(std::isfinite(window) && window > 0.0, ErrorCode::InvalidArgument,
                    "window must be positive");
    const auto rep = regime == Regime::Classical ? classical_admissible(s1_, s2_, x_)
                                                 : quantum_admissible(s1_, s2_, x_);
    detail::require(rep.ok, ErrorCode::InvalidArgument,
                    std::string("cross spectrum is not ") + to_string(regime) + "ly admissible (ratio " +
                        std::to_string(rep.worst_ratio) + " at w = " + std::to_string(rep.worst_omega) + ")");
  }

  /// Picks the classical regime when the classical bound holds, the quantum
  /// one when only the quantum bound holds, and rejects the model otherwise.
  static StationaryPairModel with_inferred_regime(SpectralModel s1, SpectralModel s2, CrossSpectrum x,
                                                  double window) {
    const bool classical = classical_admissible(s1, s2, x).ok;
    return {std::move(s1), std::move(s2), std::move(x), window,
            classical ? Regime::Classical : Regime::Quantum};
  }

  const SpectralModel& s1() const { return s1_; }
  const SpectralModel& s2() const { return s2_; }
  const CrossSpectrum& cross() const { return x_; }
  double window() const { return window_; }
  Regime regime() const { return regime_; }
  const FrequencyGrid& grid() const { return s1_.grid(); }

 private:
  SpectralModel s1_, s2_;
  CrossSpectrum x_;
  double window_;
  Regime regime_;
};

/// Signal profile |g(tau)|^2 on the conjugate time grid plus a flat background.
struct TauDensity {
  FrequencyGrid grid;          // time samples are grid.time(j)
  std::vector<double> signal;  // (photons/ps)^2
  double background = 0.0;     // (photons/ps)^2
  double window = 0.0;         // ps

  double dt() const { return grid.dt(); }
  double tau(std::size_t j) const { return grid.time(j); }
};

struct SignalStats {
  double integral = 0.0;  // int signal dtau
  double mean = 0.0;
  double variance = 0.0;
  double rms_width() const { return std::sqrt(variance); }
};

inline SignalStats signal_stats(const TauDensity& d) {
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t j = 0; j < d.signal.size(); ++j) {
    s0 += d.signal[j];
    s1 += d.signal[j] * d.tau(j);
  }
  SignalStats st;
  st.integral = s0 * d.dt();
  if (s0 <= 0.0) return st;
  st.mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < d.signal.size(); ++j) {
    const double x = d.tau(j) - st.mean;
    s2 += d.signal[j] * x * x;
  }
  st.variance = s2 / s0;
  return st;
}

inline TauDensity coincidence_profile(const StationaryPairModel& m) {
  const auto g = fft::to_time_1d(m.cross().values(), m.grid().domega());
  TauDensity d{m.grid(), std::vector<double>(g.size()), intensity(m.s1()) * intensity(m.s2()), m.window()};
  for (std::size_t j = 0; j < g.size(); ++j) d.signal[j] = std::norm(g[j]);
  return d;
}

struct WindowedTauStats {
  double variance = 0.0;         // ps^2
  double mean = 0.0;             // ps
  double signal_fraction = 0.0;  // share of coincidences in the correlated term
};

/// Minimum window length in units of the signal RMS width.
inline constexpr double kMinWindowWidths = 6.0;

/// Time-difference statistics of events in [0, T]^2 drawn from B + signal(t1 - t2).
/// Background pairs give a triangular tau distribution on [-T, T] (variance
/// T^2/6) with weight B T^2; the signal contributes weight T * int signal.
/// Edge corrections of relative order (signal width)/T are neglected.
inline WindowedTauStats windowed_tau_variance(const TauDensity& d) {
  const double T = d.window;
  detail::require(std::isfinite(T) && T > 0.0, ErrorCode::InvalidArgument, "window must be positive");
  const auto st = signal_stats(d);
  const double reach = std::sqrt(st.variance + st.mean * st.mean);
  detail::require(T >= kMinWindowWidths * reach, ErrorCode::WindowTooSmall,
                  "window " + std::to_string(T) + " ps is shorter than " +
                      std::to_string(kMinWindowWidths) + " signal widths (" + std::to_string(reach) + " ps)");
  const double wb = d.background * T * T;
  const double ws = T * st.integral;
  detail::require(wb + ws > 0.0, ErrorCode::DegenerateState, "no coincidences: zero background and signal");
  const double f = ws / (wb + ws);
  WindowedTauStats out;
  out.signal_fraction = f;
  out.mean = f * st.mean;
  const double second = (1.0 - f) * T * T / 6.0 + f * (st.variance + st.mean * st.mean);
  out.variance = second - out.mean * out.mean;
  return out;
}

/// Cross spectrum saturating the classical bound, in the classical regime.
inline StationaryPairModel classical_extremal_model(const SpectralModel& s1, const SpectralModel& s2, double window) {
  return {s1, s2, max_classical_cross(s1, s2), window, Regime::Classical};
}

/// Windowed (tau, Omega) covariance of the model as a mixture: background
/// pairs draw w1 ~ S1 and w2 ~ S2 independently, correlated pairs have
/// Omega = 0 exactly.
inline TemporalCovariance windowed_covariance(const StationaryPairModel& m) {
  const auto profile = coincidence_profile(m);
  const auto stats = windowed_tau_variance(profile);
  const auto sig = signal_stats(profile);
  const auto m1 = spectral_moments(m.s1());
  const auto m2 = spectral_moments(m.s2());
  const double fb = 1.0 - stats.signal_fraction;
  const double mean_b = m1.mean + m2.mean;
  TemporalCovariance c;
  c.var_tau = stats.variance;
  c.mean_tau = stats.mean;
  c.mean_omega = fb * mean_b;
  c.var_omega = fb * (m1.variance + m2.variance + mean_b * mean_b) - c.mean_omega * c.mean_omega;
  c.cov_tau_omega = -stats.signal_fraction * fb * sig.mean * mean_b;
  return c;
}

}  // namespace ndc
