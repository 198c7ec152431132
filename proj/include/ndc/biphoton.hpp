#pragma once
// Two-photon spectral amplitude psi(w1, w2), its dispersive propagation, the
// joint detection-time density and the (tau, Omega) moments extracted from it.
//
// The amplitude is stored in sum / half-difference coordinates
//
//   Omega = w1 + w2          (rows)     <->  T   = (t1 + t2) / 2
//   delta = (w1 - w2) / 2    (columns)  <->  tau = t1 - t2
//
// Both changes of variable have unit Jacobian and w1 t1 + w2 t2 = Omega T +
// delta tau, so the two-axis Fourier transform is unchanged. Each axis gets
// its own spacing: a down-conversion ridge of pump width a and phase-matching
// width b needs to resolve a and b simultaneously, which a square (w1, w2)
// grid cannot do once b/a exceeds the grid size.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ndc/error.hpp"
#include "ndc/fft.hpp"
#include "ndc/grid.hpp"
#include "ndc/moments.hpp"

namespace ndc {

struct PairGrid {
  FrequencyGrid sum;   // Omega axis
  FrequencyGrid diff;  // delta axis

  std::size_t rows() const { return sum.size(); }
  std::size_t cols() const { return diff.size(); }
  std::size_t cells() const { return rows() * cols(); }

  double omega1(std::size_t r, std::size_t c) const { return 0.5 * sum.omega(r) + diff.omega(c); }
  double omega2(std::size_t r, std::size_t c) const { return 0.5 * sum.omega(r) - diff.omega(c); }
  double t1(std::size_t r, std::size_t c) const { return sum.time(r) + 0.5 * diff.time(c); }
  double t2(std::size_t r, std::size_t c) const { return sum.time(r) - 0.5 * diff.time(c); }

  friend bool operator==(const PairGrid&, const PairGrid&) = default;
};

namespace detail {

// Largest spacing that keeps >= 3.2 samples per frequency sigma and a time
// half-span of 20 temporal sigmas; falls back to balancing the two coverages
// when that would leave fewer than 8 sigmas in frequency.
inline double axis_spacing(double sigma_f, double sigma_t, std::size_t n) {
  double d = std::min(sigma_f / 3.2, std::numbers::pi / (20.0 * sigma_t));
  if (static_cast<double>(n) * d / 2.0 < 8.0 * sigma_f)
    d = std::sqrt(2.0 * std::numbers::pi * sigma_f / (static_cast<double>(n) * sigma_t));
  return d;
}

}  // namespace detail

/// Grid sized for a down-conversion amplitude of pump width `a` and
/// phase-matching width `b` that will be propagated with |beta_L| up to
/// `beta_L_max`.
inline PairGrid pdc_grid(double a, double b, double beta_L_max, std::size_t n) {
  detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b), ErrorCode::InvalidArgument,
                  "pump and phase-matching widths must be positive");
  const double bl = std::abs(beta_L_max);
  const double sigma_T = std::sqrt(0.25 / (a * a) + bl * bl * b * b);
  const double sigma_tau = std::sqrt(1.0 / (b * b) + 4.0 * bl * bl * a * a);
  return {FrequencyGrid(n, detail::axis_spacing(a, sigma_T, n)),
          FrequencyGrid(n, detail::axis_spacing(0.5 * b, sigma_tau, n))};
}

/// Complex amplitude on a PairGrid, row-major (rows = Omega), normalized so
/// that sum |psi|^2 dOmega ddelta = 1.
class BiphotonAmplitude {
 public:
  /// Normalizes `values`; rejects non-finite or all-zero input.
  static BiphotonAmplitude normalized(PairGrid grid, std::vector<std::complex<double>> values) {
    detail::require(values.size() == grid.cells(), ErrorCode::InvalidArgument,
                    "amplitude size does not match its grid");
    double norm = 0.0;
    for (const auto& v : values) {
      detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::InvalidArgument,
                      "amplitude values must be finite");
      norm += std::norm(v);
    }
    norm *= grid.sum.domega() * grid.diff.domega();
    detail::require(norm > 0.0, ErrorCode::InvalidArgument, "amplitude is identically zero");
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& v : values) v *= scale;
    return BiphotonAmplitude(grid, std::move(values));
  }

  const PairGrid& grid() const { return grid_; }
  const std::vector<std::complex<double>>& values() const { return values_; }
  std::complex<double> at(std::size_t r, std::size_t c) const { return values_[r * grid_.cols() + c]; }

  double norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s * grid_.sum.domega() * grid_.diff.domega();
  }

 private:
  BiphotonAmplitude(PairGrid grid, std::vector<std::complex<double>> values)
      : grid_(grid), values_(std::move(values)) {}

  friend BiphotonAmplitude apply_dispersion_phase(const BiphotonAmplitude&, const DispersionKit&);

  PairGrid grid_;
  std::vector<std::complex<double>> values_;
};

/// |A(t1, t2)|^2 on the conjugate (T, tau) grid, normalized to unit mass.
struct JointTemporalDensity {
  PairGrid grid;
  std::vector<double> values;  // rows = T, cols = tau
  double raw_norm = 0.0;       // (2 pi)^2 sum |A|^2 dT dtau before renormalization

  double cell_area() const { return grid.sum.dt() * grid.diff.dt(); }
  double at(std::size_t r, std::size_t c) const { return values[r * grid.cols() + c]; }
};

/// Down-conversion amplitude exp(-Omega^2/(4a^2)) exp(-(w1 - w2)^2/(4b^2)):
/// Var(Omega) = a^2 and Var(w1 - w2) = b^2 under |psi|^2.
inline BiphotonAmplitude build_pdc_amplitude(const PairGrid& grid, double a, double b) {
  detail::require(std::isfinite(a) && a > 0.0, ErrorCode::InvalidArgument, "pump width must be positive");
  detail::require(std::isfinite(b) && b > 0.0, ErrorCode::InvalidArgument,
                  "phase-matching width must be positive");
  auto check_axis = [](const FrequencyGrid& g, double sigma, const char* name) {
    const double half_span = g.span() / 2.0;
    detail::require(3.0 * sigma < half_span, ErrorCode::GridTooNarrow,
                    std::string(name) + " axis: 3*sigma/half-span = " + std::to_string(3.0 * sigma / half_span));
    detail::require(g.domega() < sigma / 3.0, ErrorCode::GridTooCoarse,
                    std::string(name) + " axis: spacing/sigma = " + std::to_string(g.domega() / sigma) +
                        " (needs < 1/3)");
  };
  check_axis(grid.sum, a, "sum-frequency");
  check_axis(grid.diff, 0.5 * b, "difference-frequency");

  std::vector<std::complex<double>> v(grid.cells());
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    const double W = grid.sum.omega(r);
    const double pump = -W * W / (4.0 * a * a);
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const double d = grid.diff.omega(c);
      v[r * grid.cols() + c] = std::exp(pump - d * d / (b * b));
    }
  }
  return BiphotonAmplitude::normalized(grid, std::move(v));
}

/// Multiplies by exp(i[beta_L w1^2 - beta_L w2^2 + delay_1 w1 + delay_2 w2]).
/// In grid coordinates the quadratic part is the bilinear 2 beta_L Omega delta.
inline BiphotonAmplitude apply_dispersion_phase(const BiphotonAmplitude& psi, const DispersionKit& kit) {
  detail::require_valid(kit);
  const auto& g = psi.grid();
  std::vector<std::complex<double>> v(psi.values());
  const double dsum = 0.5 * (kit.delay_1 + kit.delay_2);
  const double ddiff = kit.delay_1 - kit.delay_2;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const double W = g.sum.omega(r);
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const double d = g.diff.omega(c);
      const double phase = 2.0 * kit.beta_L * W * d + dsum * W + ddiff * d;
      v[r * g.cols() + c] *= std::polar(1.0, phase);
    }
  }
  return BiphotonAmplitude(g, std::move(v));
}

inline JointTemporalDensity to_time_domain(const BiphotonAmplitude& psi) {
  const auto& g = psi.grid();
  const auto amp = fft::to_time_2d(psi.values(), g.rows(), g.cols(), g.sum.domega(), g.diff.domega());
  JointTemporalDensity d{g, std::vector<double>(amp.size()), 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    d.values[i] = std::norm(amp[i]);
    total += d.values[i];
  }
  total *= d.cell_area();
  d.raw_norm = total * 4.0 * std::numbers::pi * std::numbers::pi;
  const double scale = 1.0 / total;
  for (auto& p : d.values) p *= scale;
  return d;
}

struct AxisMoments {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {

inline AxisMoments weighted_moments(std::span<const double> w, const FrequencyGrid& g, bool time_axis) {
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    s0 += w[k];
    s1 += w[k] * (time_axis ? g.time(k) : g.omega(k));
  }
  const double mean = s1 / s0;
  double s2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double x = (time_axis ? g.time(k) : g.omega(k)) - mean;
    s2 += w[k] * x * x;
  }
  return {mean, s2 / s0};
}

}  // namespace detail

/// Marginal of the density along tau (summed over T), per cell.
inline std::vector<double> tau_marginal(const JointTemporalDensity& d) {
  std::vector<double> m(d.grid.cols(), 0.0);
  for (std::size_t r = 0; r < d.grid.rows(); ++r)
    for (std::size_t c = 0; c < d.grid.cols(); ++c) m[c] += d.at(r, c);
  return m;
}

inline AxisMoments tau_moments(const JointTemporalDensity& d) {
  return detail::weighted_moments(tau_marginal(d), d.grid.diff, true);
}

/// Fraction of probability within `pixels` cells of any edge of the time grid.
inline double edge_mass_fraction(const JointTemporalDensity& d, std::size_t pixels = 2) {
  const std::size_t R = d.grid.rows(), C = d.grid.cols();
  double edge = 0.0, total = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    const bool r_edge = r < pixels || r + pixels >= R;
    for (std::size_t c = 0; c < C; ++c) {
      const double p = d.at(r, c);
      total += p;
      if (r_edge || c < pixels || c + pixels >= C) edge += p;
    }
  }
  return edge / total;
}

/// Mean and variance of Omega under |psi|^2.
inline AxisMoments sum_frequency_moments(const BiphotonAmplitude& psi) {
  const auto& g = psi.grid();
  std::vector<double> m(g.rows(), 0.0);
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) m[r] += std::norm(psi.at(r, c));
  return detail::weighted_moments(m, g.sum, false);
}

/// Threshold on wrapped mass that flags an under-sized time grid.
inline constexpr double kWrapTolerance = 1e-6;

/// (tau, Omega) covariance of the amplitude. Omega moments come from |psi|^2,
/// tau moments from the joint temporal density, and the mixed covariance from
/// symmetric dispersion probes: Var_tau(+eps) - Var_tau(-eps) = 8 eps cov.
inline TemporalCovariance amplitude_moments(const BiphotonAmplitude& psi) {
  const auto omega = sum_frequency_moments(psi);
  const auto density = to_time_domain(psi);
  const double wrapped = edge_mass_fraction(density);
  detail::require(wrapped < kWrapTolerance, ErrorCode::GridTooCoarse,
                  "temporal density wraps around the time grid (edge mass " + std::to_string(wrapped) + ")");
  const auto tau = tau_moments(density);

  TemporalCovariance cov;
  cov.var_tau = tau.variance;
  cov.mean_tau = tau.mean;
  cov.var_omega = omega.variance;
  cov.mean_omega = omega.mean;
  if (omega.variance > 0.0 && tau.variance > 0.0) {
    const double eps = 1e-3 * std::sqrt(tau.variance / omega.variance);
    const double vp = tau_moments(to_time_domain(apply_dispersion_phase(psi, {eps, 0.0, 0.0}))).variance;
    const double vm = tau_moments(to_time_domain(apply_dispersion_phase(psi, {-eps, 0.0, 0.0}))).variance;
    cov.cov_tau_omega = (vp - vm) / (8.0 * eps);
  }
  return cov;
}

}  // namespace ndc
