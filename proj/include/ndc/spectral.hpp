#pragma once
// Spectra of the time-stationary Gaussian two-beam class: the phase-insensitive
// autocorrelation spectra S1, S2 and the phase-sensitive cross spectrum S12,
// with the quantum and classical admissibility bounds on |S12|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "ndc/error.hpp"
#include "ndc/grid.hpp"

namespace ndc {

/// Non-negative real spectrum S_j(w) sampled on a FrequencyGrid.
class SpectralModel {
 public:
  SpectralModel(FrequencyGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    detail::require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
                    "spectrum length does not match its grid");
    for (double v : values_)
      detail::require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
                      "spectral values must be finite and non-negative");
  }

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Complex phase-sensitive cross spectrum S12(w).
class CrossSpectrum {
 public:
  CrossSpectrum(FrequencyGrid grid, std::vector<std::complex<double>> values)
      : grid_(grid), values_(std::move(values)) {
    detail::require(values_.size() == grid_.size(), ErrorCode::InvalidArgument,
                    "cross spectrum length does not match its grid");
    for (const auto& v : values_)
      detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::InvalidArgument,
                      "cross spectrum values must be finite");
  }

  static CrossSpectrum zero(FrequencyGrid grid) {
    return {grid, std::vector<std::complex<double>>(grid.size())};
  }

  CrossSpectrum scaled(double c) const {
    auto v = values_;
    for (auto& x : v) x *= c;
    return {grid_, std::move(v)};
  }

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<std::complex<double>>& values() const { return values_; }
  std::complex<double> operator[](std::size_t k) const { return values_[k]; }

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> values_;
};

struct AdmissibilityReport {
  bool ok = true;
  double worst_ratio = 0.0;  // max |S12|^2 / bound; +inf when a zero bound carries signal
  double worst_omega = 0.0;  // rad/ps
};

/// Slack on the admissibility bound so that saturating constructions pass.
inline constexpr double kAdmissibilitySlack = 1e-9;

inline SpectralModel gaussian_spectrum(const FrequencyGrid& grid, double peak, double sigma, double center) {
  detail::require(std::isfinite(peak) && peak >= 0.0, ErrorCode::InvalidArgument,
                  "spectral peak must be non-negative");
  detail::require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::InvalidArgument,
                  "spectral width must be positive");
  detail::require(std::isfinite(center), ErrorCode::InvalidArgument, "spectral center must be finite");
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = (grid.omega(k) - center) / sigma;
    v[k] = peak * std::exp(-0.5 * x * x);
  }
  return {grid, std::move(v)};
}

/// Constant `level` for |w| <= half_width, zero outside.
inline SpectralModel flat_spectrum(const FrequencyGrid& grid, double level, double half_width) {
  detail::require(std::isfinite(level) && level >= 0.0, ErrorCode::InvalidArgument,
                  "flat spectrum level must be non-negative");
  detail::require(half_width > 0.0, ErrorCode::InvalidArgument, "flat spectrum width must be positive");
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::abs(grid.omega(k)) <= half_width ? level : 0.0;
  return {grid, std::move(v)};
}

/// Photon flux (1/2pi) * integral of S(w) dw, in photons/ps.
inline double intensity(const SpectralModel& s) {
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return sum * s.grid().domega() / (2.0 * std::numbers::pi);
}

namespace detail {

inline void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b) {
  require(a == b, ErrorCode::GridMismatch, "spectra are defined on different frequency grids");
}

template <class BoundFn>
AdmissibilityReport check_cross_bound(const SpectralModel& s1, const SpectralModel& s2,
                                      const CrossSpectrum& x, BoundFn bound_at) {
  require_same_grid(s1.grid(), s2.grid());
  require_same_grid(s1.grid(), x.grid());
  const auto& grid = s1.grid();
  AdmissibilityReport rep;
  rep.worst_omega = grid.omega(grid.size() / 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x2 = std::norm(x[k]);
    const double bound = bound_at(k, grid.reflect(k));
    double ratio = 0.0;
    if (bound > 0.0)
      ratio = x2 / bound;
    else if (x2 > 0.0)
      ratio = std::numeric_limits<double>::infinity();
    if (x2 > bound * (1.0 + kAdmissibilitySlack)) rep.ok = false;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_omega = grid.omega(k);
    }
  }
  return rep;
}

}  // namespace detail

/// Quantum bound |S12(w)|^2 <= [1 + S1(w)] S2(-w).
inline AdmissibilityReport quantum_admissible(const SpectralModel& s1, const SpectralModel& s2,
                                              const CrossSpectrum& x) {
  return detail::check_cross_bound(s1, s2, x, [&](std::size_t k, std::size_t mk) {
    return (1.0 + s1[k]) * s2[mk];
  });
}

/// Classical (commuting fields) bound |S12(w)|^2 <= S1(w) S2(-w).
inline AdmissibilityReport classical_admissible(const SpectralModel& s1, const SpectralModel& s2,
                                                const CrossSpectrum& x) {
  return detail::check_cross_bound(s1, s2, x, [&](std::size_t k, std::size_t mk) {
    return s1[k] * s2[mk];
  });
}

/// Largest cross spectrum classical fields allow: sqrt(S1(w) S2(-w)), real.
inline CrossSpectrum max_classical_cross(const SpectralModel& s1, const SpectralModel& s2) {
  detail::require_same_grid(s1.grid(), s2.grid());
  const auto& grid = s1.grid();
  std::vector<std::complex<double>> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sqrt(s1[k] * s2[grid.reflect(k)]);
  return {grid, std::move(v)};
}

/// Mean and variance of w under the spectrum viewed as a distribution.
/// Returns {0, 0} for an all-zero spectrum.
struct SpectralMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline SpectralMoments spectral_moments(const SpectralModel& s) {
  double w0 = 0.0, w1 = 0.0, w2 = 0.0;
  for (std::size_t k = 0; k < s.values().size(); ++k) {
    const double w = s.grid().omega(k);
    w0 += s[k];
    w1 += s[k] * w;
    w2 += s[k] * w * w;
  }
  if (w0 <= 0.0) return {};
  const double mean = w1 / w0;
  return {mean, std::max(0.0, w2 / w0 - mean * mean)};
}

}  // namespace ndc
