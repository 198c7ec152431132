#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "ndc/error.hpp"

namespace ndc {

/// Uniform detuning grid w_k = (k - n/2) * domega, k = 0..n-1.
///
/// The conjugate time grid t_j = (j - n/2) * dt uses dt = 2 pi / (n domega).
class FrequencyGrid {
 public:
  FrequencyGrid(std::size_t n, double domega) : n_(n), domega_(domega) {
    detail::require(n >= 8 && (n & (n - 1)) == 0, ErrorCode::InvalidArgument,
                    "grid size must be a power of two >= 8, got " + std::to_string(n));
    detail::require(std::isfinite(domega) && domega > 0.0, ErrorCode::InvalidArgument,
                    "grid spacing must be positive");
  }

  std::size_t size() const { return n_; }
  double domega() const { return domega_; }
  double dt() const { return 2.0 * std::numbers::pi / (static_cast<double>(n_) * domega_); }

  double omega(std::size_t k) const { return (static_cast<double>(k) - static_cast<double>(n_ / 2)) * domega_; }
  double time(std::size_t j) const { return (static_cast<double>(j) - static_cast<double>(n_ / 2)) * dt(); }

  double omega_min() const { return omega(0); }
  double omega_max() const { return omega(n_ - 1); }
  double span() const { return static_cast<double>(n_) * domega_; }

  /// Index of -w_k. The lower endpoint -n/2*domega has no partner and maps to itself.
  std::size_t reflect(std::size_t k) const { return k == 0 ? 0 : n_ - k; }

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::size_t n_;
  double domega_;
};

}  // namespace ndc
