#pragma once
// Second-moment propagation of the time difference tau = t1 - t2 and the sum
// frequency Omega = w1 + w2 through two media with opposite group velocity
// dispersion, plus the separability test and the broadening inequality built
// on top of it.
//
// Units: time in ps, angular frequency detuning in rad/ps, hbar = 1. The
// dispersion enters only through the lumped product beta*L (ps^2).

#include <algorithm>
#include <cmath>
#include <string>

#include "ndc/error.hpp"

namespace ndc {

/// Second moments of (tau, Omega) under the normalized two-beam Wigner
/// distribution. cov_tau_omega is the symmetric-ordered covariance.
struct TemporalCovariance {
  double var_tau = 0.0;        // ps^2
  double var_omega = 0.0;      // rad^2/ps^2
  double cov_tau_omega = 0.0;  // rad
  double mean_tau = 0.0;       // ps
  double mean_omega = 0.0;     // rad/ps

  friend bool operator==(const TemporalCovariance&, const TemporalCovariance&) = default;
};

/// Two-arm medium: arm 1 carries +beta, arm 2 carries -beta, both of length L.
struct DispersionKit {
  double beta_L = 0.0;   // ps^2
  double delay_1 = 0.0;  // L/v1, ps
  double delay_2 = 0.0;  // L/v2, ps

  /// Media exchanged between the arms.
  DispersionKit swapped() const { return {-beta_L, delay_2, delay_1}; }

  friend bool operator==(const DispersionKit&, const DispersionKit&) = default;
};

struct WitnessReport {
  double lhs = 0.0;      // symmetrized post-propagation variance, ps^2
  double rhs = 0.0;      // separable lower bound, ps^2
  double margin = 0.0;   // rhs - lhs; positive means violation
  bool violated = false;
  double product = 0.0;  // var_tau * var_omega (dimensionless)
  double margin_stderr = 0.0;  // zero for analytic reports
};

struct SeparabilityVerdict {
  double product = 0.0;
  bool separable_consistent = true;
};

struct FeasibilityReport {
  bool linewidth_ok = false;
  bool dispersion_ok = false;
  double linewidth_product = 0.0;  // var_omega * jitter_var, wants << 1
  double dispersion_ratio = 0.0;   // |2 beta L| / (var_tau + jitter_var), wants >= 1
};

/// Relative slack on the Cauchy-Schwarz check, absorbing rounding at saturation.
inline constexpr double kCauchySchwarzSlack = 1e-9;

inline bool is_valid(const TemporalCovariance& c) {
  const bool finite = std::isfinite(c.var_tau) && std::isfinite(c.var_omega) &&
                      std::isfinite(c.cov_tau_omega) && std::isfinite(c.mean_tau) &&
                      std::isfinite(c.mean_omega);
  if (!finite || c.var_tau < 0.0 || c.var_omega < 0.0) return false;
  return c.cov_tau_omega * c.cov_tau_omega <=
         c.var_tau * c.var_omega * (1.0 + kCauchySchwarzSlack);
}

inline bool is_valid(const DispersionKit& k) {
  return std::isfinite(k.beta_L) && std::isfinite(k.delay_1) && std::isfinite(k.delay_2);
}

namespace detail {

inline void require_valid(const TemporalCovariance& c) {
  require(is_valid(c), ErrorCode::InvalidArgument,
          "temporal covariance must be finite, with non-negative variances and "
          "cov^2 <= var_tau*var_omega");
}

inline void require_valid(const DispersionKit& k) {
  require(is_valid(k), ErrorCode::InvalidArgument, "dispersion kit must be finite");
}

}  // namespace detail

/// Covariance after propagation. Each arrival time is sheared by
/// t_j -> t_j + delay_j + 2 beta_j L w_j, frequencies untouched, so
/// tau -> tau + (delay_1 - delay_2) + 2 beta L Omega.
inline TemporalCovariance shear_covariance(const TemporalCovariance& cov, const DispersionKit& kit) {
  detail::require_valid(cov);
  detail::require_valid(kit);
  const double s = 2.0 * kit.beta_L;
  TemporalCovariance out = cov;
  out.var_tau = cov.var_tau + 2.0 * s * cov.cov_tau_omega + s * s * cov.var_omega;
  out.cov_tau_omega = cov.cov_tau_omega + s * cov.var_omega;
  out.mean_tau = cov.mean_tau + kit.delay_1 - kit.delay_2 + s * cov.mean_omega;
  // Near-saturated inputs can cancel almost completely; rounding must not
  // push the result outside the valid cone.
  out.var_tau = std::max(0.0, out.var_tau);
  const double bound = std::sqrt(out.var_tau * out.var_omega);
  out.cov_tau_omega = std::clamp(out.cov_tau_omega, -bound, bound);
  return out;
}

/// Mean of the post-propagation tau variance over the two medium placements.
/// The mixed term cancels, leaving var_tau + (2 beta L)^2 var_omega.
inline double symmetrized_variance(const TemporalCovariance& cov, const DispersionKit& kit) {
  detail::require_valid(cov);
  detail::require_valid(kit);
  const double s = 2.0 * kit.beta_L;
  return cov.var_tau + s * s * cov.var_omega;
}

/// Separable states obey var_tau * var_omega >= 1; the boundary counts as separable.
inline SeparabilityVerdict separability_check(const TemporalCovariance& cov) {
  detail::require_valid(cov);
  const double product = cov.var_tau * cov.var_omega;
  return {product, product >= 1.0};
}

/// Separable states satisfy lhs >= var_tau + (2 beta L)^2 / var_tau.
///
/// The margin is evaluated as (2 beta L)^2 (1 - var_tau var_omega) / var_tau,
/// which is rhs - lhs rearranged so that its sign follows the separability
/// product exactly: a report never flags a violation for a state whose
/// product is >= 1.
inline WitnessReport evaluate_witness(const TemporalCovariance& cov_before, const DispersionKit& kit) {
  detail::require_valid(cov_before);
  detail::require_valid(kit);
  detail::require(cov_before.var_tau > 0.0, ErrorCode::DegenerateState,
                  "witness is not evaluable for var_tau = 0");
  const double v = cov_before.var_tau;
  const double s2 = 4.0 * kit.beta_L * kit.beta_L;
  WitnessReport r;
  r.lhs = symmetrized_variance(cov_before, kit);
  r.rhs = v + s2 / v;
  r.product = v * cov_before.var_omega;
  r.margin = s2 * (1.0 - r.product) / v;
  r.violated = r.margin > 0.0;
  return r;
}

/// Detector timing noise adds to the observed tau variance only.
inline TemporalCovariance apply_jitter(const TemporalCovariance& cov, double jitter_var) {
  detail::require_valid(cov);
  detail::require(std::isfinite(jitter_var) && jitter_var >= 0.0, ErrorCode::InvalidArgument,
                  "jitter variance must be finite and non-negative");
  TemporalCovariance out = cov;
  out.var_tau += jitter_var;
  return out;
}

/// Practical conditions for seeing a violation through detector jitter:
/// pump linewidth (var_omega * jitter_var < 1) and dispersion strength
/// (|2 beta L| comparable to the observed tau variance). Raw ratios are
/// reported so callers can apply stricter factors.
inline FeasibilityReport jitter_feasibility(const TemporalCovariance& cov, const DispersionKit& kit,
                                            double jitter_var) {
  detail::require_valid(cov);
  detail::require_valid(kit);
  detail::require(std::isfinite(jitter_var) && jitter_var > 0.0, ErrorCode::InvalidArgument,
                  "feasibility needs a positive jitter variance");
  FeasibilityReport f;
  f.linewidth_product = cov.var_omega * jitter_var;
  f.linewidth_ok = f.linewidth_product < 1.0;
  f.dispersion_ratio = std::abs(2.0 * kit.beta_L) / (cov.var_tau + jitter_var);
  f.dispersion_ok = f.dispersion_ratio >= 1.0;
  return f;
}

}  // namespace ndc
