#pragma once
// Centered discrete Fourier transforms with the e^{-i w t} kernel and 1/(2 pi)
// per axis, backed by FFTW:
//
//   f(t_j) = (domega / 2 pi) * sum_k F(w_k) exp(-i w_k t_j)
//
// with w_k = (k - n/2) domega and t_j = (j - n/2) dt, dt = 2 pi / (n domega).
// For n divisible by 4 the centering reduces to a checkerboard sign on input
// and output around a plain forward FFT.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace ndc::fft {

namespace detail {

// The FFTW planner is not reentrant; execution of distinct plans is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

inline double checker(std::size_t i) { return (i & 1u) ? -1.0 : 1.0; }

}  // namespace detail

/// 1D centered transform of `spectrum` (length n) with spacing domega.
inline std::vector<std::complex<double>> to_time_1d(std::span<const std::complex<double>> spectrum,
                                                    double domega) {
  const std::size_t n = spectrum.size();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k < n; ++k) buf[k] = spectrum[k] * detail::checker(k);
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(n), detail::as_fftw(buf.data()),
                                detail::as_fftw(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  const double scale = domega / (2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < n; ++j) buf[j] *= scale * detail::checker(j);
  return buf;
}

/// 2D centered transform of a row-major rows x cols array; rows use
/// domega_row, columns use domega_col.
inline std::vector<std::complex<double>> to_time_2d(std::span<const std::complex<double>> spectrum,
                                                    std::size_t rows, std::size_t cols,
                                                    double domega_row, double domega_col) {
  std::vector<std::complex<double>> buf(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      buf[r * cols + c] = spectrum[r * cols + c] * detail::checker(r + c);
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                detail::as_fftw(buf.data()), detail::as_fftw(buf.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  const double scale = domega_row * domega_col / (4.0 * std::numbers::pi * std::numbers::pi);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) buf[r * cols + c] *= scale * detail::checker(r + c);
  return buf;
}

}  // namespace ndc::fft
