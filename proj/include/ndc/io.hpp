#pragma once
// Text and binary serialization. CSVs are comma-delimited with a header row
// and LF line endings; floating-point values carry 17 significant digits so
// they read back bit-exactly.
//
// Binary amplitude/density files are little-endian float64 throughout: an
// 8-value header [magic, n_sum, domega_sum, dt_sum, n_diff, domega_diff,
// dt_diff, 0] followed by the row-major payload (re, im interleaved for
// amplitudes).

#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ndc/biphoton.hpp"
#include "ndc/error.hpp"
#include "ndc/sampler.hpp"
#include "ndc/spectral.hpp"
#include "ndc/stationary.hpp"

namespace ndc::io {

inline constexpr double kAmplitudeMagic = 4.0e6 + 1.0;
inline constexpr double kDensityMagic = 4.0e6 + 2.0;

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  ndc::detail::require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorCode::InvalidArgument,
                  "not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace detail {

/// Data rows of a CSV after the header, skipping '#' comment lines.
inline std::vector<std::vector<double>> read_rows(std::istream& in, std::string_view expected_header) {
  std::string line;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      ndc::detail::require(line == expected_header, ErrorCode::InvalidArgument,
                           "expected CSV header '" + std::string(expected_header) + "', got '" + line + "'");
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    for (auto field : split_csv(line)) row.push_back(parse_double(field));
    rows.push_back(std::move(row));
  }
  ndc::detail::require(header_seen, ErrorCode::InvalidArgument, "CSV has no header row");
  return rows;
}

/// Reconstructs a FrequencyGrid from its listed detunings.
inline FrequencyGrid grid_from_omegas(const std::vector<double>& omegas) {
  ndc::detail::require(omegas.size() >= 2, ErrorCode::InvalidArgument, "spectrum CSV has too few rows");
  // w_0 = -(n/2) domega is exact for power-of-two n, so this recovers domega bit-exactly.
  const double d = -omegas.front() / static_cast<double>(omegas.size() / 2);
  FrequencyGrid g(omegas.size(), d);
  for (std::size_t k = 0; k < omegas.size(); ++k)
    ndc::detail::require(std::abs(omegas[k] - g.omega(k)) <= 1e-9 * g.span(), ErrorCode::InvalidArgument,
                         "spectrum CSV detunings are not on a centered uniform grid");
  return g;
}

inline void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

inline double get_f64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  ndc::detail::require(in.gcount() == 8, ErrorCode::InvalidArgument, "binary file truncated");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline void put_header(std::ostream& out, double magic, const PairGrid& g) {
  for (double v : {magic, static_cast<double>(g.rows()), g.sum.domega(), g.sum.dt(),
                   static_cast<double>(g.cols()), g.diff.domega(), g.diff.dt(), 0.0})
    put_f64(out, v);
}

inline PairGrid get_header(std::istream& in, double magic) {
  double h[8];
  for (double& v : h) v = get_f64(in);
  ndc::detail::require(h[0] == magic, ErrorCode::InvalidArgument, "binary file has the wrong magic value");
  return {FrequencyGrid(static_cast<std::size_t>(h[1]), h[2]), FrequencyGrid(static_cast<std::size_t>(h[4]), h[5])};
}

}  // namespace detail

// --- spectra -----------------------------------------------------------------

inline void write_spectrum_csv(std::ostream& out, const SpectralModel& s) {
  out << "omega_rad_per_ps,value\n";
  for (std::size_t k = 0; k < s.values().size(); ++k)
    out << format_double(s.grid().omega(k)) << ',' << format_double(s[k]) << '\n';
}

inline SpectralModel read_spectrum_csv(std::istream& in) {
  const auto rows = detail::read_rows(in, "omega_rad_per_ps,value");
  std::vector<double> w, v;
  for (const auto& r : rows) {
    ndc::detail::require(r.size() == 2, ErrorCode::InvalidArgument, "spectrum CSV rows need 2 columns");
    w.push_back(r[0]);
    v.push_back(r[1]);
  }
  return {detail::grid_from_omegas(w), std::move(v)};
}

inline void write_cross_csv(std::ostream& out, const CrossSpectrum& x) {
  out << "omega_rad_per_ps,re,im\n";
  for (std::size_t k = 0; k < x.values().size(); ++k)
    out << format_double(x.grid().omega(k)) << ',' << format_double(x[k].real()) << ','
        << format_double(x[k].imag()) << '\n';
}

inline CrossSpectrum read_cross_csv(std::istream& in) {
  const auto rows = detail::read_rows(in, "omega_rad_per_ps,re,im");
  std::vector<double> w;
  std::vector<std::complex<double>> v;
  for (const auto& r : rows) {
    ndc::detail::require(r.size() == 3, ErrorCode::InvalidArgument, "cross-spectrum CSV rows need 3 columns");
    w.push_back(r[0]);
    v.emplace_back(r[1], r[2]);
  }
  return {detail::grid_from_omegas(w), std::move(v)};
}

// --- stationary time-difference profile ----------------------------------------

inline void write_tau_density_csv(std::ostream& out, const TauDensity& d) {
  out << "tau_ps,signal,background,window_ps\n";
  const auto B = format_double(d.background), T = format_double(d.window);
  for (std::size_t j = 0; j < d.signal.size(); ++j)
    out << format_double(d.tau(j)) << ',' << format_double(d.signal[j]) << ',' << B << ',' << T << '\n';
}

// --- events ------------------------------------------------------------------

inline void write_events_csv(std::ostream& out, const EventBatch& b) {
  out << "# seed=" << b.seed << " window_ps=" << format_double(b.window) << " source=" << b.source << '\n';
  out << "t1_ps,t2_ps\n";
  for (const auto& e : b.events) out << format_double(e.t1) << ',' << format_double(e.t2) << '\n';
}

inline EventBatch read_events_csv(std::istream& in) {
  std::string line;
  EventBatch b;
  bool meta = false, header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto s = line.find("seed="), w = line.find(" window_ps="), src = line.find(" source=");
      ndc::detail::require(s != std::string::npos && w != std::string::npos && src != std::string::npos,
                           ErrorCode::InvalidArgument, "malformed event batch comment line");
      const auto seed_str = line.substr(s + 5, w - (s + 5));
      const auto res = std::from_chars(seed_str.data(), seed_str.data() + seed_str.size(), b.seed);
      ndc::detail::require(res.ec == std::errc{}, ErrorCode::InvalidArgument, "bad seed in event batch");
      b.window = parse_double(std::string_view(line).substr(w + 11, src - (w + 11)));
      b.source = line.substr(src + 8);
      meta = true;
      continue;
    }
    if (!header) {
      ndc::detail::require(line == "t1_ps,t2_ps", ErrorCode::InvalidArgument, "expected header 't1_ps,t2_ps'");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    ndc::detail::require(f.size() == 2, ErrorCode::InvalidArgument, "event rows need 2 columns");
    b.events.push_back({parse_double(f[0]), parse_double(f[1])});
  }
  ndc::detail::require(meta && header, ErrorCode::InvalidArgument, "event batch is missing its comment or header");
  return b;
}

// --- biphoton ------------------------------------------------------------------

inline void write_amplitude_csv(std::ostream& out, const BiphotonAmplitude& psi) {
  const auto& g = psi.grid();
  out << "omega1_rad_per_ps,omega2_rad_per_ps,re,im\n";
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      const auto v = psi.at(r, c);
      out << format_double(g.omega1(r, c)) << ',' << format_double(g.omega2(r, c)) << ','
          << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
}

inline void write_density_csv(std::ostream& out, const JointTemporalDensity& d) {
  const auto& g = d.grid;
  out << "t1_ps,t2_ps,p\n";
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c)
      out << format_double(g.t1(r, c)) << ',' << format_double(g.t2(r, c)) << ',' << format_double(d.at(r, c))
          << '\n';
}

inline void write_amplitude_binary(std::ostream& out, const BiphotonAmplitude& psi) {
  detail::put_header(out, kAmplitudeMagic, psi.grid());
  for (const auto& v : psi.values()) {
    detail::put_f64(out, v.real());
    detail::put_f64(out, v.imag());
  }
}

/// Reads an amplitude back; it is renormalized on load.
inline BiphotonAmplitude read_amplitude_binary(std::istream& in) {
  const auto g = detail::get_header(in, kAmplitudeMagic);
  std::vector<std::complex<double>> v(g.cells());
  for (auto& x : v) {
    const double re = detail::get_f64(in);
    x = {re, detail::get_f64(in)};
  }
  return BiphotonAmplitude::normalized(g, std::move(v));
}

inline void write_density_binary(std::ostream& out, const JointTemporalDensity& d) {
  detail::put_header(out, kDensityMagic, d.grid);
  for (double p : d.values) detail::put_f64(out, p);
}

inline JointTemporalDensity read_density_binary(std::istream& in) {
  const auto g = detail::get_header(in, kDensityMagic);
  JointTemporalDensity d{g, std::vector<double>(g.cells()), 0.0};
  for (double& p : d.values) p = detail::get_f64(in);
  return d;
}

// --- file helpers --------------------------------------------------------------

template <class Fn>
void write_file(const std::string& path, Fn&& fn, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  ndc::detail::require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  fn(out);
  ndc::detail::require(static_cast<bool>(out), ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

inline std::ifstream open_input(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  ndc::detail::require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return in;
}

}  // namespace ndc::io
