#pragma once
// Scenario execution: the analytic moments route (always), the FFT route for
// biphoton states, the windowed-profile route for stationary states and the
// sampling route when a sampler block is present. Everything is assembled in
// memory; nothing touches the disk until write_artifacts.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ndc/biphoton.hpp"
#include "ndc/io.hpp"
#include "ndc/moments.hpp"
#include "ndc/sampler.hpp"
#include "ndc/scenario.hpp"
#include "ndc/spectral.hpp"
#include "ndc/stationary.hpp"

namespace ndc {

inline constexpr const char* kToolName = "ndc";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kRunRecordSchemaVersion = 1;
inline constexpr const char* kRunRecordFile = "run_record.json";
inline constexpr const char* kOutputDirEnv = "NDC_OUTPUT_DIR";

struct OutputFile {
  std::string name;  // relative to the output directory
  std::string bytes;
};

struct RunArtifacts {
  json record;
  std::vector<OutputFile> files;
};

namespace detail {

/// JSON has no inf/NaN; they become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const TemporalCovariance& c) {
  return {{"var_tau_ps2", num(c.var_tau)},
          {"var_omega_rad2_per_ps2", num(c.var_omega)},
          {"cov_tau_omega_rad", num(c.cov_tau_omega)},
          {"mean_tau_ps", num(c.mean_tau)},
          {"mean_omega_rad_per_ps", num(c.mean_omega)}};
}

inline json to_json(const WitnessReport& w) {
  return {{"lhs_ps2", num(w.lhs)},          {"rhs_ps2", num(w.rhs)},
          {"margin_ps2", num(w.margin)},    {"violated", w.violated},
          {"product", num(w.product)},      {"margin_stderr_ps2", num(w.margin_stderr)},
          {"significance", num(significance(w))}};
}

inline json to_json(const TauStats& s) {
  return {{"var_tau_ps2", num(s.var_tau)},
          {"std_error_ps2", num(s.std_error)},
          {"mean_tau_ps", num(s.mean_tau)},
          {"count", s.count}};
}

inline json to_json(const FeasibilityReport& f) {
  return {{"linewidth_ok", f.linewidth_ok},
          {"dispersion_ok", f.dispersion_ok},
          {"linewidth_product", num(f.linewidth_product)},
          {"dispersion_ratio", num(f.dispersion_ratio)}};
}

inline json to_json(const AdmissibilityReport& a) {
  return {{"ok", a.ok}, {"worst_ratio", num(a.worst_ratio)}, {"worst_omega_rad_per_ps", num(a.worst_omega)}};
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class F>
std::string render_to_string(F&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline SpectralModel load_spectrum(const SpectrumSpec& spec, const FrequencyGrid& grid) {
  if (const auto* g = std::get_if<GaussianSpectrumSpec>(&spec))
    return gaussian_spectrum(grid, g->peak, g->sigma, g->center);
  const auto& f = std::get<FlatSpectrumSpec>(spec);
  return flat_spectrum(grid, f.level, f.half_width);
}

}  // namespace detail

/// Stationary model described by the scenario. CSV paths resolve against
/// `base`; a grid block, when present, must agree with CSV grids.
inline StationaryPairModel build_stationary_model(const StationaryState& st, const std::filesystem::path& base) {
  std::optional<FrequencyGrid> grid;
  if (st.grid_n) grid.emplace(*st.grid_n, *st.grid_domega);
  auto adopt = [&](const FrequencyGrid& g, const std::string& what) {
    if (!grid) grid = g;
    detail::require(*grid == g, ErrorCode::GridMismatch, what + " grid does not match the scenario grid");
  };

  std::optional<SpectralModel> csv1, csv2;
  std::optional<CrossSpectrum> csvx;
  if (const auto* c = std::get_if<CsvRef>(&st.s1)) {
    auto in = io::open_input(detail::resolve(base, c->path).string());
    csv1 = io::read_spectrum_csv(in);
    adopt(csv1->grid(), "s1");
  }
  if (const auto* c = std::get_if<CsvRef>(&st.s2)) {
    auto in = io::open_input(detail::resolve(base, c->path).string());
    csv2 = io::read_spectrum_csv(in);
    adopt(csv2->grid(), "s2");
  }
  if (const auto* c = std::get_if<CsvRef>(&st.cross)) {
    auto in = io::open_input(detail::resolve(base, c->path).string());
    csvx = io::read_cross_csv(in);
    adopt(csvx->grid(), "cross");
  }

  SpectralModel s1 = csv1 ? *csv1 : detail::load_spectrum(st.s1, *grid);
  SpectralModel s2 = csv2 ? *csv2 : detail::load_spectrum(st.s2, *grid);
  CrossSpectrum x = CrossSpectrum::zero(*grid);
  if (csvx) {
    x = *csvx;
  } else if (const auto* c = std::get_if<ClassicalExtremalCross>(&st.cross)) {
    x = max_classical_cross(s1, s2).scaled(c->scale);
  } else {
    const double scale = std::get<QuantumExtremalCross>(st.cross).scale;
    std::vector<std::complex<double>> v(grid->size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = scale * std::sqrt((1.0 + s1[k]) * s2[grid->reflect(k)]);
    x = CrossSpectrum(*grid, std::move(v));
  }
  if (!st.regime) return StationaryPairModel::with_inferred_regime(s1, s2, x, st.window);
  return {s1, s2, x, st.window, *st.regime == "classical" ? Regime::Classical : Regime::Quantum};
}

/// Pre-propagation covariance by the analytic route.
inline TemporalCovariance analytic_covariance(const Scenario& s, const std::filesystem::path& base) {
  if (const auto* b = std::get_if<BiphotonState>(&s.state))
    return {1.0 / (b->pm_sigma * b->pm_sigma), b->pump_sigma * b->pump_sigma, 0.0, 0.0, 0.0};
  if (const auto* st = std::get_if<StationaryState>(&s.state))
    return windowed_covariance(build_stationary_model(*st, base));
  return std::get<CovarianceState>(s.state).cov;
}

/// Witness on detector-level variances: each detector adds jitter_sigma^2,
/// so tau picks up 2 jitter_sigma^2.
inline WitnessReport observed_witness(const TemporalCovariance& cov, const DispersionKit& kit, double jitter_sigma) {
  return evaluate_witness(apply_jitter(cov, 2.0 * jitter_sigma * jitter_sigma), kit);
}

inline RunArtifacts execute_run(const Scenario& s, const std::filesystem::path& base) {
  RunArtifacts out;
  json& rec = out.record;
  rec["schema_version"] = kRunRecordSchemaVersion;
  rec["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  rec["scenario_hash"] = scenario_hash(s);
  rec["scenario"] = to_json(s);
  rec["state_kind"] = s.state_kind();
  const std::string started = detail::utc_now();

  // Analytic moments route.
  std::optional<StationaryPairModel> model;
  if (const auto* st = std::get_if<StationaryState>(&s.state)) model.emplace(build_stationary_model(*st, base));
  const TemporalCovariance before = model ? windowed_covariance(*model) : analytic_covariance(s, base);
  const auto sep = separability_check(before);
  const auto intrinsic = evaluate_witness(before, s.kit);
  json analytic;
  analytic["covariance_before"] = detail::to_json(before);
  analytic["covariance_after_plus"] = detail::to_json(shear_covariance(before, s.kit));
  analytic["covariance_after_minus"] = detail::to_json(shear_covariance(before, s.kit.swapped()));
  analytic["symmetrized_var_tau_ps2"] = symmetrized_variance(before, s.kit);
  analytic["separability"] = {{"product", detail::num(sep.product)}, {"separable_consistent", sep.separable_consistent}};
  analytic["witness"] = detail::to_json(intrinsic);
  analytic["consistent"] = !(intrinsic.violated && sep.separable_consistent);
  json jit;
  jit["jitter_sigma_ps"] = s.jitter_sigma;
  jit["tau_jitter_var_ps2"] = 2.0 * s.jitter_sigma * s.jitter_sigma;
  jit["covariance_observed"] = detail::to_json(apply_jitter(before, 2.0 * s.jitter_sigma * s.jitter_sigma));
  jit["witness_observed"] = detail::to_json(observed_witness(before, s.kit, s.jitter_sigma));
  jit["feasibility"] = s.jitter_sigma > 0.0
                           ? detail::to_json(jitter_feasibility(before, s.kit, s.jitter_sigma * s.jitter_sigma))
                           : json(nullptr);
  analytic["jitter"] = jit;
  rec["analytic"] = analytic;

  // FFT route (biphoton only).
  std::optional<BiphotonAmplitude> psi;
  std::optional<JointTemporalDensity> d_before, d_plus, d_minus;
  rec["fft"] = nullptr;
  if (const auto* b = std::get_if<BiphotonState>(&s.state)) {
    const auto grid = pdc_grid(b->pump_sigma, b->pm_sigma, s.kit.beta_L, b->grid_n);
    psi.emplace(build_pdc_amplitude(grid, b->pump_sigma, b->pm_sigma));
    const auto cov_fft = amplitude_moments(*psi);
    auto propagate = [&](const DispersionKit& k) {
      auto d = to_time_domain(apply_dispersion_phase(*psi, k));
      const double wrapped = edge_mass_fraction(d);
      detail::require(wrapped < kWrapTolerance, ErrorCode::GridTooCoarse,
                      "propagated density wraps around the time grid (edge mass " + std::to_string(wrapped) + ")");
      return d;
    };
    d_before.emplace(to_time_domain(*psi));
    d_plus.emplace(propagate(s.kit));
    d_minus.emplace(propagate(s.kit.swapped()));
    const auto m_plus = tau_moments(*d_plus), m_minus = tau_moments(*d_minus);
    json fft;
    fft["grid"] = {{"n", b->grid_n},
                   {"domega_sum_rad_per_ps", grid.sum.domega()},
                   {"domega_diff_rad_per_ps", grid.diff.domega()},
                   {"dt_mean_ps", grid.sum.dt()},
                   {"dt_tau_ps", grid.diff.dt()}};
    fft["parseval_norm"] = d_before->raw_norm;
    fft["covariance_before"] = detail::to_json(cov_fft);
    fft["var_tau_after_plus_ps2"] = m_plus.variance;
    fft["var_tau_after_minus_ps2"] = m_minus.variance;
    fft["mean_tau_after_plus_ps"] = m_plus.mean;
    fft["symmetrized_var_tau_ps2"] = 0.5 * (m_plus.variance + m_minus.variance);
    fft["witness"] = detail::to_json(evaluate_witness(cov_fft, s.kit));
    rec["fft"] = fft;
  }

  // Windowed coincidence profile (stationary only).
  std::optional<TauDensity> profile;
  rec["stationary"] = nullptr;
  if (model) {
    profile.emplace(coincidence_profile(*model));
    const auto sig = signal_stats(*profile);
    const auto win = windowed_tau_variance(*profile);
    const double peak = *std::max_element(profile->signal.begin(), profile->signal.end());
    json st;
    st["regime"] = to_string(model->regime());
    st["quantum_admissibility"] = detail::to_json(quantum_admissible(model->s1(), model->s2(), model->cross()));
    st["classical_admissibility"] = detail::to_json(classical_admissible(model->s1(), model->s2(), model->cross()));
    st["intensity_1_per_ps"] = intensity(model->s1());
    st["intensity_2_per_ps"] = intensity(model->s2());
    st["background_per_ps2"] = profile->background;
    st["signal_peak_per_ps2"] = peak;
    st["peak_to_background"] = detail::num(peak / profile->background);
    st["signal_integral_per_ps"] = sig.integral;
    st["signal_rms_width_ps"] = sig.rms_width();
    st["window_ps"] = model->window();
    st["signal_fraction"] = win.signal_fraction;
    st["windowed_var_tau_ps2"] = win.variance;
    rec["stationary"] = st;
  }

  // Sampling route.
  rec["sampling"] = nullptr;
  json events = json::object();
  if (s.sampler) {
    const auto& sp = *s.sampler;
    const std::uint64_t seeds[3] = {rng::substream_key(sp.seed, "before"), rng::substream_key(sp.seed, "after_plus"),
                                    rng::substream_key(sp.seed, "after_minus")};
    const DispersionKit kits[3] = {{}, s.kit, s.kit.swapped()};
    const char* names[3] = {"before", "after_plus", "after_minus"};
    std::vector<EventBatch> batches;
    for (int i = 0; i < 3; ++i) {
      const std::string src = std::string(s.state_kind()) + "/" + names[i];
      if (psi) {
        const auto& d = i == 0 ? *d_before : i == 1 ? *d_plus : *d_minus;
        batches.push_back(sample_biphoton(d, sp.n, seeds[i], src));
      } else if (model) {
        batches.push_back(sample_stationary(*model, sp.n, seeds[i], kits[i], src));
      } else {
        batches.push_back(sample_gaussian(before, sp.n, seeds[i], kits[i], src));
      }
    }
    std::vector<TauStats> stats;
    for (int i = 0; i < 3; ++i)
      stats.push_back(estimate_tau_stats(batches[i], s.jitter_sigma, rng::substream_key(sp.jitter_seed, names[i])));
    const auto w = empirical_witness(stats[0], stats[1], stats[2], s.kit);
    json smp;
    smp["n"] = sp.n;
    smp["seed"] = sp.seed;
    smp["jitter_seed"] = sp.jitter_seed;
    for (int i = 0; i < 3; ++i) {
      smp[names[i]] = detail::to_json(stats[i]);
      smp[names[i]]["batch_seed"] = seeds[i];
    }
    smp["witness"] = detail::to_json(w);
    rec["sampling"] = smp;
    if (s.outputs.events_csv) {
      for (int i = 0; i < 3; ++i) {
        const std::string file = std::string("events_") + names[i] + ".csv";
        out.files.push_back({file, detail::render_to_string([&](std::ostream& o) { io::write_events_csv(o, batches[i]); })});
        events[names[i]] = file;
      }
    }
  }

  // Requested data products.
  if (profile && s.outputs.tau_density_csv)
    out.files.push_back({"tau_density.csv", detail::render_to_string([&](std::ostream& o) { io::write_tau_density_csv(o, *profile); })});
  if (model && s.outputs.spectra_csv) {
    out.files.push_back({"s1.csv", detail::render_to_string([&](std::ostream& o) { io::write_spectrum_csv(o, model->s1()); })});
    out.files.push_back({"s2.csv", detail::render_to_string([&](std::ostream& o) { io::write_spectrum_csv(o, model->s2()); })});
    out.files.push_back({"cross.csv", detail::render_to_string([&](std::ostream& o) { io::write_cross_csv(o, model->cross()); })});
  }
  if (psi) {
    if (s.outputs.amplitude_csv)
      out.files.push_back({"amplitude.csv", detail::render_to_string([&](std::ostream& o) { io::write_amplitude_csv(o, *psi); })});
    if (s.outputs.amplitude_bin)
      out.files.push_back({"amplitude.bin", detail::render_to_string([&](std::ostream& o) { io::write_amplitude_binary(o, *psi); })});
    if (s.outputs.density_csv)
      out.files.push_back({"density_before.csv", detail::render_to_string([&](std::ostream& o) { io::write_density_csv(o, *d_before); })});
    if (s.outputs.density_bin)
      out.files.push_back({"density_before.bin", detail::render_to_string([&](std::ostream& o) { io::write_density_binary(o, *d_before); })});
  }

  json files = json::array();
  for (const auto& f : out.files) files.push_back({{"path", f.name}, {"fnv1a", fnv1a_hex(f.bytes)}});
  rec["outputs"] = {{"events", events}, {"files", files}};
  rec["timestamps"] = {{"started_utc", started}, {"finished_utc", detail::utc_now()}};
  return out;
}

/// Writes every file plus the record into `dir`, creating it if needed.
/// Returns the record path.
inline std::filesystem::path write_artifacts(const RunArtifacts& a, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : a.files)
    io::write_file((dir / f.name).string(), [&](std::ostream& o) { o << f.bytes; }, true);
  const auto path = dir / kRunRecordFile;
  io::write_file(path.string(), [&](std::ostream& o) { o << a.record.dump(2) << '\n'; });
  return path;
}

/// The record with its wall-clock fields removed; equal across reruns.
inline json without_timestamps(json record) {
  record.erase("timestamps");
  return record;
}

struct ScanRow {
  double value = 0.0;
  WitnessReport witness;
};

/// Analytic observed witness for each value of a numeric scenario field.
/// All points are validated before any is evaluated; evaluation runs in
/// parallel and rows come back in input order.
inline std::vector<ScanRow> run_scan(const json& doc, const std::string& path, const std::vector<double>& values,
                                     const std::filesystem::path& base) {
  detail::require(!values.empty(), ErrorCode::InvalidArgument, "scan needs at least one value");
  std::vector<Scenario> points;
  for (double v : values) {
    json d = doc;
    set_numeric_field(d, path, v);
    points.push_back(scenario_from_json(d));
  }
  std::vector<std::future<WitnessReport>> jobs;
  for (const auto& p : points)
    jobs.push_back(std::async(std::launch::async, [&p, &base] {
      return observed_witness(analytic_covariance(p, base), p.kit, p.jitter_sigma);
    }));
  std::vector<ScanRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({values[i], jobs[i].get()});
  return rows;
}

inline void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "value,lhs_ps2,rhs_ps2,margin_ps2,product,violated\n";
  for (const auto& r : rows)
    out << io::format_double(r.value) << ',' << io::format_double(r.witness.lhs) << ','
        << io::format_double(r.witness.rhs) << ',' << io::format_double(r.witness.margin) << ','
        << io::format_double(r.witness.product) << ',' << (r.witness.violated ? 1 : 0) << '\n';
}

}  // namespace ndc
