// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include "ndc/biphoton.hpp"
#include "ndc/moments.hpp"
#include "ndc/rng.hpp"
#include "ndc/runner.hpp"
#include "ndc/sampler.hpp"
#include "ndc/scenario.hpp"
#include "ndc/spectral.hpp"
#include "ndc/stationary.hpp"

namespace {

using namespace ndc;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<double> trace;  // every number the criterion computed, for fingerprinting
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // 0 when the criterion has no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string fingerprint(const std::vector<double>& xs) {
  std::string bytes(xs.size() * sizeof(double), '\0');
  if (!xs.empty()) std::memcpy(bytes.data(), xs.data(), bytes.size());
  return fnv1a_hex(bytes);
}

double uniform(rng::Stream& s, double lo, double hi) { return lo + (hi - lo) * s.uniform(); }

constexpr double kA = 1e-4, kB = 10.0, kBetaL = 32.0;

Outcome dispersion_cancellation() {
  const auto grid = pdc_grid(kA, kB, kBetaL, 1024);
  const auto psi = build_pdc_amplitude(grid, kA, kB);
  const double before = tau_moments(to_time_domain(psi)).variance;
  const double plus = tau_moments(to_time_domain(apply_dispersion_phase(psi, {kBetaL, 0.0, 0.0}))).variance;
  const double minus = tau_moments(to_time_domain(apply_dispersion_phase(psi, {-kBetaL, 0.0, 0.0}))).variance;
  const double sym = 0.5 * (plus + minus);
  const double v0 = 1.0 / (kB * kB);
  const double correction = 4.0 * kBetaL * kBetaL * kA * kA;
  const double dev = std::abs(sym - v0 - correction);
  const bool ok = dev <= 0.005 * v0 && std::abs(before - v0) <= 0.005 * v0;
  return {ok,
          fmt("Var(tau) before %.6g ps^2, symmetrized after %.6g ps^2, expected %.6g, deviation %.2e (limit %.1e)",
              before, sym, v0 + correction, dev, 0.005 * v0),
          {before, plus, minus, sym}};
}

Outcome central_violation() {
  const auto grid = pdc_grid(kA, kB, kBetaL, 1024);
  const auto psi = build_pdc_amplitude(grid, kA, kB);
  const DispersionKit kit{kBetaL, 0.0, 0.0};
  const auto cov = amplitude_moments(psi);
  const auto analytic = evaluate_witness(cov, kit);
  const double ratio = analytic.rhs / analytic.lhs;

  constexpr std::size_t n = 100000;
  constexpr std::uint64_t seed = 20260101;
  const auto before = sample_biphoton(to_time_domain(psi), n, rng::substream_key(seed, "before"));
  const auto plus = sample_biphoton(to_time_domain(apply_dispersion_phase(psi, kit)), n,
                                    rng::substream_key(seed, "after_plus"));
  const auto minus = sample_biphoton(to_time_domain(apply_dispersion_phase(psi, kit.swapped())), n,
                                     rng::substream_key(seed, "after_minus"));
  const auto emp = empirical_witness(estimate_tau_stats(before, 0.0, 0), estimate_tau_stats(plus, 0.0, 0),
                                     estimate_tau_stats(minus, 0.0, 0), kit);
  const double z = significance(emp);
  return {ratio > 1e6 && emp.violated && z > 5.0,
          fmt("analytic rhs/lhs %.3e (needs > 1e6); sampled margin %.6g +- %.3g ps^2 at %.3g sigma (needs > 5)",
              ratio, emp.margin, emp.margin_stderr, z),
          {cov.var_tau, cov.var_omega, cov.cov_tau_omega, analytic.margin, emp.lhs, emp.rhs, emp.margin,
           emp.margin_stderr}};
}

Outcome separable_soundness() {
  constexpr int kCount = 10000;
  int counterexamples = 0, boundary = 0;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  for (int i = 0; i < kCount; ++i) {
    rng::Stream s(91, "separable", static_cast<std::uint64_t>(i));
    const double v = std::pow(10.0, uniform(s, -4.0, 4.0));
    const bool on_boundary = i % 10 == 0;
    const double p = on_boundary ? 1.0 : std::pow(10.0, uniform(s, 0.0, 3.0));
    double w = p / v;
    while (v * w < p) w = std::nextafter(w, std::numeric_limits<double>::infinity());
    const double rho = uniform(s, -1.0, 1.0);
    const TemporalCovariance cov{v, w, rho * std::sqrt(v * w), uniform(s, -5.0, 5.0), uniform(s, -1.0, 1.0)};
    const double bl = i % 97 == 0 ? 0.0 : uniform(s, 0.0, 100.0);
    const auto r = evaluate_witness(cov, {bl, uniform(s, -10.0, 10.0), uniform(s, -10.0, 10.0)});
    if (on_boundary) ++boundary;
    if (r.margin > 0.0) ++counterexamples;
    worst = std::max(worst, r.margin);
    trace.push_back(r.margin);
  }
  return {counterexamples == 0,
          fmt("%d instances (%d at product = 1), %d with margin > 0, largest margin %.3g ps^2", kCount, boundary,
              counterexamples, worst),
          trace};
}

Outcome classical_ceiling() {
  const FrequencyGrid grid(4096, 0.01);
  constexpr int kPairs = 100;
  int ceiling_fail = 0, violated = 0;
  double worst_ratio = 0.0, min_widths = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  for (int i = 0; i < kPairs; ++i) {
    rng::Stream s(404, "spectra", static_cast<std::uint64_t>(i));
    const auto s1 = gaussian_spectrum(grid, uniform(s, 0.05, 2.0), uniform(s, 0.3, 2.0), uniform(s, -3.0, 3.0));
    const auto s2 = gaussian_spectrum(grid, uniform(s, 0.05, 2.0), uniform(s, 0.3, 2.0), uniform(s, -3.0, 3.0));
    const auto probe = coincidence_profile(classical_extremal_model(s1, s2, 1.0));
    const auto sig = signal_stats(probe);
    const double width = std::sqrt(sig.variance + sig.mean * sig.mean);
    const double g0 = probe.signal[grid.size() / 2];
    const double ratio = g0 / probe.background;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio > 1.0 + 1e-12) ++ceiling_fail;

    const double widths = uniform(s, 10.0, 100.0);
    min_widths = std::min(min_widths, widths);
    const auto model = classical_extremal_model(s1, s2, widths * width);
    const auto w = evaluate_witness(windowed_covariance(model), {uniform(s, 0.0, 100.0), 0.0, 0.0});
    if (w.violated) ++violated;
    trace.insert(trace.end(), {g0, probe.background, w.margin});
  }

  const auto flat = flat_spectrum(grid, 1.0, 2.0);
  std::vector<std::complex<double>> x(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (flat[k] > 0.0 && flat[grid.reflect(k)] > 0.0) x[k] = std::sqrt(2.0);
  const CrossSpectrum cross(grid, x);
  const auto q = quantum_admissible(flat, flat, cross);
  const auto c = classical_admissible(flat, flat, cross);
  const bool flat_ok = q.ok && !c.ok && std::abs(q.worst_ratio - 1.0) <= 1e-12 &&
                       std::abs(c.worst_ratio - 2.0) <= 1e-12;
  trace.insert(trace.end(), {q.worst_ratio, c.worst_ratio});
  return {ceiling_fail == 0 && violated == 0 && flat_ok,
          fmt("%d pairs: max |g(0)|^2/(I1 I2) = %.12f, %d ceiling breaches, %d witness violations (T >= %.1f "
              "widths); flat |x| = sqrt(2): quantum ratio %.12f (%s), classical ratio %.12f (%s)",
              kPairs, worst_ratio, ceiling_fail, violated, min_widths, q.worst_ratio, q.ok ? "admissible" : "rejected",
              c.worst_ratio, c.ok ? "admissible" : "rejected"),
          trace};
}

Outcome background_law() {
  const FrequencyGrid grid(256, 0.05);
  const auto s = flat_spectrum(grid, 1.0, 2.0);
  const std::vector<double> windows{10.0, 20.0, 40.0};
  constexpr int kSeeds = 200;
  constexpr std::size_t n = 100000;
  constexpr int kMinInside = 198;  // 99% of seeds
  bool ok = true;
  std::string detail;
  std::vector<double> trace, mean_var;
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const double T = windows[t];
    const StationaryPairModel m(s, s, CrossSpectrum::zero(grid), T, Regime::Classical);
    const double truth = T * T / 6.0;
    std::vector<std::future<TauStats>> jobs;
    for (int k = 0; k < kSeeds; ++k)
      jobs.push_back(std::async(std::launch::async, [&m, t, k] {
        const auto seed = rng::substream_key(5, "background/" + std::to_string(t), static_cast<std::uint64_t>(k));
        return estimate_tau_stats(sample_stationary(m, n, seed), 0.0, 0);
      }));
    int inside = 0;
    double sum = 0.0;
    for (auto& j : jobs) {
      const auto st = j.get();
      if (std::abs(st.var_tau - truth) <= 3.0 * st.std_error) ++inside;
      sum += st.var_tau;
      trace.insert(trace.end(), {st.var_tau, st.std_error});
    }
    mean_var.push_back(sum / kSeeds);
    ok = ok && inside >= kMinInside;
    detail += fmt("T=%g: %d/%d seeds within 3 SE, mean Var %.5g vs T^2/6 = %.5g; ", T, inside, kSeeds,
                  mean_var.back(), truth);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const double x = std::log(windows[t]), y = std::log(mean_var[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(windows.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  ok = ok && std::abs(slope - 2.0) <= 0.02;
  detail += fmt("log-log slope %.4f", slope);
  trace.push_back(slope);
  return {ok, detail, trace};
}

Outcome oracle_agreement() {
  constexpr int kScenarios = 50;
  constexpr std::size_t n_mc = 100000;
  int grid_fail = 0, mc_fail = 0;
  double worst_grid = 0.0, worst_z = 0.0;
  std::vector<double> trace;
  for (int i = 0; i < kScenarios; ++i) {
    rng::Stream s(606, "oracle", static_cast<std::uint64_t>(i));
    const double a = uniform(s, 0.05, 0.5), b = uniform(s, 1.0, 10.0);
    const double chirp = uniform(s, -2.0, 2.0);
    const DispersionKit kit{uniform(s, -5.0, 5.0), uniform(s, -1.0, 1.0) / b, uniform(s, -1.0, 1.0) / b};
    const auto grid = pdc_grid(a, b, std::abs(chirp) + std::abs(kit.beta_L), 512);
    const auto psi = apply_dispersion_phase(build_pdc_amplitude(grid, a, b), {chirp, 0.0, 0.0});

    // Closed form for the chirped Gaussian amplitude.
    const double total = chirp + kit.beta_L;
    const double closed = 1.0 / (b * b) + 4.0 * total * total * a * a;

    const auto cov = amplitude_moments(psi);
    const double moments = shear_covariance(cov, kit).var_tau;
    const double fft = tau_moments(to_time_domain(apply_dispersion_phase(psi, kit))).variance;
    const double rel = std::max(std::abs(moments - fft) / fft, std::abs(moments - closed) / closed);
    worst_grid = std::max(worst_grid, rel);
    if (rel > 1e-3) ++grid_fail;

    const auto mc = estimate_tau_stats(sample_gaussian(cov, n_mc, rng::substream_key(606, "mc", i), kit), 0.0, 0);
    const double z = std::abs(mc.var_tau - moments) / mc.std_error;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++mc_fail;
    trace.insert(trace.end(), {closed, moments, fft, mc.var_tau, mc.std_error});
  }
  return {grid_fail == 0 && mc_fail == 0,
          fmt("%d scenarios: worst relative gap moments/FFT/closed form %.2e (limit 1e-3), %d outside; worst MC "
              "deviation %.2f sigma, %d outside 3 sigma",
              kScenarios, worst_grid, grid_fail, worst_z, mc_fail),
          trace};
}

Outcome jitter_model() {
  const std::filesystem::path file = std::filesystem::path(NDC_SCENARIO_DIR) / "jittered_detection.json";
  const auto scenario = load_scenario(file);
  const auto rows = run_scan(to_json(scenario), "jitter_sigma_ps", {0.0, 10.0, 25.0, 50.0}, file.parent_path());
  bool monotone = true;
  std::string margins;
  std::vector<double> trace;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].witness.margin > rows[i - 1].witness.margin) monotone = false;
    margins += fmt("%s%g ps: %.6g", i ? ", " : "", rows[i].value, rows[i].witness.margin);
    trace.push_back(rows[i].witness.margin);
  }
  const auto cov = analytic_covariance(scenario, file.parent_path());
  const auto f = jitter_feasibility(cov, scenario.kit, 50.0 * 50.0);
  trace.push_back(f.dispersion_ratio);
  return {monotone && !f.dispersion_ok && std::abs(f.dispersion_ratio - 0.026) < 1e-3,
          fmt("margins (ps^2) %s; %s; at 50 ps dispersion_ok = %s, ratio %.4f", margins.c_str(),
              monotone ? "non-increasing" : "NOT non-increasing", f.dispersion_ok ? "true" : "false",
              f.dispersion_ratio),
          trace};
}

}  // namespace

int main() {
  const std::vector<Criterion> suite{
      {1, "dispersion cancellation", 10.0, dispersion_cancellation},
      {2, "central inequality violation", 30.0, central_violation},
      {3, "separable soundness", 0.0, separable_soundness},
      {4, "classical ceiling", 0.0, classical_ceiling},
      {5, "background law", 0.0, background_law},
      {6, "oracle agreement", 0.0, oracle_agreement},
      {7, "jitter model", 0.0, jitter_model},
  };

  bool all = true;
  std::vector<std::string> first, second;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& c : suite) {
      const auto t0 = std::chrono::steady_clock::now();
      Outcome o;
      try {
        o = c.run();
      } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what(), {}};
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      (pass == 0 ? first : second).push_back(fingerprint(o.trace));
      if (pass) continue;
      bool ok = o.pass;
      std::string timing = fmt("%.2f s", secs);
      if (c.time_limit_s > 0.0) {
        ok = ok && secs < c.time_limit_s;
        timing += fmt(", limit %.0f s", c.time_limit_s);
      }
      all = all && ok;
      std::printf("%s %d %s: %s [%s]\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                  timing.c_str());
      std::fflush(stdout);
    }
  }

  std::string prints;
  bool same = true;
  for (std::size_t i = 0; i < first.size(); ++i) {
    same = same && first[i] == second[i];
    prints += (i ? " " : "") + first[i];
  }
  all = all && same;
  std::printf("%s 8 determinism: second in-process run %s; fingerprints %s\n", same ? "PASS" : "FAIL",
              same ? "matches bit for bit" : "differs", prints.c_str());
  return all ? 0 : 1;
}
