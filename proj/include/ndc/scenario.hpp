#pragma once
// Declarative experiment description: one source state, the two-arm medium,
// detector jitter, an optional sampling block and output selection.
//
// The on-disk form is JSON with the unit in every numeric field name. Parsing
// is strict: unknown keys, missing required keys and out-of-range values are
// validation errors. to_json() emits the normalized form (defaults filled
// in), which is what the scenario hash covers.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ndc/error.hpp"
#include "ndc/moments.hpp"
#include "ndc/rng.hpp"

namespace ndc {

using json = nlohmann::json;

inline constexpr int kScenarioSchemaVersion = 1;

struct GaussianSpectrumSpec {
  double peak = 0.0;  // mean occupation per mode
  double sigma = 1.0;
  double center = 0.0;
  friend bool operator==(const GaussianSpectrumSpec&, const GaussianSpectrumSpec&) = default;
};

struct FlatSpectrumSpec {
  double level = 0.0;
  double half_width = 1.0;
  friend bool operator==(const FlatSpectrumSpec&, const FlatSpectrumSpec&) = default;
};

struct CsvRef {
  std::string path;
  friend bool operator==(const CsvRef&, const CsvRef&) = default;
};

using SpectrumSpec = std::variant<GaussianSpectrumSpec, FlatSpectrumSpec, CsvRef>;

/// scale * sqrt(S1(w) S2(-w)).
struct ClassicalExtremalCross {
  double scale = 1.0;
  friend bool operator==(const ClassicalExtremalCross&, const ClassicalExtremalCross&) = default;
};

/// scale * sqrt((1 + S1(w)) S2(-w)).
struct QuantumExtremalCross {
  double scale = 1.0;
  friend bool operator==(const QuantumExtremalCross&, const QuantumExtremalCross&) = default;
};

using CrossSpec = std::variant<ClassicalExtremalCross, QuantumExtremalCross, CsvRef>;

struct BiphotonState {
  double pump_sigma = 0.0;  // a, rad/ps
  double pm_sigma = 0.0;    // b, rad/ps
  std::size_t grid_n = 1024;
  friend bool operator==(const BiphotonState&, const BiphotonState&) = default;
};

struct StationaryState {
  std::optional<std::size_t> grid_n;
  std::optional<double> grid_domega;
  SpectrumSpec s1, s2;
  CrossSpec cross;
  double window = 0.0;            // ps
  std::optional<std::string> regime;  // "quantum" | "classical"; inferred when absent
  friend bool operator==(const StationaryState&, const StationaryState&) = default;
};

struct CovarianceState {
  TemporalCovariance cov;
  friend bool operator==(const CovarianceState&, const CovarianceState&) = default;
};

using StateSpec = std::variant<BiphotonState, StationaryState, CovarianceState>;

struct SamplerSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t jitter_seed = 0;
  friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

struct OutputsSpec {
  std::optional<std::string> dir;
  bool events_csv = true;
  bool tau_density_csv = false;
  bool spectra_csv = false;
  bool amplitude_csv = false;
  bool amplitude_bin = false;
  bool density_csv = false;
  bool density_bin = false;
  friend bool operator==(const OutputsSpec&, const OutputsSpec&) = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  StateSpec state;
  DispersionKit kit;
  double jitter_sigma = 0.0;  // ps, per detector
  std::optional<SamplerSpec> sampler;
  OutputsSpec outputs;
  friend bool operator==(const Scenario&, const Scenario&) = default;

  const char* state_kind() const {
    switch (state.index()) {
      case 0: return "biphoton";
      case 1: return "stationary";
      default: return "covariance";
    }
  }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, where + ": " + what);
}

/// Field reader that remembers which keys were consumed so leftovers can be
/// reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) invalid(where_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) invalid(where_, "missing required field '" + key + "'");
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) invalid(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(path(key), "must be finite");
    return x;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t integer(const std::string& key) {
    const auto& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x >= 0.0 && x < 0x1.0p64 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
    }
    invalid(path(key), "expected a non-negative integer");
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) invalid(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) invalid(path(key), "expected true or false");
    return v.get<bool>();
  }

  ObjectReader object(const std::string& key) { return {raw(key), path(key)}; }

  std::string path(const std::string& key) const { return where_ + "." + key; }
  const std::string& where() const { return where_; }

  /// Throws on keys that were never read.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) invalid(where_, "unknown field '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline void check(bool ok, const std::string& where, const std::string& what) {
  if (!ok) invalid(where, what);
}

inline bool is_pow2_grid(std::uint64_t n) { return n >= 8 && (n & (n - 1)) == 0; }

inline SpectrumSpec parse_spectrum(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  check(j.size() == 1, where, "expected exactly one of 'gaussian', 'flat', 'csv'");
  SpectrumSpec out;
  if (r.has("gaussian")) {
    auto g = r.object("gaussian");
    GaussianSpectrumSpec s{g.number("peak"), g.number("sigma_rad_per_ps"), g.number("center_rad_per_ps", 0.0)};
    check(s.peak >= 0.0, g.path("peak"), "must be >= 0");
    check(s.sigma > 0.0, g.path("sigma_rad_per_ps"), "must be > 0");
    g.finish();
    out = s;
  } else if (r.has("flat")) {
    auto f = r.object("flat");
    FlatSpectrumSpec s{f.number("level"), f.number("half_width_rad_per_ps")};
    check(s.level >= 0.0, f.path("level"), "must be >= 0");
    check(s.half_width > 0.0, f.path("half_width_rad_per_ps"), "must be > 0");
    f.finish();
    out = s;
  } else if (r.has("csv")) {
    out = CsvRef{r.string("csv")};
  }
  r.finish();
  return out;
}

inline CrossSpec parse_cross(const json& j, const std::string& where) {
  if (j.is_string()) {
    check(j.get<std::string>() == "classical-extremal", where,
          "string form must be \"classical-extremal\"");
    return ClassicalExtremalCross{1.0};
  }
  ObjectReader r(j, where);
  check(j.size() == 1, where,
        "expected exactly one of 'classical_extremal_scale', 'quantum_extremal_scale', 'csv'");
  CrossSpec out;
  if (r.has("classical_extremal_scale")) {
    const double s = r.number("classical_extremal_scale");
    check(s >= 0.0, r.path("classical_extremal_scale"), "must be >= 0");
    out = ClassicalExtremalCross{s};
  } else if (r.has("quantum_extremal_scale")) {
    const double s = r.number("quantum_extremal_scale");
    check(s >= 0.0, r.path("quantum_extremal_scale"), "must be >= 0");
    out = QuantumExtremalCross{s};
  } else if (r.has("csv")) {
    out = CsvRef{r.string("csv")};
  }
  r.finish();
  return out;
}

inline StateSpec parse_state(const json& j) {
  ObjectReader r(j, "state");
  check(j.size() == 1, "state", "expected exactly one of 'biphoton', 'stationary', 'covariance'");
  StateSpec out;
  if (r.has("biphoton")) {
    auto b = r.object("biphoton");
    BiphotonState s{b.number("pump_sigma_rad_per_ps"), b.number("pm_sigma_rad_per_ps"),
                    static_cast<std::size_t>(b.integer("grid_n", 1024))};
    check(s.pump_sigma > 0.0, b.path("pump_sigma_rad_per_ps"), "must be > 0");
    check(s.pm_sigma > 0.0, b.path("pm_sigma_rad_per_ps"), "must be > 0");
    check(is_pow2_grid(s.grid_n), b.path("grid_n"), "must be a power of two >= 8");
    b.finish();
    out = s;
  } else if (r.has("stationary")) {
    auto st = r.object("stationary");
    StationaryState s;
    if (st.has("grid")) {
      auto g = st.object("grid");
      s.grid_n = static_cast<std::size_t>(g.integer("n"));
      s.grid_domega = g.number("domega_rad_per_ps");
      check(is_pow2_grid(*s.grid_n), g.path("n"), "must be a power of two >= 8");
      check(*s.grid_domega > 0.0, g.path("domega_rad_per_ps"), "must be > 0");
      g.finish();
    }
    s.s1 = parse_spectrum(st.raw("s1"), st.path("s1"));
    s.s2 = parse_spectrum(st.raw("s2"), st.path("s2"));
    s.cross = parse_cross(st.raw("cross"), st.path("cross"));
    s.window = st.number("window_ps");
    check(s.window > 0.0, st.path("window_ps"), "must be > 0");
    if (st.has("regime")) {
      s.regime = st.string("regime");
      check(*s.regime == "quantum" || *s.regime == "classical", st.path("regime"),
            "must be \"quantum\" or \"classical\"");
    }
    const bool any_csv = std::holds_alternative<CsvRef>(s.s1) || std::holds_alternative<CsvRef>(s.s2) ||
                         std::holds_alternative<CsvRef>(s.cross);
    check(any_csv || s.grid_n.has_value(), st.where(), "'grid' is required unless a spectrum comes from CSV");
    st.finish();
    out = s;
  } else if (r.has("covariance")) {
    auto c = r.object("covariance");
    TemporalCovariance cov{c.number("var_tau_ps2"), c.number("var_omega_rad2_per_ps2"),
                           c.number("cov_tau_omega_rad", 0.0), c.number("mean_tau_ps", 0.0),
                           c.number("mean_omega_rad_per_ps", 0.0)};
    check(is_valid(cov), c.where(), "variances must be >= 0 and cov^2 <= var_tau * var_omega");
    c.finish();
    out = CovarianceState{cov};
  }
  r.finish();
  return out;
}

inline json spectrum_to_json(const SpectrumSpec& s) {
  if (const auto* g = std::get_if<GaussianSpectrumSpec>(&s))
    return {{"gaussian", {{"peak", g->peak}, {"sigma_rad_per_ps", g->sigma}, {"center_rad_per_ps", g->center}}}};
  if (const auto* f = std::get_if<FlatSpectrumSpec>(&s))
    return {{"flat", {{"level", f->level}, {"half_width_rad_per_ps", f->half_width}}}};
  return {{"csv", std::get<CsvRef>(s).path}};
}

inline json cross_to_json(const CrossSpec& c) {
  if (const auto* x = std::get_if<ClassicalExtremalCross>(&c)) return {{"classical_extremal_scale", x->scale}};
  if (const auto* x = std::get_if<QuantumExtremalCross>(&c)) return {{"quantum_extremal_scale", x->scale}};
  return {{"csv", std::get<CsvRef>(c).path}};
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
  detail::ObjectReader r(j, "scenario");
  Scenario s;
  const auto version = r.integer("schema_version");
  detail::check(version == kScenarioSchemaVersion, "scenario.schema_version",
                "unsupported version " + std::to_string(version));
  if (r.has("name")) s.name = r.string("name");
  s.state = detail::parse_state(r.raw("state"));

  auto k = r.object("kit");
  s.kit = {k.number("beta_L_ps2"), k.number("delay_1_ps", 0.0), k.number("delay_2_ps", 0.0)};
  k.finish();

  s.jitter_sigma = r.number("jitter_sigma_ps", 0.0);
  detail::check(s.jitter_sigma >= 0.0, "scenario.jitter_sigma_ps", "must be >= 0");

  if (r.has("sampler")) {
    auto sm = r.object("sampler");
    SamplerSpec sp;
    sp.n = static_cast<std::size_t>(sm.integer("n"));
    sp.seed = sm.integer("seed");
    sp.jitter_seed = sm.integer("jitter_seed", rng::mix64(sp.seed ^ rng::hash_label("jitter")));
    detail::check(sp.n >= 2, sm.path("n"), "need at least 2 events");
    sm.finish();
    s.sampler = sp;
  }

  if (r.has("outputs")) {
    auto o = r.object("outputs");
    if (o.has("dir")) s.outputs.dir = o.string("dir");
    s.outputs.events_csv = o.boolean("events_csv", true);
    s.outputs.tau_density_csv = o.boolean("tau_density_csv", false);
    s.outputs.spectra_csv = o.boolean("spectra_csv", false);
    s.outputs.amplitude_csv = o.boolean("amplitude_csv", false);
    s.outputs.amplitude_bin = o.boolean("amplitude_bin", false);
    s.outputs.density_csv = o.boolean("density_csv", false);
    s.outputs.density_bin = o.boolean("density_bin", false);
    o.finish();
  }
  r.finish();
  return s;
}

inline json to_json(const Scenario& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["name"] = s.name;
  json state;
  if (const auto* b = std::get_if<BiphotonState>(&s.state)) {
    state["biphoton"] = {{"pump_sigma_rad_per_ps", b->pump_sigma},
                         {"pm_sigma_rad_per_ps", b->pm_sigma},
                         {"grid_n", b->grid_n}};
  } else if (const auto* st = std::get_if<StationaryState>(&s.state)) {
    json x;
    if (st->grid_n) x["grid"] = {{"n", *st->grid_n}, {"domega_rad_per_ps", *st->grid_domega}};
    x["s1"] = detail::spectrum_to_json(st->s1);
    x["s2"] = detail::spectrum_to_json(st->s2);
    x["cross"] = detail::cross_to_json(st->cross);
    x["window_ps"] = st->window;
    if (st->regime) x["regime"] = *st->regime;
    state["stationary"] = x;
  } else {
    const auto& c = std::get<CovarianceState>(s.state).cov;
    state["covariance"] = {{"var_tau_ps2", c.var_tau},
                           {"var_omega_rad2_per_ps2", c.var_omega},
                           {"cov_tau_omega_rad", c.cov_tau_omega},
                           {"mean_tau_ps", c.mean_tau},
                           {"mean_omega_rad_per_ps", c.mean_omega}};
  }
  j["state"] = state;
  j["kit"] = {{"beta_L_ps2", s.kit.beta_L}, {"delay_1_ps", s.kit.delay_1}, {"delay_2_ps", s.kit.delay_2}};
  j["jitter_sigma_ps"] = s.jitter_sigma;
  if (s.sampler) j["sampler"] = {{"n", s.sampler->n}, {"seed", s.sampler->seed}, {"jitter_seed", s.sampler->jitter_seed}};
  json o = {{"events_csv", s.outputs.events_csv},       {"tau_density_csv", s.outputs.tau_density_csv},
            {"spectra_csv", s.outputs.spectra_csv},     {"amplitude_csv", s.outputs.amplitude_csv},
            {"amplitude_bin", s.outputs.amplitude_bin}, {"density_csv", s.outputs.density_csv},
            {"density_bin", s.outputs.density_bin}};
  if (s.outputs.dir) o["dir"] = *s.outputs.dir;
  j["outputs"] = o;
  return j;
}

/// 64-bit FNV-1a of arbitrary bytes, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng::hash_label(bytes)));
  return buf;
}

/// Hash of the normalized scenario (keys sorted, defaults filled in).
inline std::string scenario_hash(const Scenario& s) { return fnv1a_hex(to_json(s).dump()); }

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, what + ": malformed JSON (" + e.what() + ")");
  }
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  detail::require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::filesystem::path& p) {
  return scenario_from_json(parse_json_text(read_text_file(p), p.string()));
}

/// Replaces the number at a dotted path ("kit.beta_L_ps2") in a scenario
/// document. The path must already exist and hold a number.
inline void set_numeric_field(json& doc, const std::string& path, double value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty() || !node->is_object() || !node->contains(key))
      throw Error(ErrorCode::InvalidArgument, "unknown parameter path '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number()) throw Error(ErrorCode::InvalidArgument, "parameter path '" + path + "' is not numeric");
  if (node->is_number_integer() && std::floor(value) == value && value >= 0.0 && value < 0x1.0p63)
    *node = static_cast<std::uint64_t>(value);
  else
    *node = value;
}

}  // namespace ndc
