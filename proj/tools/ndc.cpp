// ndc: run scenarios, scan one parameter, render sampled events.
//
// Exit codes: 0 success, 2 validation error, 3 numerical precondition
// failure. Errors are reported as one JSON object on stderr.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndc/render.hpp"
#include "ndc/runner.hpp"
#include "ndc/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int report(const std::string& code, const std::string& message, int exit_code) {
  const ndc::json err = {{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
  std::cerr << err.dump() << '\n';
  return exit_code;
}

fs::path default_output_dir(const fs::path& scenario_file) {
  const char* env = std::getenv(ndc::kOutputDirEnv);
  const fs::path base = env && *env ? fs::path(env) : fs::path("ndc-output");
  return base / scenario_file.stem();
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ndc::Error(ndc::ErrorCode::InvalidArgument, "empty entry in --values");
    out.push_back(ndc::io::parse_double(std::string_view(item).substr(b, e - b + 1)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_run(const fs::path& file, const std::optional<fs::path>& out_dir) {
  const auto scenario = ndc::load_scenario(file);
  const auto base = file.parent_path();
  fs::path dir;
  if (out_dir)
    dir = *out_dir;
  else if (scenario.outputs.dir)
    dir = ndc::detail::resolve(base, *scenario.outputs.dir);
  else
    dir = default_output_dir(file);

  const auto artifacts = ndc::execute_run(scenario, base);
  const auto record = ndc::write_artifacts(artifacts, dir);
  const auto& a = artifacts.record["analytic"];
  std::cout << "record: " << record.string() << '\n';
  std::cout << "separability product: " << a["separability"]["product"].dump()
            << (a["separability"]["separable_consistent"].get<bool>() ? " (separable-consistent)" : " (entangled)")
            << '\n';
  std::cout << "witness violated: " << (a["witness"]["violated"].get<bool>() ? "yes" : "no")
            << ", margin " << a["witness"]["margin_ps2"].dump() << " ps^2\n";
  if (scenario.jitter_sigma > 0.0) {
    const auto& j = a["jitter"];
    std::cout << "with detector jitter: violated " << (j["witness_observed"]["violated"].get<bool>() ? "yes" : "no")
              << ", margin " << j["witness_observed"]["margin_ps2"].dump() << " ps^2, dispersion ratio "
              << j["feasibility"]["dispersion_ratio"].dump() << '\n';
  }
  if (!artifacts.record["sampling"].is_null()) {
    const auto& w = artifacts.record["sampling"]["witness"];
    std::cout << "sampled witness violated: " << (w["violated"].get<bool>() ? "yes" : "no") << ", significance "
              << w["significance"].dump() << '\n';
  }
  return 0;
}

int cmd_scan(const fs::path& file, const std::string& param, const std::string& values,
             const std::optional<fs::path>& output) {
  const auto doc = ndc::to_json(ndc::load_scenario(file));
  const auto rows = ndc::run_scan(doc, param, parse_values(values), file.parent_path());
  if (output) {
    if (output->has_parent_path()) fs::create_directories(output->parent_path());
    ndc::io::write_file(output->string(), [&](std::ostream& o) { ndc::write_scan_csv(o, rows); });
  } else {
    ndc::write_scan_csv(std::cout, rows);
  }
  return 0;
}

int cmd_render(const fs::path& record, const std::optional<fs::path>& out_dir) {
  for (const auto& p : ndc::render_record(record, out_dir)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal dispersion cancellation: second-moment witness simulator"};
  app.set_version_flag("--version", std::string(ndc::kToolVersion));
  app.require_subcommand(1);

  std::string run_file, scan_file, scan_param, scan_values, render_file;
  std::optional<std::string> run_out, scan_out, render_out;

  auto* run = app.add_subcommand("run", "Run a scenario and write its RunRecord");
  run->add_option("file", run_file, "Scenario JSON")->required();
  run->add_option("--out-dir", run_out, "Output directory (default: outputs.dir, then $NDC_OUTPUT_DIR/<name>)");

  auto* scan = app.add_subcommand("scan", "Evaluate the witness over values of one numeric field");
  scan->add_option("file", scan_file, "Scenario JSON")->required();
  scan->add_option("--param", scan_param, "Dotted field path, e.g. kit.beta_L_ps2")->required();
  scan->add_option("--values", scan_values, "Comma-separated values")->required();
  scan->add_option("--output", scan_out, "CSV file (default: stdout)");

  auto* render = app.add_subcommand("render", "Draw SVG scatter and tau histogram from a RunRecord");
  render->add_option("record", render_file, "run_record.json")->required();
  render->add_option("--out-dir", render_out, "Output directory (default: next to the record)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), kExitValidation);
  }

  auto opt_path = [](const std::optional<std::string>& s) {
    return s ? std::optional<fs::path>(*s) : std::optional<fs::path>{};
  };
  try {
    if (run->parsed()) return cmd_run(run_file, opt_path(run_out));
    if (scan->parsed()) return cmd_scan(scan_file, scan_param, scan_values, opt_path(scan_out));
    return cmd_render(render_file, opt_path(render_out));
  } catch (const ndc::Error& e) {
    return report(std::string(ndc::to_string(e.code())), e.what(),
                  ndc::is_validation_error(e.code()) ? kExitValidation : kExitNumerical);
  } catch (const fs::filesystem_error& e) {
    return report("IoError", e.what(), kExitValidation);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 1);
  }
}
