#pragma once
// Plain SVG views of sampled detection events: a (t1, t2) scatter and a
// histogram of tau = t1 - t2. Output depends only on the events.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ndc/error.hpp"
#include "ndc/io.hpp"
#include "ndc/runner.hpp"
#include "ndc/sampler.hpp"

namespace ndc {

inline constexpr std::size_t kScatterMaxPoints = 5000;
inline constexpr std::size_t kHistogramBins = 80;

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string short_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double left = 70, top = 30, width = 400, height = 400;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

inline void pad_range(double& lo, double& hi) {
  if (hi <= lo) {
    const double c = lo, h = std::max(1e-12, std::abs(c) * 1e-6);
    lo = c - h;
    hi = c + h;
  }
  const double m = 0.02 * (hi - lo);
  lo -= m;
  hi += m;
}

inline void svg_open(std::ostream& o, const Frame& f, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(f.left + f.width + 30, 0) << "\" height=\""
    << fixed(f.top + f.height + 60, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(f.left) << "\" y=\"18\">" << title << "</text>\n";
  o << "<rect x=\"" << fixed(f.left) << "\" y=\"" << fixed(f.top) << "\" width=\"" << fixed(f.width)
    << "\" height=\"" << fixed(f.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
}

inline void svg_axes(std::ostream& o, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double yb = f.top + f.height;
  o << "<text x=\"" << fixed(f.left) << "\" y=\"" << fixed(yb + 16) << "\">" << short_num(f.x0) << "</text>\n";
  o << "<text x=\"" << fixed(f.left + f.width) << "\" y=\"" << fixed(yb + 16) << "\" text-anchor=\"end\">"
    << short_num(f.x1) << "</text>\n";
  o << "<text x=\"" << fixed(f.left + f.width / 2) << "\" y=\"" << fixed(yb + 40) << "\" text-anchor=\"middle\">"
    << xlabel << "</text>\n";
  o << "<text x=\"" << fixed(f.left - 6) << "\" y=\"" << fixed(yb) << "\" text-anchor=\"end\">" << short_num(f.y0)
    << "</text>\n";
  o << "<text x=\"" << fixed(f.left - 6) << "\" y=\"" << fixed(f.top + 10) << "\" text-anchor=\"end\">"
    << short_num(f.y1) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fixed(f.top + f.height / 2) << "\" transform=\"rotate(-90 16 "
    << fixed(f.top + f.height / 2) << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
}

}  // namespace detail

/// Scatter of the first kScatterMaxPoints events on common t1/t2 axes.
inline std::string scatter_svg(const EventBatch& b, const std::string& title) {
  detail::require(!b.events.empty(), ErrorCode::InvalidArgument, "event batch is empty");
  const std::size_t n = std::min(b.size(), kScatterMaxPoints);
  double lo = b.events[0].t1, hi = lo;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min({lo, b.events[i].t1, b.events[i].t2});
    hi = std::max({hi, b.events[i].t1, b.events[i].t2});
  }
  detail::pad_range(lo, hi);
  const detail::Frame f{lo, hi, lo, hi};
  std::ostringstream o;
  detail::svg_open(o, f, title + " (" + std::to_string(n) + " of " + std::to_string(b.size()) + " events)");
  o << "<g fill=\"#1f4e9c\" fill-opacity=\"0.5\">\n";
  for (std::size_t i = 0; i < n; ++i)
    o << "<circle cx=\"" << detail::fixed(f.px(b.events[i].t1)) << "\" cy=\"" << detail::fixed(f.py(b.events[i].t2))
      << "\" r=\"1.2\"/>\n";
  o << "</g>\n";
  detail::svg_axes(o, f, "t1 (ps)", "t2 (ps)");
  o << "</svg>\n";
  return o.str();
}

/// Histogram of tau over all events.
inline std::string tau_histogram_svg(const EventBatch& b, const std::string& title) {
  detail::require(!b.events.empty(), ErrorCode::InvalidArgument, "event batch is empty");
  double lo = b.events[0].tau(), hi = lo;
  for (const auto& e : b.events) {
    lo = std::min(lo, e.tau());
    hi = std::max(hi, e.tau());
  }
  detail::pad_range(lo, hi);
  std::vector<std::size_t> counts(kHistogramBins, 0);
  for (const auto& e : b.events) {
    const auto k = static_cast<std::size_t>((e.tau() - lo) / (hi - lo) * kHistogramBins);
    ++counts[std::min(k, kHistogramBins - 1)];
  }
  const double top = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const detail::Frame f{lo, hi, 0.0, top * 1.05};
  std::ostringstream o;
  detail::svg_open(o, f, title);
  o << "<g fill=\"#c0392b\">\n";
  const double bw = (hi - lo) / kHistogramBins;
  for (std::size_t k = 0; k < kHistogramBins; ++k) {
    if (!counts[k]) continue;
    const double x0 = f.px(lo + k * bw), x1 = f.px(lo + (k + 1) * bw), y = f.py(static_cast<double>(counts[k]));
    o << "<rect x=\"" << detail::fixed(x0) << "\" y=\"" << detail::fixed(y) << "\" width=\"" << detail::fixed(x1 - x0)
      << "\" height=\"" << detail::fixed(f.top + f.height - y) << "\"/>\n";
  }
  o << "</g>\n";
  detail::svg_axes(o, f, "tau = t1 - t2 (ps)", "events per bin");
  o << "</svg>\n";
  return o.str();
}

/// Renders every event batch listed in a run record. Files go to `out_dir`
/// (default: next to the record). Returns the written paths.
inline std::vector<std::filesystem::path> render_record(const std::filesystem::path& record_path,
                                                        std::optional<std::filesystem::path> out_dir = {}) {
  const auto rec = parse_json_text(read_text_file(record_path), record_path.string());
  const auto dir = record_path.parent_path();
  const auto target = out_dir ? *out_dir : dir;
  detail::require(rec.is_object() && rec.contains("outputs") && rec["outputs"].contains("events") &&
                      rec["outputs"]["events"].is_object() && !rec["outputs"]["events"].empty(),
                  ErrorCode::InvalidArgument, "run record lists no sampled events");
  std::vector<std::pair<std::string, std::string>> pending;
  for (const auto& [name, file] : rec["outputs"]["events"].items()) {
    detail::require(file.is_string(), ErrorCode::InvalidArgument, "event entry '" + name + "' is not a path");
    auto in = io::open_input((dir / file.get<std::string>()).string());
    const auto batch = io::read_events_csv(in);
    detail::require(!batch.events.empty(), ErrorCode::InvalidArgument, "event batch '" + name + "' is empty");
    pending.emplace_back("scatter_" + name + ".svg", scatter_svg(batch, name + ": t1 vs t2"));
    pending.emplace_back("tau_hist_" + name + ".svg", tau_histogram_svg(batch, name + ": tau histogram"));
  }
  std::filesystem::create_directories(target);
  std::vector<std::filesystem::path> written;
  for (const auto& [file, body] : pending) {
    io::write_file((target / file).string(), [&](std::ostream& o) { o << body; });
    written.push_back(target / file);
  }
  return written;
}

}  // namespace ndc
