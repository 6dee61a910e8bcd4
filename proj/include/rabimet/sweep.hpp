#pragma once

// Parameter sweeps over one or two axes, the figure presets, and CSV/JSON
// emission of the resulting tables.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rabimet/cfi.hpp"
#include "rabimet/core.hpp"
#include "rabimet/errors.hpp"
#include "rabimet/metrics.hpp"

namespace rabimet {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Metric { fidelity, qfi_with, qfi_without, cfi_pdm_with, cfi_pdm_without, cfi_mm, cfi_cm };

inline constexpr Metric kAllMetrics[] = {Metric::fidelity,        Metric::qfi_with,
                                         Metric::qfi_without,     Metric::cfi_pdm_with,
                                         Metric::cfi_pdm_without, Metric::cfi_mm,
                                         Metric::cfi_cm};

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::fidelity: return "fidelity";
    case Metric::qfi_with: return "qfi_with";
    case Metric::qfi_without: return "qfi_without";
    case Metric::cfi_pdm_with: return "cfi_pdm_with";
    case Metric::cfi_pdm_without: return "cfi_pdm_without";
    case Metric::cfi_mm: return "cfi_mm";
    case Metric::cfi_cm: return "cfi_cm";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

enum class AxisName { delta, k0, t, sigma, omega };
enum class Scale { linear, log };

inline std::string_view to_string(AxisName a) {
  switch (a) {
    case AxisName::delta: return "delta";
    case AxisName::k0: return "k0";
    case AxisName::t: return "t";
    case AxisName::sigma: return "sigma";
    case AxisName::omega: return "omega";
  }
  return "?";
}

inline AxisName parse_axis_name(std::string_view s) {
  for (AxisName a : {AxisName::delta, AxisName::k0, AxisName::t, AxisName::sigma, AxisName::omega}) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown axis '" + std::string(s) + "'");
}

inline std::string_view to_string(Scale s) { return s == Scale::linear ? "linear" : "log"; }

inline Scale parse_scale(std::string_view s) {
  if (s == "linear") return Scale::linear;
  if (s == "log") return Scale::log;
  throw std::invalid_argument("unknown axis scale '" + std::string(s) + "'");
}

/// A swept parameter: either an evenly spaced range or an explicit value list.
struct Axis {
  AxisName name = AxisName::delta;
  double min = 0.0;
  double max = 1.0;
  int count = 2;
  Scale scale = Scale::linear;
  std::vector<double> values;  // non-empty selects the explicit list

  static Axis range(AxisName name, double min, double max, int count, Scale scale = Scale::linear) {
    return {name, min, max, count, scale, {}};
  }
  static Axis list(AxisName name, std::vector<double> values) {
    Axis a;
    a.name = name;
    a.values = std::move(values);
    a.count = static_cast<int>(a.values.size());
    return a;
  }

  bool is_list() const { return !values.empty(); }

  void validate() const {
    const std::string who = "axis " + std::string(to_string(name)) + ": ";
    if (is_list()) {
      for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument(who + "non-finite value");
      }
      return;
    }
    if (count < 2) throw std::invalid_argument(who + "count must be >= 2");
    if (!(min < max)) throw std::invalid_argument(who + "min must be < max");
    if (scale == Scale::log && !(min > 0.0)) {
      throw std::invalid_argument(who + "log scale requires min > 0");
    }
  }

  std::vector<double> samples() const {
    validate();
    if (is_list()) return values;
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / (count - 1);
      if (i == count - 1) {
        out[static_cast<std::size_t>(i)] = max;
      } else if (scale == Scale::linear) {
        out[static_cast<std::size_t>(i)] = min + (max - min) * f;
      } else {
        out[static_cast<std::size_t>(i)] = min * std::pow(max / min, f);
      }
    }
    return out;
  }

  friend bool operator==(const Axis&, const Axis&) = default;
};

inline void apply_axis(PhysicalParams& params, AxisName name, double value) {
  switch (name) {
    case AxisName::delta: params.detuning = value; break;
    case AxisName::k0: params.wavevector = value; break;
    case AxisName::t: params.time = value; break;
    case AxisName::sigma: params.sigma = value; break;
    case AxisName::omega: params.rabi = value; break;
  }
}

struct SweepSpec {
  std::vector<Metric> metrics{Metric::qfi_with};
  std::vector<Axis> axes;
  PhysicalParams fixed;
  std::optional<double> hbar_override;
  double tolerance = kDefaultTolerance;
  std::size_t grid_points = 0;  // 0: recommended size per point
  std::uint64_t seed = 0;
  std::string preset;

  void validate() const {
    if (metrics.empty()) throw std::invalid_argument("sweep: at least one metric required");
    if (axes.empty() || axes.size() > 2) throw std::invalid_argument("sweep: need 1 or 2 axes");
    if (axes.size() == 2 && axes[0].name == axes[1].name) {
      throw std::invalid_argument("sweep: axes must differ");
    }
    for (const auto& a : axes) a.validate();
    if (!(tolerance > 0.0)) throw std::invalid_argument("sweep: tolerance must be > 0");
    if (grid_points != 0 && grid_points < 64) {
      throw std::invalid_argument("sweep: grid_points must be 0 or >= 64");
    }
    resolved_params().validate();
  }

  PhysicalParams resolved_params() const {
    PhysicalParams p = fixed;
    if (hbar_override) p.hbar = *hbar_override;
    return p;
  }

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct MetricValue {
  double value = 0.0;
  double error = 0.0;
};

inline MetricValue evaluate(Metric metric, const PhysicalParams& params, double tol,
                            std::size_t grid_points = 0) {
  const auto packet = GaussianPacket::from(params);
  switch (metric) {
    case Metric::fidelity: {
      const auto r = fidelity(params, packet, tol);
      return {r.value, r.estimated_error};
    }
    case Metric::qfi_with: {
      const auto r = qfi_with_kinetic(params, packet, tol);
      return {r.value, r.estimated_error};
    }
    case Metric::qfi_without: {
      const auto r = qfi_without_kinetic(params);
      return {r.value, r.estimated_error};
    }
    case Metric::cfi_pdm_with: {
      const auto r = cfi_pdm_with_kinetic(params, packet, tol);
      return {r.value, r.estimated_error};
    }
    case Metric::cfi_pdm_without:
      return {cfi_pdm_without_kinetic(params), 0.0};
    case Metric::cfi_mm:
    case Metric::cfi_cm: {
      const auto r = cfi(metric == Metric::cfi_mm ? Scheme::mm : Scheme::cm, Variant::with_kinetic,
                         params, packet, tol, grid_points);
      return {r.value, r.estimated_error};
    }
  }
  return {};
}

/// Table of sweep results. Columns are the axes, then value and error for
/// each metric, then `flag` (bit i set when metric i failed at that point)
/// and `message`. Failed cells hold 0 for both value and error.
struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // axis values, then value/error pairs
  std::vector<std::uint32_t> flags;
  std::vector<std::string> messages;
  nlohmann::ordered_json meta;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Meta record: resolved parameters and sweep settings, seed, tool version.
inline nlohmann::ordered_json sweep_meta(const SweepSpec& spec) {
  const auto p = spec.resolved_params();
  nlohmann::ordered_json meta;
  meta["tool"] = "rabimet";
  meta["version"] = std::string(kToolVersion);
  meta["preset"] = spec.preset;
  meta["seed"] = spec.seed;
  meta["params"] = {{"hbar", p.hbar},           {"mass", p.mass},         {"rabi", p.rabi},
                    {"detuning", p.detuning},   {"wavevector", p.wavevector},
                    {"time", p.time},           {"sigma", p.sigma}};
  meta["tolerance"] = spec.tolerance;
  meta["grid_points"] = spec.grid_points;
  auto metrics = nlohmann::ordered_json::array();
  for (Metric m : spec.metrics) metrics.push_back(std::string(to_string(m)));
  meta["metrics"] = metrics;
  auto axes = nlohmann::ordered_json::array();
  for (const auto& a : spec.axes) {
    nlohmann::ordered_json j;
    j["name"] = std::string(to_string(a.name));
    if (a.is_list()) {
      j["values"] = a.values;
    } else {
      j["min"] = a.min;
      j["max"] = a.max;
      j["count"] = a.count;
      j["scale"] = std::string(to_string(a.scale));
    }
    axes.push_back(j);
  }
  meta["axes"] = axes;
  return meta;
}

/// Evaluates every grid point (row-major over the axes, first axis
/// outermost) on `jobs` worker threads. Numerical failures at a point are
/// recorded in its flag and message; invalid specs throw.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
  spec.validate();
  const PhysicalParams base = spec.resolved_params();
  std::vector<std::vector<double>> samples;
  for (const auto& a : spec.axes) samples.push_back(a.samples());
  std::size_t total = 1;
  for (const auto& s : samples) total *= s.size();

  SweepResult result;
  for (const auto& a : spec.axes) result.columns.emplace_back(to_string(a.name));
  for (Metric m : spec.metrics) {
    result.columns.emplace_back(to_string(m));
    result.columns.push_back(std::string(to_string(m)) + "_error");
  }
  result.columns.emplace_back("flag");
  result.columns.emplace_back("message");
  result.rows.assign(total, {});
  result.flags.assign(total, 0);
  result.messages.assign(total, {});
  result.meta = sweep_meta(spec);

  auto run_point = [&](std::size_t index) {
    std::vector<std::size_t> idx(samples.size());
    std::size_t rem = index;
    for (std::size_t d = samples.size(); d-- > 0;) {
      idx[d] = rem % samples[d].size();
      rem /= samples[d].size();
    }
    PhysicalParams p = base;
    auto& row = result.rows[index];
    for (std::size_t d = 0; d < samples.size(); ++d) {
      const double v = samples[d][idx[d]];
      apply_axis(p, spec.axes[d].name, v);
      row.push_back(v);
    }
    std::string message;
    for (std::size_t k = 0; k < spec.metrics.size(); ++k) {
      MetricValue mv;
      try {
        mv = evaluate(spec.metrics[k], p, spec.tolerance, spec.grid_points);
        if (!std::isfinite(mv.value) || !std::isfinite(mv.error)) {
          throw NumericalError("non-finite result");
        }
      } catch (const std::exception& e) {
        mv = {};
        result.flags[index] |= 1U << k;
        if (!message.empty()) message += "; ";
        message += std::string(to_string(spec.metrics[k])) + ": " + e.what();
      }
      row.push_back(mv.value);
      row.push_back(mv.error);
    }
    result.messages[index] = std::move(message);
  };

  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) run_point(i);
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < total; i = next++) run_point(i);
    });
  }
  for (auto& t : pool) t.join();
  return result;
}

/// RFC 4180 field quoting: fields containing a comma, quote, or line break
/// are wrapped in quotes with embedded quotes doubled.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// CSV with `#`-prefixed metadata lines, a header row, and one row per
/// point. Numbers use 17 significant digits.
inline std::string to_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "# tool = rabimet " << r.meta.value("version", "") << '\n';
  if (r.meta.contains("preset") && !r.meta["preset"].get<std::string>().empty()) {
    os << "# preset = " << r.meta["preset"].get<std::string>() << '\n';
  }
  os << "# seed = " << r.meta.value("seed", std::uint64_t{0}) << '\n';
  if (r.meta.contains("params")) {
    for (const auto& [k, v] : r.meta["params"].items()) {
      os << "# " << k << " = " << format_double(v.get<double>()) << '\n';
    }
  }
  os << "# tolerance = " << format_double(r.meta.value("tolerance", 0.0)) << '\n';
  os << "# grid_points = " << r.meta.value("grid_points", std::size_t{0}) << '\n';
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    os << (c ? "," : "") << csv_field(r.columns[c]);
  }
  os << '\n';
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    for (std::size_t c = 0; c < r.rows[i].size(); ++c) {
      os << (c ? "," : "") << format_double(r.rows[i][c]);
    }
    os << ',' << r.flags[i] << ',' << csv_field(r.messages[i]) << '\n';
  }
  return os.str();
}

inline std::string to_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["meta"] = r.meta;
  j["columns"] = r.columns;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (double v : r.rows[i]) row.push_back(v);
    row.push_back(r.flags[i]);
    row.push_back(r.messages[i]);
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

/// Reads back the numeric part of a CSV written by to_csv.
inline std::vector<std::vector<double>> read_csv_numbers(const std::string& text,
                                                         std::size_t numeric_columns) {
  std::vector<std::vector<double>> out;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < numeric_columns; ++c) {
      const std::size_t comma = line.find(',', pos);
      row.push_back(std::strtod(line.substr(pos, comma - pos).c_str(), nullptr));
      pos = comma + 1;
    }
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure presets. Caption parameters are stored as given; hbar is 1e-34 J s
// (override with hbar_override).

inline constexpr double kPresetHbar = 1e-34;

inline std::vector<std::string_view> preset_names() {
  return {"fig1", "fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6", "fig7"};
}

/// `fig2a_third_k0` adds a third k0 curve at 3e6 1/m to fig2a, whose caption
/// repeats 2e6.
inline SweepSpec preset(std::string_view name, bool fig2a_third_k0 = false) {
  SweepSpec s;
  s.preset = std::string(name);
  s.fixed.hbar = kPresetHbar;
  s.fixed.time = 1.0;
  s.fixed.wavevector = 1.0e6;
  s.fixed.detuning = 1.0e3;
  const Axis time_axis = Axis::range(AxisName::t, 0.0, 1.0, 101);
  if (name == "fig1") {
    s.metrics = {Metric::fidelity};
    s.axes = {Axis::range(AxisName::delta, -2000.0, 2000.0, 41),
              Axis::range(AxisName::k0, 0.0, 4.0e6, 41)};
  } else if (name == "fig2a") {
    s.metrics = {Metric::qfi_with, Metric::qfi_without};
    std::vector<double> k0{1.0e6, 2.0e6};
    if (fig2a_third_k0) k0.push_back(3.0e6);
    s.axes = {Axis::list(AxisName::k0, k0), time_axis};
  } else if (name == "fig2b") {
    s.metrics = {Metric::qfi_with, Metric::qfi_without};
    s.axes = {Axis::list(AxisName::delta, {1000.0, 500.0, 100.0}), time_axis};
  } else if (name == "fig3") {
    s.metrics = {Metric::qfi_with, Metric::qfi_without};
    s.axes = {Axis::range(AxisName::delta, -2000.0, 2000.0, 401)};
  } else if (name == "fig4") {
    s.metrics = {Metric::qfi_with, Metric::qfi_without};
    s.axes = {Axis::range(AxisName::sigma, 1.0e-6, 1.0e-3, 200, Scale::log)};
  } else if (name == "fig5") {
    s.metrics = {Metric::qfi_without, Metric::cfi_pdm_without};
    s.axes = {time_axis};
  } else if (name == "fig6") {
    s.metrics = {Metric::qfi_without, Metric::cfi_pdm_without};
    s.axes = {Axis::list(AxisName::delta, {500.0, 100.0}), time_axis};
  } else if (name == "fig7") {
    s.metrics = {Metric::qfi_with, Metric::cfi_pdm_with, Metric::cfi_mm, Metric::cfi_cm};
    s.axes = {time_axis};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return s;
}

/// Column index of `name` in a sweep result, or throws.
inline std::size_t column_index(const SweepResult& r, std::string_view name) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), name);
  if (it == r.columns.end()) throw std::out_of_range("no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - r.columns.begin());
}

}  // namespace rabimet
