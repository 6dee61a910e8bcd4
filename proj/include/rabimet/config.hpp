#pragma once

// Flat `key = value` configuration files for sweeps and point evaluations.
//
//   # comment
//   preset = fig3              optional; later keys override the preset
//   hbar = 1e-34               PhysicalParams fields, SI units
//   detuning = 1000            (aliases: delta, k0, t, omega)
//   metrics = qfi_with, qfi_without
//   axis1 = delta linear -2000 2000 401
//   axis2 = k0 values 1e6 2e6
//   tolerance = 1e-12
//   grid_points = 0
//   seed = 0
//   hbar_override = 1.0545718e-34

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rabimet/core.hpp"
#include "rabimet/sweep.hpp"

namespace rabimet {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(int line, const std::string& what)
      : std::invalid_argument(line > 0 ? "config line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  SweepSpec spec;
  std::set<std::string> keys;  // canonical names of the keys that were set
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline double parse_double(const std::string& s, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ConfigError(line, "expected a number, got '" + s + "'");
  }
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& s, int line) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(line, "expected a non-negative integer, got '" + s + "'");
  }
  errno = 0;
  const auto v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(line, "integer out of range: '" + s + "'");
  return v;
}

inline std::string canonical_key(const std::string& key) {
  static const std::map<std::string, std::string> aliases{
      {"delta", "detuning"}, {"k0", "wavevector"}, {"t", "time"}, {"omega", "rabi"}, {"metric", "metrics"}};
  const auto it = aliases.find(key);
  return it == aliases.end() ? key : it->second;
}

inline Axis parse_axis(const std::string& value, int line) {
  const auto w = split_words(value);
  if (w.size() < 2) throw ConfigError(line, "axis needs '<name> linear|log min max count' or '<name> values v...'");
  Axis a;
  try {
    a.name = parse_axis_name(w[0]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, e.what());
  }
  if (w[1] == "values") {
    std::vector<double> vals;
    for (std::size_t i = 2; i < w.size(); ++i) vals.push_back(parse_double(w[i], line));
    if (vals.empty()) throw ConfigError(line, "axis value list is empty");
    a = Axis::list(a.name, vals);
  } else {
    if (w.size() != 5) throw ConfigError(line, "range axis needs scale, min, max, count");
    try {
      a.scale = parse_scale(w[1]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line, e.what());
    }
    a.min = parse_double(w[2], line);
    a.max = parse_double(w[3], line);
    const auto count = parse_unsigned(w[4], line);
    if (count > 100000000) throw ConfigError(line, "axis count too large");
    a.count = static_cast<int>(count);
  }
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, e.what());
  }
  return a;
}

}  // namespace detail

/// Parses configuration text. Unknown or repeated keys and malformed values
/// throw ConfigError carrying the offending line number. Keys not given keep
/// the defaults of PhysicalParams and SweepSpec (or of the named preset).
inline LoadedConfig parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::istringstream is{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = detail::canonical_key(detail::trim(std::string_view(line).substr(0, eq)));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    if (value.empty()) throw ConfigError(lineno, "empty value for '" + key + "'");
    if (!entries.emplace(key, Entry{value, lineno}).second) {
      throw ConfigError(lineno, "duplicate key '" + key + "'");
    }
  }

  LoadedConfig out;
  if (const auto it = entries.find("preset"); it != entries.end()) {
    try {
      out.spec = preset(it->second.value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(it->second.line, e.what());
    }
  }
  SweepSpec& s = out.spec;
  bool axes_reset = false;
  for (const auto& [key, entry] : entries) {
    const int ln = entry.line;
    const std::string& v = entry.value;
    if (key == "preset") {
      s.preset = v;
    } else if (key == "hbar") {
      s.fixed.hbar = detail::parse_double(v, ln);
    } else if (key == "mass") {
      s.fixed.mass = detail::parse_double(v, ln);
    } else if (key == "rabi") {
      s.fixed.rabi = detail::parse_double(v, ln);
    } else if (key == "detuning") {
      s.fixed.detuning = detail::parse_double(v, ln);
    } else if (key == "wavevector") {
      s.fixed.wavevector = detail::parse_double(v, ln);
    } else if (key == "time") {
      s.fixed.time = detail::parse_double(v, ln);
    } else if (key == "sigma") {
      s.fixed.sigma = detail::parse_double(v, ln);
    } else if (key == "hbar_override") {
      s.hbar_override = detail::parse_double(v, ln);
    } else if (key == "tolerance") {
      s.tolerance = detail::parse_double(v, ln);
      if (!(s.tolerance > 0.0)) throw ConfigError(ln, "tolerance must be > 0");
    } else if (key == "grid_points") {
      s.grid_points = detail::parse_unsigned(v, ln);
    } else if (key == "seed") {
      s.seed = detail::parse_unsigned(v, ln);
    } else if (key == "metrics") {
      s.metrics.clear();
      for (const auto& w : detail::split_words(v)) {
        try {
          s.metrics.push_back(parse_metric(w));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(ln, e.what());
        }
      }
    } else if (key == "axis1" || key == "axis2") {
      if (!axes_reset) {
        s.axes.clear();
        axes_reset = true;
      }
      continue;  // placed in order below
    } else {
      throw ConfigError(ln, "unknown key '" + key + "'");
    }
    out.keys.insert(key);
  }
  for (const char* name : {"axis1", "axis2"}) {
    const auto it = entries.find(name);
    if (it == entries.end()) continue;
    if (std::string_view(name) == "axis2" && !entries.count("axis1")) {
      throw ConfigError(it->second.line, "axis2 given without axis1");
    }
    s.axes.push_back(detail::parse_axis(it->second.value, it->second.line));
    out.keys.insert(name);
  }
  return out;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Writes every setting of `spec` so that parse_config reproduces it exactly.
inline std::string emit_config(const SweepSpec& spec) {
  std::ostringstream os;
  os << "# rabimet " << kToolVersion << " resolved configuration\n";
  if (!spec.preset.empty()) os << "preset = " << spec.preset << '\n';
  const auto& p = spec.fixed;
  os << "hbar = " << format_double(p.hbar) << '\n'
     << "mass = " << format_double(p.mass) << '\n'
     << "rabi = " << format_double(p.rabi) << '\n'
     << "detuning = " << format_double(p.detuning) << '\n'
     << "wavevector = " << format_double(p.wavevector) << '\n'
     << "time = " << format_double(p.time) << '\n'
     << "sigma = " << format_double(p.sigma) << '\n';
  if (spec.hbar_override) os << "hbar_override = " << format_double(*spec.hbar_override) << '\n';
  os << "metrics =";
  for (std::size_t i = 0; i < spec.metrics.size(); ++i) {
    os << (i ? ", " : " ") << to_string(spec.metrics[i]);
  }
  os << '\n';
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const Axis& a = spec.axes[i];
    os << "axis" << i + 1 << " = " << to_string(a.name);
    if (a.is_list()) {
      os << " values";
      for (double v : a.values) os << ' ' << format_double(v);
    } else {
      os << ' ' << to_string(a.scale) << ' ' << format_double(a.min) << ' ' << format_double(a.max)
         << ' ' << a.count;
    }
    os << '\n';
  }
  os << "tolerance = " << format_double(spec.tolerance) << '\n'
     << "grid_points = " << spec.grid_points << '\n'
     << "seed = " << spec.seed << '\n';
  return os.str();
}

}  // namespace rabimet
