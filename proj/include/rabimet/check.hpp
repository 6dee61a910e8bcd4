#pragma once

// Seeded comparison suites between the analytic modules and the oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <string_view>
#include <vector>

#include "rabimet/cfi.hpp"
#include "rabimet/metrics.hpp"
#include "rabimet/oracle.hpp"
#include "rabimet/su2.hpp"

namespace rabimet {

enum class CheckTarget { qfi, cfi, fidelity, unitary, convergence };

inline std::string_view to_string(CheckTarget t) {
  switch (t) {
    case CheckTarget::qfi: return "qfi";
    case CheckTarget::cfi: return "cfi";
    case CheckTarget::fidelity: return "fidelity";
    case CheckTarget::unitary: return "unitary";
    case CheckTarget::convergence: return "convergence";
  }
  return "?";
}

inline CheckTarget parse_check_target(std::string_view s) {
  for (CheckTarget t : {CheckTarget::qfi, CheckTarget::cfi, CheckTarget::fidelity,
                        CheckTarget::unitary, CheckTarget::convergence}) {
    if (to_string(t) == s) return t;
  }
  throw std::invalid_argument("unknown oracle target '" + std::string(s) + "'");
}

struct CheckLine {
  std::size_t draw = 0;
  std::string label;
  double analytic = 0.0;
  double reference = 0.0;
  double error = 0.0;  // relative or absolute, per target
  bool ok = false;
  std::string message;
};

struct CheckReport {
  CheckTarget target = CheckTarget::qfi;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<CheckLine> lines;

  double worst() const {
    double w = 0.0;
    for (const auto& l : lines) w = std::max(w, l.ok || l.message.empty() ? l.error : INFINITY);
    return w;
  }
  bool passed() const {
    return !lines.empty() && std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.ok; });
  }
};

namespace detail {

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(b), 1e-300);
  return std::abs(a - b) / scale;
}

// RK4 propagator at the packet center compared with the spin rotation times
// the scalar kinetic phase.
inline double unitary_error(const PhysicalParams& prm, std::size_t steps) {
  const double q = shifted_momentum(prm, 0.0);
  const Mat2 rk = oracle::evolve_numeric(prm, q, steps);
  const double lon = longitudinal(prm, q);
  const Vec3 axis{prm.rabi, 0.0, lon};
  const double scalar = prm.time * (q * q / (2.0 * prm.mass * prm.hbar) +
                                    prm.hbar * prm.wavevector * prm.wavevector / (8.0 * prm.mass) +
                                    0.5 * prm.detuning);
  const Mat2 closed = std::polar(1.0, -scalar) * spin_evolution(axis, prm.time);
  return (rk - closed).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Runs the comparison suite for `target` on `n_draws` seeded draws.
/// Tolerances: QFI and CFI 1e-5 relative, fidelity 1e-6 absolute (1e-7 on
/// the k0 = 0 closed-form draw), unitary 1e-8 element-wise, convergence
/// order within [3.7, 4.3].
inline CheckReport oracle_check(CheckTarget target, std::uint64_t seed, std::size_t n_draws) {
  CheckReport report;
  report.target = target;
  report.seed = seed;
  const auto draws = oracle::random_draws(seed, n_draws);
  auto record = [&](std::size_t i, std::string label, auto&& fn) {
    CheckLine line;
    line.draw = i;
    line.label = std::move(label);
    try {
      fn(line);
    } catch (const std::exception& e) {
      line.ok = false;
      line.message = e.what();
    }
    report.lines.push_back(std::move(line));
  };

  switch (target) {
    case CheckTarget::qfi:
      report.tolerance = 1e-5;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& prm = draws[i];
        const auto packet = GaussianPacket::from(prm);
        for (Variant v : {Variant::with_kinetic, Variant::without_kinetic}) {
          record(i, "qfi_" + std::string(to_string(v)), [&](CheckLine& l) {
            l.analytic = qfi(v, prm, packet).value;
            l.reference = oracle::qfi_fd(prm, packet, v, 1e-6 * prm.rabi);
            l.error = detail::relative_error(l.analytic, l.reference);
            l.ok = l.error <= report.tolerance;
          });
        }
      }
      break;
    case CheckTarget::cfi:
      report.tolerance = 1e-5;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& prm = draws[i];
        const auto packet = GaussianPacket::from(prm);
        for (Scheme s : {Scheme::pdm, Scheme::mm, Scheme::cm}) {
          for (Variant v : {Variant::with_kinetic, Variant::without_kinetic}) {
            if (s != Scheme::pdm && v == Variant::without_kinetic) continue;
            record(i, "cfi_" + std::string(to_string(s)) + "_" + std::string(to_string(v)),
                   [&](CheckLine& l) {
                     l.analytic = cfi(s, v, prm, packet).value;
                     l.reference = oracle::cfi_fd(prm, packet, s, v, 1e-6 * prm.rabi);
                     l.error = detail::relative_error(l.analytic, l.reference);
                     l.ok = l.error <= report.tolerance;
                   });
          }
        }
      }
      break;
    case CheckTarget::fidelity: {
      report.tolerance = 1e-6;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& prm = draws[i];
        const auto packet = GaussianPacket::from(prm);
        record(i, "fidelity", [&](CheckLine& l) {
          l.analytic = fidelity(prm, packet).value;
          l.reference = oracle::fidelity_numeric(prm, packet, oracle::fidelity_steps(prm, packet));
          l.error = std::abs(l.analytic - l.reference);
          l.ok = l.error <= report.tolerance;
        });
      }
      PhysicalParams special;
      special.hbar = 1e-34;
      special.wavevector = 0.0;
      record(draws.size(), "fidelity_k0_zero", [&](CheckLine& l) {
        const auto packet = GaussianPacket::from(special);
        const double a = special.hbar * special.time / (2.0 * special.mass * special.sigma * special.sigma);
        l.analytic = 1.0 / std::sqrt(1.0 + a * a);
        l.reference =
            oracle::fidelity_numeric(special, packet, oracle::fidelity_steps(special, packet));
        l.error = std::abs(l.analytic - l.reference);
        l.ok = l.error <= 1e-7;
      });
      break;
    }
    case CheckTarget::unitary:
      report.tolerance = 1e-8;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& prm = draws[i];
        record(i, "rk4_vs_closed", [&](CheckLine& l) {
          const double q = shifted_momentum(prm, 0.0);
          const double f = oracle::max_frequency(prm, q, q);
          const std::size_t steps = oracle::rk4_steps_for(f, prm.time, 1e-10);
          l.analytic = static_cast<double>(steps);
          l.error = detail::unitary_error(prm, steps);
          const Mat2 u = oracle::evolve_numeric(prm, q, steps);
          const double defect = (u * u.adjoint() - Mat2::Identity()).cwiseAbs().maxCoeff();
          l.reference = defect;
          l.ok = l.error <= report.tolerance && defect <= report.tolerance;
        });
      }
      break;
    case CheckTarget::convergence:
      report.tolerance = 0.3;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& prm = draws[i];
        record(i, "rk4_order", [&](CheckLine& l) {
          const double q = shifted_momentum(prm, 0.0);
          const double f = oracle::max_frequency(prm, q, q);
          // Asymptotic regime: step phase f h near 0.02.
          const auto steps = static_cast<std::size_t>(std::max(1000.0, std::ceil(50.0 * f * prm.time)));
          l.analytic = oracle::rk4_convergence_order(prm, q, steps);
          l.reference = 4.0;
          l.error = std::abs(l.analytic - 4.0);
          l.ok = l.error <= report.tolerance;
        });
      }
      break;
  }
  return report;
}

inline std::string format_report(const CheckReport& r) {
  std::string out;
  char buf[256];
  for (const auto& l : r.lines) {
    std::snprintf(buf, sizeof buf, "draw %3zu  %-22s analytic %.12g  reference %.12g  error %.3e  %s",
                  l.draw, l.label.c_str(), l.analytic, l.reference, l.error, l.ok ? "ok" : "FAIL");
    out += buf;
    if (!l.message.empty()) out += "  (" + l.message + ")";
    out += '\n';
  }
  std::snprintf(buf, sizeof buf, "%s seed %llu: worst %.3e, tolerance %.1e, %s\n",
                std::string(to_string(r.target)).c_str(), static_cast<unsigned long long>(r.seed),
                r.worst(), r.tolerance, r.passed() ? "PASS" : "FAIL");
  out += buf;
  return out;
}

}  // namespace rabimet
