#pragma once

// Fidelity between the evolutions with and without the kinetic term, and the
// quantum Fisher information for the Rabi frequency under both Hamiltonians.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string_view>

#include "rabimet/core.hpp"
#include "rabimet/errors.hpp"
#include "rabimet/quad.hpp"
#include "rabimet/su2.hpp"

namespace rabimet {

inline constexpr double kDefaultTolerance = 1e-12;

enum class Variant { with_kinetic, without_kinetic };

inline std::string_view to_string(Variant v) {
  return v == Variant::with_kinetic ? "with" : "without";
}

struct FidelityResult {
  double value = 0.0;
  double estimated_error = 0.0;
};

struct QfiResult {
  double value = 0.0;
  Variant variant = Variant::without_kinetic;
  double estimated_error = 0.0;
};

namespace detail {

// Largest |q| reached on the packet window, q = p + hbar k0 / 2.
inline double max_shifted_momentum(const PhysicalParams& params, const GaussianPacket& packet) {
  const double shift = 0.5 * params.hbar * params.wavevector;
  const double half = packet.half_width(params.hbar);
  return std::max(std::abs(packet.center_p + shift - half), std::abs(packet.center_p + shift + half));
}

inline QuadOptions oscillatory_options(double tol, double phase_rate, const GaussianPacket& packet,
                                       double hbar) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  QuadOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = tol;
  opts.initial_panels = oscillation_panels(phase_rate, packet, hbar);
  return opts;
}

}  // namespace detail

/// Overlap of the internal-state propagators at initial momentum p, written
/// as the four-term expansion
///   cos c cos d - i m3 sin c cos d - i n3 sin d cos c - (m3 n3 + m1 n1) sin c sin d
/// with c = t omega(p) / 2, m = (Omega, 0, D) / omega(p) for the kinetic
/// Hamiltonian and d = -t omega' / 2, n = (Omega, 0, Delta) / omega' without.
inline Complex spin_overlap(const PhysicalParams& params, double p) {
  const double t = params.time;
  const double lon = longitudinal(params, shifted_momentum(params, p));
  const double w = std::hypot(lon, params.rabi);
  const double w0 = omega_prime(params);
  const double c = 0.5 * t * w;
  const double d = -0.5 * t * w0;
  const double m1 = w > 0.0 ? params.rabi / w : 0.0;
  const double m3 = w > 0.0 ? lon / w : 1.0;
  const double n1 = w0 > 0.0 ? params.rabi / w0 : 0.0;
  const double n3 = w0 > 0.0 ? params.detuning / w0 : 1.0;
  const double cc = std::cos(c), sc = std::sin(c), cd = std::cos(d), sd = std::sin(d);
  return Complex(cc * cd - (m3 * n3 + m1 * n1) * sc * sd, -m3 * sc * cd - n3 * sd * cc);
}

/// Kinetic phase (t / hbar)(q^2 / 2m + hbar^2 k0^2 / 8m) at q = p + hbar k0 / 2.
inline double kinetic_phase(const PhysicalParams& params, double p) {
  const double q = shifted_momentum(params, p);
  return params.time * (q * q / (2.0 * params.mass * params.hbar) +
                        params.hbar * params.wavevector * params.wavevector / (8.0 * params.mass));
}

inline FidelityResult fidelity(const PhysicalParams& params, const GaussianPacket& packet,
                               double tol = kDefaultTolerance) {
  params.validate();
  if (params.time == 0.0) return {1.0, 0.0};
  auto amplitude = [&](double p) {
    return std::polar(1.0, kinetic_phase(params, p)) * spin_overlap(params, p);
  };
  const double rate =
      params.time * (detail::max_shifted_momentum(params, packet) / (params.mass * params.hbar) +
                     std::abs(params.wavevector) / params.mass);
  const auto opts = detail::oscillatory_options(tol, rate, packet, params.hbar);
  const auto overlap = gaussian_expectation(amplitude, packet, params, opts);
  const double mod = std::abs(overlap.value);
  return {std::clamp(mod * mod, 0.0, 1.0), 2.0 * mod * overlap.error + overlap.error * overlap.error};
}

/// Closed form without the kinetic term:
///   F = ((Omega^2 w' t + Delta^2 sin w't)^2 + Delta^2 w'^2 (cos w't - 1)^2) / w'^6.
inline QfiResult qfi_without_kinetic(const PhysicalParams& params) {
  params.validate();
  const double w = omega_prime(params);
  if (w == 0.0) throw DegenerateFrequency("qfi_without_kinetic: Omega = Delta = 0");
  const double t = params.time;
  const double om2 = params.rabi * params.rabi;
  const double de2 = params.detuning * params.detuning;
  const double wt = w * t;
  const double a = om2 * wt + de2 * std::sin(wt);
  const double b = std::cos(wt) - 1.0;
  const double w2 = w * w;
  const double value = (a * a + de2 * w2 * b * b) / (w2 * w2 * w2);
  return {value, Variant::without_kinetic, 0.0};
}

/// 4 (<|R|^2>_p - <R_z>_p^2) with R evaluated at q = p + hbar k0 / 2 and
/// averages taken over the packet momentum density.
inline QfiResult qfi_with_kinetic(const PhysicalParams& params, const GaussianPacket& packet,
                                  double tol = kDefaultTolerance) {
  params.validate();
  auto moments = [&](double p) {
    const RVector r = rvector_with_kinetic(params, shifted_momentum(params, p));
    return std::array<double, 2>{r.norm2(), r.rz};
  };
  const double rate = params.time * std::abs(params.wavevector) / params.mass;
  const auto opts = detail::oscillatory_options(tol, rate, packet, params.hbar);
  const auto res = gaussian_expectation(moments, packet, params, opts);
  const double mean_sq = res.value[0];
  const double mean_z = res.value[1];
  const double value = 4.0 * (mean_sq - mean_z * mean_z);
  const double err = 4.0 * (res.error + 2.0 * std::abs(mean_z) * res.error);
  return {std::max(0.0, value), Variant::with_kinetic, err};
}

inline QfiResult qfi(Variant variant, const PhysicalParams& params, const GaussianPacket& packet,
                     double tol = kDefaultTolerance) {
  return variant == Variant::with_kinetic ? qfi_with_kinetic(params, packet, tol)
                                          : qfi_without_kinetic(params);
}

}  // namespace rabimet
