#pragma once

// Outcome probabilities and classical Fisher information for Omega under
// three measurements: internal-state population (PDM), momentum (MM), and
// joint internal state plus momentum (CM).
//
// Momentum bookkeeping for an atom prepared in |a> with momentum p: the
// effective Hamiltonian sees q = p + hbar k0 / 2 and conserves it; the
// lower-state component is observed at p, the upper-state component at
// p + hbar k0. Hence
//   P_a(p) = w(p) f(p),   P_b(p) = w(p - hbar k0) (1 - f(p - hbar k0)),
// where f(p) = cos^2 c' + n_z'^2 sin^2 c' = 1 - (Omega / omega)^2 sin^2(omega t / 2).

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "rabimet/core.hpp"
#include "rabimet/errors.hpp"
#include "rabimet/metrics.hpp"
#include "rabimet/quad.hpp"

namespace rabimet {

enum class Scheme { pdm, mm, cm };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::pdm:
      return "pdm";
    case Scheme::mm:
      return "mm";
    case Scheme::cm:
      return "cm";
  }
  return "?";
}

inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kBoundaryThreshold = 1e-14;

struct CfiResult {
  double value = 0.0;
  double estimated_error = 0.0;
};

/// Lower-state survival factor at longitudinal coefficient `lon`, its
/// complement, and the analytic Omega-derivative of the survival factor.
struct SurvivalFactor {
  double stay = 1.0;
  double flip = 0.0;
  double d_stay = 0.0;
};

inline SurvivalFactor survival_factor(double rabi, double lon, double t) {
  const double w = std::hypot(rabi, lon);
  if (w == 0.0) return {};
  const double c = -0.5 * t * w;  // c'
  const double nz = lon / w;
  const double nx = rabi / w;
  const double sc = std::sin(c);
  const double cc = std::cos(c);
  SurvivalFactor out;
  out.stay = cc * cc + nz * nz * sc * sc;
  out.flip = nx * nx * sc * sc;
  const double w2 = w * w;
  out.d_stay = -(2.0 * rabi * lon * lon / (w2 * w2)) * sc * sc -
               (rabi * rabi * rabi * t / (2.0 * w2 * w)) * std::sin(w * t);
  return out;
}

/// Survival factor for initial momentum p under the chosen dynamics.
inline SurvivalFactor branch_survival(const PhysicalParams& params, double p, Variant variant) {
  const double lon = variant == Variant::with_kinetic
                         ? longitudinal(params, shifted_momentum(params, p))
                         : params.detuning;
  return survival_factor(params.rabi, lon, params.time);
}

/// P_a = cos^2 c1 + n_z1^2 sin^2 c1 with c1 = -t omega' / 2, n_z1 = Delta / omega'.
inline double pa_without_kinetic(const PhysicalParams& params) {
  params.validate();
  const double w = omega_prime(params);
  if (w == 0.0) throw DegenerateFrequency("pa_without_kinetic: Omega = Delta = 0");
  const double c1 = -0.5 * params.time * w;
  const double nz1 = params.detuning / w;
  const double s = std::sin(c1);
  const double c = std::cos(c1);
  return c * c + nz1 * nz1 * s * s;
}

/// Closed form of (d P_a / d Omega)^2 / (P_a (1 - P_a)) without the kinetic term:
///   2 (2 Delta^2 w' sin(w't/2) + w'^2 t Omega^2 cos(w't/2))^2
///     / (w'^6 (2 Delta^2 + Omega^2 cos(w't) + Omega^2)).
inline double cfi_pdm_without_kinetic(const PhysicalParams& params) {
  const double pa = pa_without_kinetic(params);
  const double w = omega_prime(params);
  const double t = params.time;
  const double de2 = params.detuning * params.detuning;
  const double om2 = params.rabi * params.rabi;
  const double num = 2.0 * de2 * w * std::sin(0.5 * w * t) + w * w * t * om2 * std::cos(0.5 * w * t);
  const double den = std::pow(w, 6) * (2.0 * de2 + om2 * std::cos(w * t) + om2);
  const double value = 2.0 * num * num / den;
  if (pa * (1.0 - pa) < kBoundaryThreshold) {
    if (params.time == 0.0) return 0.0;
    if (!std::isfinite(value)) {
      throw IndeterminateAtBoundary("cfi_pdm_without_kinetic: P_a pinned at 0 or 1");
    }
  }
  return value;
}

/// PDM information with the kinetic term: P_a and its Omega-derivative as
/// momentum averages of the survival factor.
inline CfiResult cfi_pdm_with_kinetic(const PhysicalParams& params, const GaussianPacket& packet,
                                      double tol = kDefaultTolerance) {
  params.validate();
  if (params.time == 0.0) return {0.0, 0.0};
  auto moments = [&](double p) {
    const auto f = branch_survival(params, p, Variant::with_kinetic);
    return std::array<double, 3>{f.stay, f.flip, f.d_stay};
  };
  const double rate = params.time * std::abs(params.wavevector) / params.mass;
  const auto opts = detail::oscillatory_options(tol, rate, packet, params.hbar);
  const auto res = gaussian_expectation(moments, packet, params, opts);
  const double pa = res.value[0];
  const double pb = res.value[1];
  const double dpa = res.value[2];
  const double den = pa * pb;
  if (den < kBoundaryThreshold) {
    throw IndeterminateAtBoundary("cfi_pdm_with_kinetic: P_a pinned at 0 or 1");
  }
  const double value = dpa * dpa / den;
  // First-order propagation of the quadrature error through the ratio.
  const double err = res.error * (2.0 * std::abs(dpa) / den + value * (1.0 / pa + 1.0 / pb));
  return {value, err};
}

inline CfiResult cfi_pdm(Variant variant, const PhysicalParams& params,
                         const GaussianPacket& packet, double tol = kDefaultTolerance) {
  if (variant == Variant::with_kinetic) return cfi_pdm_with_kinetic(params, packet, tol);
  return {cfi_pdm_without_kinetic(params), 0.0};
}

struct BranchDensity {
  MomentumGrid grid;
  std::vector<double> pa_density;
  std::vector<double> pb_density;
  std::vector<double> d_pa_density;  // d/dOmega of pa_density
  std::vector<double> d_pb_density;

  double total_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      m += grid.weights[i] * (pa_density[i] + pb_density[i]);
    }
    return m;
  }
};

inline BranchDensity branch_density(const PhysicalParams& params, const GaussianPacket& packet,
                                    const MomentumGrid& grid, Variant variant) {
  params.validate();
  const double kick = params.hbar * params.wavevector;
  BranchDensity out;
  out.grid = grid;
  const std::size_t n = grid.size();
  out.pa_density.resize(n);
  out.pb_density.resize(n);
  out.d_pa_density.resize(n);
  out.d_pb_density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = grid.points[i];
    const double wa = packet.density(p, params.hbar);
    const auto fa = branch_survival(params, p, variant);
    out.pa_density[i] = wa * fa.stay;
    out.d_pa_density[i] = wa * fa.d_stay;
    const double origin = p - kick;
    const double wb = packet.density(origin, params.hbar);
    const auto fb = branch_survival(params, origin, variant);
    out.pb_density[i] = wb * fb.flip;
    out.d_pb_density[i] = -wb * fb.d_stay;
  }
  return out;
}

inline BranchDensity branch_density_with_kinetic(const PhysicalParams& params,
                                                 const GaussianPacket& packet,
                                                 const MomentumGrid& grid) {
  return branch_density(params, packet, grid, Variant::with_kinetic);
}

namespace detail {

inline double fisher_term(double density, double derivative) {
  return density < kDensityFloor ? 0.0 : derivative * derivative / density;
}

// Trapezoid sums of `values` on the full grid and on its even-indexed
// subset; their difference is reported as the error estimate.
inline CfiResult grid_integral_with_estimate(const MomentumGrid& grid,
                                             const std::vector<double>& values) {
  const std::size_t n = grid.size();
  double full = 0.0;
  for (std::size_t i = 0; i < n; ++i) full += grid.weights[i] * values[i];
  if (n < 5 || n % 2 == 0) return {full, 0.0};
  double coarse = 0.0;
  for (std::size_t i = 0; i < n; i += 2) {
    const double left = i == 0 ? grid.points[0] : grid.points[i - 2];
    const double right = i + 1 == n ? grid.points[n - 1] : grid.points[i + 2];
    coarse += 0.5 * (right - left) * values[i];
  }
  return {full, std::abs(full - coarse)};
}

}  // namespace detail

inline CfiResult cfi_mm(const BranchDensity& density) {
  const std::size_t n = density.grid.size();
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    integrand[i] = detail::fisher_term(density.pa_density[i] + density.pb_density[i],
                                       density.d_pa_density[i] + density.d_pb_density[i]);
  }
  return detail::grid_integral_with_estimate(density.grid, integrand);
}

inline CfiResult cfi_cm(const BranchDensity& density) {
  const std::size_t n = density.grid.size();
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    integrand[i] = detail::fisher_term(density.pa_density[i], density.d_pa_density[i]) +
                   detail::fisher_term(density.pb_density[i], density.d_pb_density[i]);
  }
  return detail::grid_integral_with_estimate(density.grid, integrand);
}

inline CfiResult cfi_mm(const PhysicalParams& params, const GaussianPacket& packet,
                        const MomentumGrid& grid, Variant variant = Variant::with_kinetic) {
  return cfi_mm(branch_density(params, packet, grid, variant));
}

inline CfiResult cfi_cm(const PhysicalParams& params, const GaussianPacket& packet,
                        const MomentumGrid& grid, Variant variant = Variant::with_kinetic) {
  return cfi_cm(branch_density(params, packet, grid, variant));
}

/// Dispatch over scheme and dynamics; grid-based schemes build the
/// recommended measurement grid when `grid_points` is zero.
inline CfiResult cfi(Scheme scheme, Variant variant, const PhysicalParams& params,
                     const GaussianPacket& packet, double tol = kDefaultTolerance,
                     std::size_t grid_points = 0) {
  if (scheme == Scheme::pdm) return cfi_pdm(variant, params, packet, tol);
  const std::size_t n = grid_points ? grid_points : recommended_grid_points(params, packet);
  const auto grid = build_measurement_grid(params, packet, n);
  return scheme == Scheme::mm ? cfi_mm(params, packet, grid, variant)
                              : cfi_cm(params, packet, grid, variant);
}

}  // namespace rabimet
