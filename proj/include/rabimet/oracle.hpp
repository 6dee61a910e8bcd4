#pragma once

// Brute-force recomputation of the headline quantities. Everything here is
// built from the effective Hamiltonians as dense 2x2 matrices: propagators
// come from fixed-step RK4 or a general-purpose Pade matrix exponential,
// derivatives in Omega from central differences, and momentum integrals from
// a composite Gauss-Legendre rule private to this header. None of the closed
// forms in su2/metrics/cfi are used.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rabimet/core.hpp"
#include "rabimet/errors.hpp"
#include "rabimet/metrics.hpp"  // Variant
#include "rabimet/cfi.hpp"      // Scheme

namespace rabimet::oracle {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

// Row/column 0 is the upper level |b>, 1 the lower level |a>.
inline constexpr int kB = 0;
inline constexpr int kA = 1;

enum class Method { rk4, closed_form };

struct PropagationResult {
  std::vector<Mat2> unitary;  // one per momentum sample
  std::size_t steps = 0;
  Method method = Method::closed_form;
};

/// H_e1 / hbar at effective-frame momentum q, in rad/s:
///   q^2/(2 m hbar) + hbar k0^2/(8m) + Delta/2 + (k0 q/(2m) + Delta/2) sz + (Omega/2) sx.
inline Mat2 hamiltonian_kinetic(const PhysicalParams& prm, double q) {
  const double scalar = q * q / (2.0 * prm.mass * prm.hbar) +
                        prm.hbar * prm.wavevector * prm.wavevector / (8.0 * prm.mass) +
                        0.5 * prm.detuning;
  const double z = prm.wavevector * q / (2.0 * prm.mass) + 0.5 * prm.detuning;
  const double x = 0.5 * prm.rabi;
  Mat2 h;
  h << scalar + z, x, x, scalar - z;
  return h;
}

/// H_e2 / hbar: Delta/2 + (Delta/2) sz + (Omega/2) sx.
inline Mat2 hamiltonian_static(const PhysicalParams& prm) {
  const double half = 0.5 * prm.detuning;
  const double x = 0.5 * prm.rabi;
  Mat2 h;
  h << 2.0 * half, x, x, 0.0;
  return h;
}

inline Mat2 hamiltonian(const PhysicalParams& prm, double q, Variant variant) {
  return variant == Variant::with_kinetic ? hamiltonian_kinetic(prm, q) : hamiltonian_static(prm);
}

/// One classical RK4 step of dU/dt = -i H U with step h, applied to U.
inline Mat2 rk4_step(const Mat2& h_over_hbar, const Mat2& u, double h) {
  const Complex mi(0.0, -1.0);
  const Mat2 k1 = mi * h_over_hbar * u;
  const Mat2 k2 = mi * h_over_hbar * (u + 0.5 * h * k1);
  const Mat2 k3 = mi * h_over_hbar * (u + 0.5 * h * k2);
  const Mat2 k4 = mi * h_over_hbar * (u + h * k3);
  return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// RK4 propagator over [0, t] in `steps` equal steps, looping step by step.
inline Mat2 evolve_rk4_stepped(const Mat2& h_over_hbar, double t, std::size_t steps) {
  Mat2 u = Mat2::Identity();
  const double h = t / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) u = rk4_step(h_over_hbar, u, h);
  return u;
}

/// Same propagator as evolve_rk4_stepped. H is time independent, so the
/// one-step map M = rk4_step(H, I, h) is fixed and U = M^steps is formed by
/// binary powering.
inline Mat2 evolve_rk4(const Mat2& h_over_hbar, double t, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("evolve_rk4: steps must be > 0");
  Mat2 step = rk4_step(h_over_hbar, Mat2::Identity(), t / static_cast<double>(steps));
  Mat2 u = Mat2::Identity();
  for (std::size_t n = steps; n > 0; n >>= 1) {
    if (n & 1U) u = step * u;
    step = step * step;
  }
  return u;
}

/// General-purpose matrix exponential exp(-i t H).
inline Mat2 evolve_exact(const Mat2& h_over_hbar, double t) {
  const Mat2 a = Complex(0.0, -t) * h_over_hbar;
  return a.exp();
}

/// RK4 propagator of H_e1 at momentum q, scalar phase included.
inline Mat2 evolve_numeric(const PhysicalParams& prm, double q, std::size_t steps) {
  if (steps < 100) throw std::invalid_argument("evolve_numeric: steps must be >= 100");
  if (prm.time == 0.0) return Mat2::Identity();
  return evolve_rk4(hamiltonian_kinetic(prm, q), prm.time, steps);
}

inline PropagationResult propagate(const PhysicalParams& prm, const std::vector<double>& qs,
                                   Variant variant, Method method, std::size_t steps = 0) {
  PropagationResult out;
  out.method = method;
  out.steps = steps;
  out.unitary.reserve(qs.size());
  for (double q : qs) {
    const Mat2 h = hamiltonian(prm, q, variant);
    out.unitary.push_back(method == Method::rk4 ? evolve_rk4(h, prm.time, steps)
                                                : evolve_exact(h, prm.time));
  }
  return out;
}

/// Largest eigenvalue magnitude of the Hamiltonian (rad/s) over a momentum window.
inline double max_frequency(const PhysicalParams& prm, double q_lo, double q_hi) {
  double best = 0.0;
  for (double q : {q_lo, q_hi, 0.0}) {
    if (q < q_lo || q > q_hi) continue;
    const Mat2 h = hamiltonian_kinetic(prm, q);
    const double mean = 0.5 * (h(0, 0) + h(1, 1)).real();
    const double split = std::hypot(0.5 * (h(0, 0) - h(1, 1)).real(), h(0, 1).real());
    best = std::max(best, std::abs(mean) + split);
  }
  return best;
}

/// RK4 step count whose predicted global error, t f (f h)^4 / 120, stays
/// below `target` for a peak frequency f.
inline std::size_t rk4_steps_for(double frequency, double t, double target) {
  const double x = std::pow(120.0 * target / std::max(frequency * t, 1e-300), 0.25);
  const double steps = std::ceil(frequency * t / std::max(x, 1e-300));
  return static_cast<std::size_t>(std::clamp(steps, 1000.0, 1e15));
}

// ---------------------------------------------------------------------------
// Quadrature private to the oracle.

struct Rule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Legendre nodes on [-1, 1] by Newton iteration.
inline Rule gauss_legendre(int n) {
  Rule r;
  r.points.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.points[lo] = -z;
    r.points[hi] = z;
    r.weights[lo] = r.weights[hi] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

/// Composite Gauss-Legendre over [lo, hi] with enough panels that a phase
/// rate of `phase_rate` rad per unit momentum turns <= 1 rad per panel.
inline void append_window(Rule& out, double lo, double hi, double phase_rate) {
  static const Rule base = gauss_legendre(12);
  const double width = hi - lo;
  const auto panels =
      static_cast<std::size_t>(std::clamp(std::ceil(std::abs(phase_rate) * width), 64.0, 1.0e6));
  const double h = width / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = lo + (static_cast<double>(k) + 0.5) * h;
    for (std::size_t j = 0; j < base.points.size(); ++j) {
      out.points.push_back(mid + 0.5 * h * base.points[j]);
      out.weights.push_back(0.5 * h * base.weights[j]);
    }
  }
}

inline double phase_rate_bound(const PhysicalParams& prm, double q_max) {
  return prm.time * (std::abs(prm.wavevector) / prm.mass + q_max / (prm.mass * prm.hbar));
}

/// Nodes over the packet support center_p +/- 8 hbar / sigma.
inline Rule packet_rule(const PhysicalParams& prm, const GaussianPacket& packet) {
  const double half = 8.0 * prm.hbar / packet.sigma;
  const double lo = packet.center_p - half;
  const double hi = packet.center_p + half;
  const double kick = 0.5 * prm.hbar * prm.wavevector;
  const double q_max = std::max(std::abs(lo + kick), std::abs(hi + kick));
  Rule r;
  append_window(r, lo, hi, phase_rate_bound(prm, q_max));
  return r;
}

/// Nodes over the observed-momentum support of both branches: the packet
/// window and the window displaced by hbar k0 (merged when they overlap).
inline Rule measurement_rule(const PhysicalParams& prm, const GaussianPacket& packet) {
  const double half = 8.0 * prm.hbar / packet.sigma;
  const double kick = prm.hbar * prm.wavevector;
  const double a_lo = packet.center_p - half, a_hi = packet.center_p + half;
  const double b_lo = a_lo + kick, b_hi = a_hi + kick;
  const double q_max = std::max({std::abs(a_lo), std::abs(a_hi), std::abs(b_lo), std::abs(b_hi)}) +
                       std::abs(kick);
  const double rate = phase_rate_bound(prm, q_max);
  Rule r;
  if (std::abs(kick) < 2.0 * half) {
    append_window(r, std::min(a_lo, b_lo), std::max(a_hi, b_hi), rate);
  } else {
    append_window(r, std::min(a_lo, b_lo), std::min(a_hi, b_hi), rate);
    append_window(r, std::max(a_lo, b_lo), std::max(a_hi, b_hi), rate);
  }
  return r;
}

inline double packet_weight(const GaussianPacket& packet, double p, double hbar) {
  const double x = (p - packet.center_p) * packet.sigma / hbar;
  return packet.sigma / (hbar * std::sqrt(std::numbers::pi)) * std::exp(-x * x);
}

// ---------------------------------------------------------------------------
// Finite-difference machinery.

struct OracleOptions {
  Method method = Method::closed_form;
  std::size_t rk4_steps = 0;  // 0 selects rk4_steps_for(..., 1e-12)
  double tol = 1e-6;          // relative Richardson gate between delta and delta/2
  double abs_floor = 1e-14;   // s^2; lets results that are zero up to rounding through the gate
};

namespace detail {

inline void check_delta(const PhysicalParams& prm, double delta) {
  if (!(prm.rabi > 0.0)) throw std::invalid_argument("finite differences need Omega > 0");
  if (!(delta >= 1e-8 * prm.rabi * (1.0 - 1e-12) && delta <= 1e-3 * prm.rabi * (1.0 + 1e-12))) {
    throw std::invalid_argument("delta_omega must lie in [1e-8, 1e-3] * Omega");
  }
}

inline PhysicalParams with_rabi(PhysicalParams prm, double rabi) {
  prm.rabi = rabi;
  return prm;
}

inline Mat2 propagator(const PhysicalParams& prm, double q, Variant variant,
                       const OracleOptions& opts) {
  const Mat2 h = hamiltonian(prm, q, variant);
  if (prm.time == 0.0) return Mat2::Identity();
  if (opts.method == Method::closed_form) return evolve_exact(h, prm.time);
  std::size_t steps = opts.rk4_steps;
  if (steps == 0) {
    const Eigen::SelfAdjointEigenSolver<Mat2> es(h);
    const double f = es.eigenvalues().cwiseAbs().maxCoeff();
    steps = rk4_steps_for(f, prm.time, 1e-12);
  }
  return evolve_rk4(h, prm.time, steps);
}

inline double richardson(double coarse, double fine, const OracleOptions& opts, const char* what) {
  const double scale = std::max(std::abs(fine), 1e-300);
  if (std::abs(coarse - fine) > opts.tol * scale + opts.abs_floor) {
    throw StepTooCoarse(std::string(what) + ": central differences at delta and delta/2 differ by " +
                        std::to_string(std::abs(coarse - fine) / scale) + " relative");
  }
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace detail

/// Pure-state QFI 4 (<d psi|d psi> - |<psi|d psi>|^2) of the full
/// spinor-packet state, with |d psi> from central differences in Omega.
inline double qfi_fd(const PhysicalParams& prm, const GaussianPacket& packet, Variant variant,
                     double delta_omega, const OracleOptions& opts = {}) {
  prm.validate();
  detail::check_delta(prm, delta_omega);
  const Rule rule = packet_rule(prm, packet);
  const double kick = 0.5 * prm.hbar * prm.wavevector;
  auto state = [&](double rabi, double p) -> Eigen::Vector2cd {
    return detail::propagator(detail::with_rabi(prm, rabi), p + kick, variant, opts).col(kA);
  };
  double sq[2] = {0.0, 0.0};
  Complex overlap[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double p = rule.points[i];
    const double w = rule.weights[i] * packet_weight(packet, p, prm.hbar);
    if (w == 0.0) continue;
    const Eigen::Vector2cd psi = state(prm.rabi, p);
    for (int level = 0; level < 2; ++level) {
      const double d = level == 0 ? delta_omega : 0.5 * delta_omega;
      const Eigen::Vector2cd dpsi = (state(prm.rabi + d, p) - state(prm.rabi - d, p)) / (2.0 * d);
      sq[level] += w * dpsi.squaredNorm();
      overlap[level] += w * psi.dot(dpsi);
    }
  }
  const double coarse = 4.0 * (sq[0] - std::norm(overlap[0]));
  const double fine = 4.0 * (sq[1] - std::norm(overlap[1]));
  return detail::richardson(coarse, fine, opts, "qfi_fd");
}

/// Outcome distributions from the dense propagators, on the oracle's own
/// measurement nodes.
struct BranchSample {
  Rule rule;
  std::vector<double> pa;         // lower state observed at p
  std::vector<double> pb;         // upper state observed at p
  std::vector<double> pb_origin;  // upper state, for atoms that started at p
};

inline BranchSample branch_sample(const PhysicalParams& prm, const GaussianPacket& packet,
                                  Variant variant, const Rule& rule, const OracleOptions& opts) {
  BranchSample s;
  s.rule = rule;
  const double half_kick = 0.5 * prm.hbar * prm.wavevector;
  const double kick = prm.hbar * prm.wavevector;
  s.pa.resize(rule.points.size());
  s.pb.resize(rule.points.size());
  s.pb_origin.resize(rule.points.size());
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double p = rule.points[i];
    // Lower state seen at p started at p; upper state seen at p started at p - hbar k0.
    const double wa = packet_weight(packet, p, prm.hbar);
    const double wb = packet_weight(packet, p - kick, prm.hbar);
    const Mat2 ua = detail::propagator(prm, p + half_kick, variant, opts);
    const Mat2 ub = detail::propagator(prm, p - kick + half_kick, variant, opts);
    s.pa[i] = wa * std::norm(ua(kA, kA));
    s.pb[i] = wb * std::norm(ub(kB, kA));
    s.pb_origin[i] = wa * std::norm(ua(kB, kA));
  }
  return s;
}

inline double fisher_from_samples(Scheme scheme, const BranchSample& lo, const BranchSample& hi,
                                  const BranchSample& mid, double d) {
  const auto& w = mid.rule.weights;
  if (scheme == Scheme::pdm) {
    double pa = 0.0, pb = 0.0, pa_lo = 0.0, pa_hi = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      pa += w[i] * mid.pa[i];
      pb += w[i] * mid.pb_origin[i];
      pa_lo += w[i] * lo.pa[i];
      pa_hi += w[i] * hi.pa[i];
    }
    const double dpa = (pa_hi - pa_lo) / (2.0 * d);
    return dpa * dpa / (pa * pb);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto term = [&](double p, double dp) { return p < 1e-300 ? 0.0 : dp * dp / p; };
    if (scheme == Scheme::mm) {
      const double p = mid.pa[i] + mid.pb[i];
      const double dp = (hi.pa[i] + hi.pb[i] - lo.pa[i] - lo.pb[i]) / (2.0 * d);
      total += w[i] * term(p, dp);
    } else {
      total += w[i] * (term(mid.pa[i], (hi.pa[i] - lo.pa[i]) / (2.0 * d)) +
                       term(mid.pb[i], (hi.pb[i] - lo.pb[i]) / (2.0 * d)));
    }
  }
  return total;
}

/// Classical Fisher information of the chosen measurement by central
/// differences of independently computed outcome probabilities.
inline double cfi_fd(const PhysicalParams& prm, const GaussianPacket& packet, Scheme scheme,
                     Variant variant, double delta_omega, const OracleOptions& opts = {}) {
  prm.validate();
  detail::check_delta(prm, delta_omega);
  const Rule rule = scheme == Scheme::pdm ? packet_rule(prm, packet) : measurement_rule(prm, packet);
  auto sample = [&](double rabi) {
    return branch_sample(detail::with_rabi(prm, rabi), packet, variant, rule, opts);
  };
  const BranchSample mid = sample(prm.rabi);
  double est[2];
  for (int level = 0; level < 2; ++level) {
    const double d = level == 0 ? delta_omega : 0.5 * delta_omega;
    est[level] = fisher_from_samples(scheme, sample(prm.rabi - d), sample(prm.rabi + d), mid, d);
  }
  return detail::richardson(est[0], est[1], opts, "cfi_fd");
}

/// |<psi_in| U1^dagger U2 |psi_in>|^2 with U1 from RK4 on H_e1 per momentum
/// sample and U2 the dense exponential of H_e2.
inline double fidelity_numeric(const PhysicalParams& prm, const GaussianPacket& packet,
                               std::size_t steps) {
  prm.validate();
  if (steps < 1000) throw std::invalid_argument("fidelity_numeric: steps must be >= 1000");
  if (prm.time == 0.0) return 1.0;
  const Rule rule = packet_rule(prm, packet);
  const double kick = 0.5 * prm.hbar * prm.wavevector;
  const Mat2 u2 = evolve_exact(hamiltonian_static(prm), prm.time);
  Complex amp = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    const double p = rule.points[i];
    const double w = rule.weights[i] * packet_weight(packet, p, prm.hbar);
    if (w == 0.0) continue;
    const Mat2 u1 = evolve_numeric(prm, p + kick, steps);
    amp += w * (u1.adjoint() * u2)(kA, kA);
  }
  return std::norm(amp);
}

/// Step count for fidelity_numeric giving ~1e-10 propagator error everywhere
/// on the packet window.
inline std::size_t fidelity_steps(const PhysicalParams& prm, const GaussianPacket& packet) {
  const double half = 8.0 * prm.hbar / packet.sigma;
  const double kick = 0.5 * prm.hbar * prm.wavevector;
  const double f = max_frequency(prm, packet.center_p - half + kick, packet.center_p + half + kick);
  return rk4_steps_for(f, prm.time, 1e-10);
}

/// Observed RK4 order log2(e(N) / e(2N)) against the dense exponential.
inline double rk4_convergence_order(const PhysicalParams& prm, double q, std::size_t steps) {
  const Mat2 h = hamiltonian_kinetic(prm, q);
  const Mat2 exact = evolve_exact(h, prm.time);
  const double e1 = (evolve_rk4(h, prm.time, steps) - exact).cwiseAbs().maxCoeff();
  const double e2 = (evolve_rk4(h, prm.time, 2 * steps) - exact).cwiseAbs().maxCoeff();
  return std::log2(e1 / e2);
}

// ---------------------------------------------------------------------------
// Seeded parameter draws.

struct DrawRanges {
  double detuning_lo = -2000.0, detuning_hi = 2000.0;
  double wavevector_lo = 0.0, wavevector_hi = 4.0e6;
  double time_lo = 0.05, time_hi = 1.0;
  double rabi_lo = 200.0, rabi_hi = 2000.0;
};

inline std::vector<PhysicalParams> random_draws(std::uint64_t seed, std::size_t count,
                                                const PhysicalParams& base = {},
                                                const DrawRanges& ranges = {}) {
  std::mt19937_64 rng(seed);
  // Map raw 64-bit output to [0, 1) by hand so draws do not depend on the
  // standard library's distribution implementation.
  auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(); };
  std::vector<PhysicalParams> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PhysicalParams p = base;
    p.detuning = between(ranges.detuning_lo, ranges.detuning_hi);
    p.wavevector = between(ranges.wavevector_lo, ranges.wavevector_hi);
    p.time = between(ranges.time_lo, ranges.time_hi);
    p.rabi = between(ranges.rabi_lo, ranges.rabi_hi);
    out.push_back(p);
  }
  return out;
}

}  // namespace rabimet::oracle
