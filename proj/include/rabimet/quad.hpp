#pragma once

// Integration against the Gaussian momentum density and uniform momentum
// grids for measurement densities.
//
// The default integrator is adaptive bisection with a 7/15-point
// Gauss-Kronrod pair on every panel. Integrands may be real, complex, or a
// fixed-size array of reals (several moments accumulated in one pass). A
// fixed-node Gauss-Hermite rule is kept as an independent cross-check for
// slowly varying integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "rabimet/core.hpp"
#include "rabimet/errors.hpp"

namespace rabimet {

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 20;        // bisection levels below each initial panel
  int initial_panels = 16;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;  // sum over accepted panels of |K15 - G7|
  std::size_t panels = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
template <std::size_t N>
double magnitude(const std::array<double, N>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <class T>
T zero_like() {
  if constexpr (std::is_arithmetic_v<T>) {
    return T(0);
  } else {
    return T{};
  }
}

template <class T>
void accumulate(T& acc, const T& v, double scale) {
  if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>) {
    acc += scale * v;
  } else {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * v[i];
  }
}

template <class T>
T difference(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>) {
    return a - b;
  } else {
    T d = a;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return d;
  }
}

struct Kronrod15 {
  static constexpr std::array<double, 8> x{
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk{
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights at the odd Kronrod abscissae x[1], x[3], x[5], x[7].
  static constexpr std::array<double, 4> wg{
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class T>
struct PanelEstimate {
  T kronrod;
  double error;
};

template <class F, class T = std::invoke_result_t<F&, double>>
PanelEstimate<T> kronrod_panel(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T k = zero_like<T>();
  T g = zero_like<T>();
  const T fc = f(mid);
  accumulate(k, fc, Kronrod15::wk[7]);
  accumulate(g, fc, Kronrod15::wg[3]);
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * Kronrod15::x[i];
    const T f1 = f(mid - dx);
    const T f2 = f(mid + dx);
    accumulate(k, f1, Kronrod15::wk[i]);
    accumulate(k, f2, Kronrod15::wk[i]);
    if (i % 2 == 1) {
      accumulate(g, f1, Kronrod15::wg[i / 2]);
      accumulate(g, f2, Kronrod15::wg[i / 2]);
    }
  }
  T scaled = zero_like<T>();
  accumulate(scaled, k, half);
  T scaled_g = zero_like<T>();
  accumulate(scaled_g, g, half);
  return {scaled, magnitude(difference(scaled, scaled_g))};
}

template <class F, class T>
void refine(F& f, double a, double b, int depth, const QuadOptions& opts, double error_density,
            const PanelEstimate<T>& est, QuadResult<T>& out) {
  if (!std::isfinite(est.error)) {
    throw NonConvergence("adaptive quadrature: non-finite integrand on [" + std::to_string(a) +
                         ", " + std::to_string(b) + "]");
  }
  if (est.error <= error_density * (b - a)) {
    accumulate(out.value, est.kronrod, 1.0);
    out.error += est.error;
    ++out.panels;
    return;
  }
  if (depth >= opts.max_depth) {
    throw NonConvergence("adaptive quadrature exceeded " + std::to_string(opts.max_depth) +
                         " subdivision levels; raise the budget or shorten the evolution time");
  }
  const double mid = 0.5 * (a + b);
  const auto left = kronrod_panel(f, a, mid);
  const auto right = kronrod_panel(f, mid, b);
  refine(f, a, mid, depth + 1, opts, error_density, left, out);
  refine(f, mid, b, depth + 1, opts, error_density, right, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integral of f over [a, b]. The tolerance target is
/// abs_tol + rel_tol * |I|, shared among panels in proportion to width.
/// Panels are visited left to right so the summation order is fixed.
template <class F>
auto integrate_adaptive(F f, double a, double b, const QuadOptions& opts = {})
    -> QuadResult<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  if (!(b > a)) throw std::invalid_argument("integrate_adaptive: require a < b");
  if (opts.initial_panels < 1 || opts.max_depth < 0) {
    throw std::invalid_argument("integrate_adaptive: bad options");
  }
  const int n0 = opts.initial_panels;
  const double width = (b - a) / n0;
  std::vector<detail::PanelEstimate<T>> coarse;
  coarse.reserve(static_cast<std::size_t>(n0));
  T total = detail::zero_like<T>();
  for (int i = 0; i < n0; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == n0) ? b : a + (i + 1) * width;
    coarse.push_back(detail::kronrod_panel(f, lo, hi));
    detail::accumulate(total, coarse.back().kronrod, 1.0);
  }
  const double target = opts.abs_tol + opts.rel_tol * detail::magnitude(total);
  const double error_density = target / (b - a);
  QuadResult<T> out;
  out.value = detail::zero_like<T>();
  for (int i = 0; i < n0; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == n0) ? b : a + (i + 1) * width;
    detail::refine(f, lo, hi, 0, opts, error_density, coarse[static_cast<std::size_t>(i)], out);
  }
  return out;
}

/// Integral of w(p) f(p) over the packet momentum density, truncated to
/// center_p +/- 8 hbar / sigma.
template <class F>
auto gaussian_expectation(F f, const GaussianPacket& packet, const PhysicalParams& params,
                          const QuadOptions& opts)
    -> QuadResult<std::invoke_result_t<F&, double>> {
  using T = std::invoke_result_t<F&, double>;
  const double hbar = params.hbar;
  const double half = packet.half_width(hbar);
  auto weighted = [&](double p) -> T {
    T v = f(p);
    T out = detail::zero_like<T>();
    detail::accumulate(out, v, packet.density(p, hbar));
    return out;
  };
  return integrate_adaptive(weighted, packet.center_p - half, packet.center_p + half, opts);
}

template <class F>
auto gaussian_expectation(F f, const GaussianPacket& packet, const PhysicalParams& params,
                          double tol) -> QuadResult<std::invoke_result_t<F&, double>> {
  if (!(tol > 0.0)) throw std::invalid_argument("gaussian_expectation: tol must be > 0");
  QuadOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = tol;
  return gaussian_expectation(std::move(f), packet, params, opts);
}

/// Gauss-Hermite nodes and weights for the weight exp(-x^2) on the real
/// line, by Newton iteration on the orthonormal Hermite recurrence.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int n) : nodes_(static_cast<std::size_t>(n)), weights_(nodes_.size()) {
    if (n < 1 || n > 300) throw std::invalid_argument("GaussHermiteRule: need 1 <= n <= 300");
    const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      if (i == 0) {
        z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
      } else if (i == 1) {
        z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
      } else if (i == 2) {
        z = 1.86 * z - 0.86 * nodes_[0];
      } else if (i == 3) {
        z = 1.91 * z - 0.91 * nodes_[1];
      } else {
        z = 2.0 * z - nodes_[static_cast<std::size_t>(i - 2)];
      }
      double pp = 0.0;
      bool converged = false;
      for (int it = 0; it < 200; ++it) {
        double p1 = pim4;
        double p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        const double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
          converged = true;
          break;
        }
      }
      if (!converged) throw NonConvergence("GaussHermiteRule: Newton iteration did not converge");
      const auto lo = static_cast<std::size_t>(i);
      const auto hi = static_cast<std::size_t>(n - 1 - i);
      nodes_[lo] = z;
      nodes_[hi] = -z;
      weights_[lo] = weights_[hi] = 2.0 / (pp * pp);
    }
    if (n % 2 == 1) nodes_[static_cast<std::size_t>(m - 1)] = 0.0;
  }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Fixed-node cross-check of gaussian_expectation for slowly varying f.
template <class F>
double gaussian_expectation_hermite(F f, const GaussianPacket& packet, const PhysicalParams& params,
                                    const GaussHermiteRule& rule) {
  const double scale = params.hbar / packet.sigma;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes().size(); ++i) {
    sum += rule.weights()[i] * f(packet.center_p + scale * rule.nodes()[i]);
  }
  return sum / std::sqrt(std::numbers::pi);
}

struct MomentumGrid {
  std::vector<double> points;
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 0.0;

  std::size_t size() const { return points.size(); }

  /// Trapezoidal rule over [lo, hi] with n equally spaced points.
  static MomentumGrid uniform(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || n < 2) throw std::invalid_argument("MomentumGrid: need lo < hi and n >= 2");
    MomentumGrid g;
    g.lo = lo;
    g.hi = hi;
    g.points.resize(n);
    g.weights.resize(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      g.points[i] = (i + 1 == n) ? hi : lo + h * static_cast<double>(i);
      g.weights[i] = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    }
    return g;
  }
};

/// Uniform grid covering both measurement branches: the lower-state packet
/// around center_p and the upper-state packet displaced by one recoil hbar k0.
inline MomentumGrid build_measurement_grid(const PhysicalParams& params,
                                           const GaussianPacket& packet, std::size_t n) {
  if (n < 64) throw std::invalid_argument("build_measurement_grid: n must be >= 64");
  const double kick = params.hbar * params.wavevector;
  const double half = packet.half_width(params.hbar);
  const double lo = packet.center_p + std::min(0.0, kick) - half;
  const double hi = packet.center_p + std::max(0.0, kick) + half;
  return MomentumGrid::uniform(lo, hi, n);
}

inline MomentumGrid build_measurement_grid(const PhysicalParams& params, std::size_t n) {
  return build_measurement_grid(params, GaussianPacket::from(params), n);
}

/// Grid size keeping the spin phase change between neighbouring points below
/// 0.025 rad, floored at 4097 points. Always odd, so the even-indexed
/// subgrid spans the same interval.
inline std::size_t recommended_grid_points(const PhysicalParams& params,
                                           const GaussianPacket& packet) {
  const double kick = std::abs(params.hbar * params.wavevector);
  const double span = kick + 2.0 * packet.half_width(params.hbar);
  const double phase = std::abs(params.wavevector) / params.mass * span * params.time;
  const double n = std::ceil(phase / 0.025) + 1.0;
  auto count = static_cast<std::size_t>(std::clamp(n, 4097.0, 5.0e7));
  return count % 2 == 0 ? count + 1 : count;
}

/// Initial panel count for adaptive integration over the packet window such
/// that an integrand with phase rate `phase_rate` (rad per unit momentum)
/// turns by at most ~2 rad per panel.
inline int oscillation_panels(double phase_rate, const GaussianPacket& packet, double hbar) {
  const double span = 2.0 * packet.half_width(hbar);
  const double turns = std::abs(phase_rate) * span / 2.0;
  return static_cast<int>(std::clamp(std::ceil(turns), 16.0, 1.0e6));
}

}  // namespace rabimet
