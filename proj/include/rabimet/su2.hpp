#pragma once

// Closed-form su(2) algebra: axis-angle exponentials and the generator
// i (d U^dagger / d phi) U of U = exp(-i t r(phi) . sigma / 2), expressed as
// R . sigma. Factors of 1/2 from J = sigma / 2 are absorbed here.

#include <array>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "rabimet/core.hpp"

namespace rabimet {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec3 = std::array<double, 3>;

namespace pauli {
inline Mat2 identity() { return Mat2::Identity(); }
inline Mat2 x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Mat2 y() {
  Mat2 m;
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}
inline Mat2 z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

// Basis ordering: index 0 is the upper level |b> (sigma_z = +1), index 1 is
// the lower level |a> (sigma_z = -1), which is the initial internal state.
inline constexpr int kUpper = 0;
inline constexpr int kLower = 1;

/// exp(i angle n.sigma) with n a unit vector.
struct AxisAngle {
  double angle = 0.0;
  Vec3 axis{0.0, 0.0, 1.0};

  /// Builds the rotation angle * (v / |v|); a zero vector yields the identity.
  static AxisAngle from_vector(double angle, const Vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n == 0.0) return {0.0, {0.0, 0.0, 1.0}};
    return {angle, {v[0] / n, v[1] / n, v[2] / n}};
  }
};

struct RVector {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  double norm2() const { return rx * rx + ry * ry + rz * rz; }
  Mat2 matrix() const { return rx * pauli::x() + ry * pauli::y() + rz * pauli::z(); }
};

inline Mat2 exp_axis_angle(const AxisAngle& rot) {
  const double c = std::cos(rot.angle);
  const double s = std::sin(rot.angle);
  const auto& n = rot.axis;
  Mat2 u;
  u(0, 0) = Complex(c, s * n[2]);
  u(0, 1) = Complex(s * n[1], s * n[0]);
  u(1, 0) = Complex(-s * n[1], s * n[0]);
  u(1, 1) = Complex(c, -s * n[2]);
  return u;
}

namespace detail {

// Kernels of the generator formula as functions of x = |r| t:
//   g = (sin x - x) / x^3,  s = sin x / x,  h = (1 - cos x) / x^2.
struct GeneratorKernels {
  double g;
  double s;
  double h;
};

// Below this x the closed form of g loses more than ~1e-13 to cancellation.
inline constexpr double kKernelSeriesThreshold = 0.1;

inline GeneratorKernels kernels_series(double x) {
  const double x2 = x * x;
  // Horner form of the Taylor series, truncated after the x^10 term.
  const double g =
      -1.0 / 6.0 +
      x2 * (1.0 / 120.0 +
            x2 * (-1.0 / 5040.0 +
                  x2 * (1.0 / 362880.0 + x2 * (-1.0 / 39916800.0 + x2 * (1.0 / 6227020800.0)))));
  const double s =
      1.0 + x2 * (-1.0 / 6.0 +
                  x2 * (1.0 / 120.0 +
                        x2 * (-1.0 / 5040.0 + x2 * (1.0 / 362880.0 + x2 * (-1.0 / 39916800.0)))));
  const double h =
      0.5 + x2 * (-1.0 / 24.0 +
                  x2 * (1.0 / 720.0 +
                        x2 * (-1.0 / 40320.0 + x2 * (1.0 / 3628800.0 + x2 * (-1.0 / 479001600.0)))));
  return {g, s, h};
}

inline GeneratorKernels kernels_closed(double x) {
  const double half = std::sin(0.5 * x);
  return {(std::sin(x) - x) / (x * x * x), std::sin(x) / x, 2.0 * half * half / (x * x)};
}

inline GeneratorKernels kernels(double x) {
  return std::abs(x) < kKernelSeriesThreshold ? kernels_series(x) : kernels_closed(x);
}

}  // namespace detail

/// R with i (d_phi U^dagger) U = R . sigma for U = exp(-i t r . sigma / 2)
/// and v = dr/dphi:
///   R = 1/2 [ (r.v)(sin|r|t - |r|t)/|r|^3 r - sin(|r|t)/|r| v
///             + (1 - cos|r|t)/|r|^2 (r x v) ].
inline RVector generator_rvector(const Vec3& r, const Vec3& v, double t) {
  const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  const auto k = detail::kernels(norm * t);
  const double rv = r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
  const Vec3 cross{r[1] * v[2] - r[2] * v[1], r[2] * v[0] - r[0] * v[2],
                   r[0] * v[1] - r[1] * v[0]};
  const double a = rv * t * t * t * k.g;
  const double b = t * k.s;
  const double c = t * t * k.h;
  return {0.5 * (a * r[0] - b * v[0] + c * cross[0]),
          0.5 * (a * r[1] - b * v[1] + c * cross[1]),
          0.5 * (a * r[2] - b * v[2] + c * cross[2])};
}

/// Generator with the kinetic term at effective-frame momentum q
/// (the caller passes q = p + hbar k0 / 2). r = (Omega, 0, k0 q / m + Delta).
inline RVector rvector_with_kinetic(const PhysicalParams& params, double q) {
  return generator_rvector({params.rabi, 0.0, longitudinal(params, q)}, {1.0, 0.0, 0.0},
                           params.time);
}

/// Generator without the kinetic term. r = (Omega, 0, Delta).
inline RVector rvector_without_kinetic(const PhysicalParams& params) {
  return generator_rvector({params.rabi, 0.0, params.detuning}, {1.0, 0.0, 0.0}, params.time);
}

/// Spin part of exp(-i t H / hbar) for H / hbar = r . sigma / 2.
inline Mat2 spin_evolution(const Vec3& r, double t) {
  const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  return exp_axis_angle(AxisAngle::from_vector(-0.5 * norm * t, r));
}

}  // namespace rabimet
