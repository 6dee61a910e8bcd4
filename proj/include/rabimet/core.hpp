#pragma once

// Physical parameters of the driven two-level atom with quantized
// center-of-mass momentum, the Gaussian initial wavepacket, and the scalar
// frequencies every other header is built from. All quantities are SI.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rabimet {

inline constexpr double kCodataHbar = 1.0545718e-34;

struct PhysicalParams {
  double hbar = kCodataHbar;  // J s
  double mass = 1.44e-25;     // kg
  double rabi = 1.0e3;        // Omega, rad/s
  double detuning = 1.0e3;    // Delta, rad/s
  double wavevector = 1.0e6;  // k0, 1/m
  double time = 1.0;          // s
  double sigma = 4.0e-5;      // position width of the packet, m

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("invalid parameters: ") + what);
    };
    require(std::isfinite(hbar) && hbar > 0.0, "hbar must be > 0");
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
    require(std::isfinite(time) && time >= 0.0, "time must be >= 0");
    require(std::isfinite(rabi) && rabi >= 0.0, "rabi must be >= 0");
    require(std::isfinite(detuning), "detuning must be finite");
    require(std::isfinite(wavevector), "wavevector must be finite");
  }

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

/// Gaussian motional state. The momentum density is
///   w(p) = sigma / (hbar sqrt(pi)) * exp(-(p - center_p)^2 sigma^2 / hbar^2),
/// normalized to one over the real line.
struct GaussianPacket {
  double sigma = 4.0e-5;   // m
  double center_p = 0.0;   // kg m/s

  static GaussianPacket from(const PhysicalParams& params) { return {params.sigma, 0.0}; }

  /// Standard deviation of the momentum density, hbar / (sigma sqrt 2).
  double momentum_std(double hbar) const { return hbar / (sigma * std::numbers::sqrt2); }

  /// Half-width of the truncated momentum support: 8 hbar / sigma.
  double half_width(double hbar) const { return 8.0 * hbar / sigma; }

  double density(double p, double hbar) const {
    const double x = (p - center_p) * sigma / hbar;
    return sigma / (hbar * std::sqrt(std::numbers::pi)) * std::exp(-x * x);
  }

  /// Position amplitude exp(-z^2 / 2 sigma^2) / (pi sigma^2)^(1/4); center_p
  /// only contributes a plane-wave phase, which this real-valued helper omits.
  double position_amplitude(double z) const {
    return std::exp(-z * z / (2.0 * sigma * sigma)) /
           std::pow(std::numbers::pi * sigma * sigma, 0.25);
  }
};

/// sqrt(Delta^2 + Omega^2): precession rate without the kinetic term.
inline double omega_prime(const PhysicalParams& params) {
  return std::hypot(params.detuning, params.rabi);
}

/// hbar k0^2 / 2m.
inline double recoil_shift(const PhysicalParams& params) {
  return params.hbar * params.wavevector * params.wavevector / (2.0 * params.mass);
}

/// Longitudinal (sigma_z) coefficient k0 q / m + Delta at the shifted
/// momentum q seen by the effective Hamiltonian.
inline double longitudinal(const PhysicalParams& params, double q) {
  return params.wavevector * q / params.mass + params.detuning;
}

/// Momentum seen by the effective Hamiltonian for an atom that started in
/// the lower state with momentum p: q = p + hbar k0 / 2.
inline double shifted_momentum(const PhysicalParams& params, double p) {
  return p + 0.5 * params.hbar * params.wavevector;
}

/// Generalized Rabi frequency at initial momentum p:
///   sqrt((Delta + k0 (hbar k0 / 2 + p) / m)^2 + Omega^2).
inline double omega_p(const PhysicalParams& params, double p) {
  return std::hypot(longitudinal(params, shifted_momentum(params, p)), params.rabi);
}

}  // namespace rabimet
