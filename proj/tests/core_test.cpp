#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "rabimet/core.hpp"
#include "rabimet/quad.hpp"

using namespace rabimet;

namespace {

PhysicalParams preset_params() {
  PhysicalParams p;
  p.hbar = 1e-34;
  return p;
}

}  // namespace

TEST(Params, DefaultsMatchTable) {
  PhysicalParams p;
  EXPECT_EQ(p.hbar, 1.0545718e-34);
  EXPECT_EQ(p.mass, 1.44e-25);
  EXPECT_EQ(p.rabi, 1e3);
  EXPECT_EQ(p.detuning, 1e3);
  EXPECT_EQ(p.wavevector, 1e6);
  EXPECT_EQ(p.time, 1.0);
  EXPECT_EQ(p.sigma, 4e-5);
  EXPECT_NO_THROW(p.validate());
}

TEST(Params, ValidateRejectsBadFields) {
  auto bad = [](auto mutate) {
    PhysicalParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), std::invalid_argument);
  };
  bad([](PhysicalParams& p) { p.hbar = 0.0; });
  bad([](PhysicalParams& p) { p.mass = -1.0; });
  bad([](PhysicalParams& p) { p.sigma = 0.0; });
  bad([](PhysicalParams& p) { p.time = -1e-3; });
  bad([](PhysicalParams& p) { p.rabi = -1.0; });
  bad([](PhysicalParams& p) { p.detuning = NAN; });
  bad([](PhysicalParams& p) { p.wavevector = INFINITY; });

  PhysicalParams ok;
  ok.wavevector = -3e6;
  ok.rabi = 0.0;
  ok.time = 0.0;
  EXPECT_NO_THROW(ok.validate());
}

TEST(OmegaPrime, Examples) {
  PhysicalParams p;
  p.detuning = 0.0;
  p.rabi = 1000.0;
  EXPECT_DOUBLE_EQ(omega_prime(p), 1000.0);
  p.detuning = 3.0;
  p.rabi = 4.0;
  EXPECT_DOUBLE_EQ(omega_prime(p), 5.0);
  p.detuning = 1000.0;
  p.rabi = 1000.0;
  EXPECT_NEAR(omega_prime(p), 1414.2135623730951, 1e-10);
}

TEST(OmegaP, Examples) {
  PhysicalParams p = preset_params();
  p.wavevector = 0.0;
  for (double mom : {-1e-28, 0.0, 3e-29}) EXPECT_DOUBLE_EQ(omega_p(p, mom), omega_prime(p));

  p.wavevector = 1e6;
  const double pin = -0.5 * p.hbar * p.wavevector - p.mass * p.detuning / p.wavevector;
  EXPECT_NEAR(omega_p(p, pin), p.rabi, 1e-9 * p.rabi);

  const double shift = 1e-34 * 1e12 / (2.0 * 1.44e-25);
  EXPECT_NEAR(omega_p(p, 0.0), std::hypot(1000.0 + shift, 1000.0), 1e-9);
  EXPECT_NEAR(omega_p(p, 0.0), 1677.798473014379, 1e-9);
}

TEST(RecoilShift, Examples) {
  PhysicalParams p = preset_params();
  EXPECT_NEAR(recoil_shift(p), 347.22222222222223, 1e-9);
  const double base = recoil_shift(p);
  p.wavevector *= 2.0;
  EXPECT_NEAR(recoil_shift(p), 4.0 * base, 1e-9);
  p.wavevector = 0.0;
  EXPECT_EQ(recoil_shift(p), 0.0);
}

TEST(Properties, OmegaPBoundedBelowByRabi) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    PhysicalParams p;
    p.rabi = 2000.0 * (1.0 + u(rng)) / 2.0;
    p.detuning = 2000.0 * u(rng);
    p.wavevector = 4e6 * u(rng);
    const double mom = 1e-28 * u(rng);
    ASSERT_GE(omega_p(p, mom), p.rabi);
  }
}

TEST(Properties, OmegaPReflection) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    PhysicalParams p;
    p.detuning = 2000.0 * u(rng);
    p.wavevector = 4e6 * u(rng);
    const double mom = 5e-29 * u(rng);
    PhysicalParams r = p;
    r.detuning = -p.detuning - 2.0 * recoil_shift(p);
    ASSERT_NEAR(omega_p(r, -mom), omega_p(p, mom), 1e-9 * omega_p(p, mom));
  }
}

TEST(Packet, DensityNormalized) {
  for (double hbar : {1e-34, kCodataHbar}) {
    PhysicalParams p;
    p.hbar = hbar;
    const auto packet = GaussianPacket::from(p);
    const auto r = gaussian_expectation([](double) { return 1.0; }, packet, p, 1e-13);
    EXPECT_NEAR(r.value, 1.0, 1e-10);
  }
}

TEST(Packet, PositionAmplitudeNormalized) {
  GaussianPacket g{4e-5, 0.0};
  EXPECT_NEAR(g.position_amplitude(0.0), 1.0 / std::pow(M_PI * 16e-10, 0.25), 1e-6);
  double sum = 0.0;
  const double h = g.sigma / 200.0;
  for (int i = -4000; i <= 4000; ++i) {
    const double a = g.position_amplitude(i * h);
    sum += a * a * h;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Packet, MomentumScales) {
  GaussianPacket g{4e-5, 0.0};
  EXPECT_NEAR(g.momentum_std(1e-34), 1e-34 / (4e-5 * std::sqrt(2.0)), 1e-45);
  EXPECT_DOUBLE_EQ(g.half_width(1e-34), 8.0 * 1e-34 / 4e-5);
}
