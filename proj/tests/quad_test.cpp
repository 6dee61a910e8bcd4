#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "rabimet/errors.hpp"
#include "rabimet/quad.hpp"

using namespace rabimet;

namespace {

PhysicalParams preset_params() {
  PhysicalParams p;
  p.hbar = 1e-34;
  return p;
}

}  // namespace

TEST(GaussianExpectation, Moments) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  const double s2 = prm.hbar * prm.hbar / (2.0 * prm.sigma * prm.sigma);
  EXPECT_NEAR(gaussian_expectation([](double) { return 1.0; }, packet, prm, 1e-12).value, 1.0, 1e-12);
  EXPECT_NEAR(gaussian_expectation([](double p) { return p; }, packet, prm, 1e-12).value, 0.0,
              1e-12 * std::sqrt(s2));
  EXPECT_NEAR(gaussian_expectation([](double p) { return p * p; }, packet, prm, 1e-12).value / s2,
              1.0, 1e-11);
}

TEST(GaussianExpectation, ShiftedCenter) {
  auto prm = preset_params();
  GaussianPacket packet{prm.sigma, 3e-29};
  const auto r = gaussian_expectation([](double p) { return p; }, packet, prm, 1e-12);
  EXPECT_NEAR(r.value / 3e-29, 1.0, 1e-11);
}

TEST(GaussianExpectation, ComplexAndArrayValued) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  const double a = 5.0 * prm.sigma / prm.hbar;  // phase rate per unit momentum
  const auto c = gaussian_expectation([a](double p) { return std::polar(1.0, a * p); }, packet,
                                      prm, 1e-12);
  // Characteristic function of the density: exp(-a^2 hbar^2 / (4 sigma^2)).
  const double ref = std::exp(-a * a * prm.hbar * prm.hbar / (4.0 * prm.sigma * prm.sigma));
  EXPECT_NEAR(c.value.real(), ref, 1e-11);
  EXPECT_NEAR(c.value.imag(), 0.0, 1e-11);

  const auto v = gaussian_expectation(
      [](double) { return std::array<double, 2>{1.0, 2.0}; }, packet, prm, 1e-12);
  EXPECT_NEAR(v.value[0], 1.0, 1e-12);
  EXPECT_NEAR(v.value[1], 2.0, 1e-12);
}

TEST(GaussianExpectation, HermiteCrossCheck) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  const GaussHermiteRule rule(60);
  auto f = [&](double p) { return std::cos(2.0 * p * prm.sigma / prm.hbar) + p * p / 1e-60; };
  const double adaptive = gaussian_expectation(f, packet, prm, 1e-13).value;
  const double fixed = gaussian_expectation_hermite(f, packet, prm, rule);
  EXPECT_NEAR(adaptive, fixed, 1e-11 * std::abs(fixed));
}

TEST(GaussianExpectation, BudgetExhaustionThrows) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  QuadOptions opts;
  opts.max_depth = 2;
  opts.initial_panels = 1;
  const double rate = 1e4 * prm.sigma / prm.hbar;
  EXPECT_THROW(gaussian_expectation([rate](double p) { return std::cos(rate * p); }, packet, prm, opts),
               NonConvergence);
  EXPECT_THROW(gaussian_expectation([](double) { return std::nan(""); }, packet, prm, 1e-10), NonConvergence);
  EXPECT_THROW(gaussian_expectation([](double) { return 1.0; }, packet, prm, 0.0),
               std::invalid_argument);
}

TEST(Properties, DoublingBudgetIsStable) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  const double rate = 20.0 * prm.sigma / prm.hbar;
  auto f = [rate](double p) { return 1.0 + std::sin(rate * p) * std::sin(rate * p); };
  QuadOptions base;
  base.abs_tol = base.rel_tol = 1e-10;
  QuadOptions doubled = base;
  doubled.max_depth *= 2;
  doubled.abs_tol = doubled.rel_tol = 0.5e-10;
  doubled.initial_panels *= 2;
  const double a = gaussian_expectation(f, packet, prm, base).value;
  const double b = gaussian_expectation(f, packet, prm, doubled).value;
  EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-8);
}

TEST(Properties, TruncationSufficient) {
  const auto prm = preset_params();
  const auto packet = GaussianPacket::from(prm);
  auto f = [&](double p) { return 1.0 + p * p * prm.sigma * prm.sigma / (prm.hbar * prm.hbar); };
  const double narrow = gaussian_expectation(f, packet, prm, 1e-13).value;
  const double wide_half = 10.0 * prm.hbar / prm.sigma;
  QuadOptions opts;
  opts.abs_tol = opts.rel_tol = 1e-13;
  const double wide =
      integrate_adaptive([&](double p) { return packet.density(p, prm.hbar) * f(p); }, -wide_half,
                         wide_half, opts)
          .value;
  EXPECT_LT(std::abs(narrow - wide) / wide, 1e-10);
}

TEST(GaussHermite, RuleExactForPolynomials) {
  const GaussHermiteRule rule(20);
  double w = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < rule.nodes().size(); ++i) {
    const double x = rule.nodes()[i];
    w += rule.weights()[i];
    m2 += rule.weights()[i] * x * x;
    m4 += rule.weights()[i] * x * x * x * x;
  }
  const double sp = std::sqrt(std::numbers::pi);
  EXPECT_NEAR(w, sp, 1e-13);
  EXPECT_NEAR(m2, sp / 2.0, 1e-13);
  EXPECT_NEAR(m4, 3.0 * sp / 4.0, 1e-13);
  EXPECT_THROW(GaussHermiteRule(0), std::invalid_argument);
}

TEST(MeasurementGrid, Examples) {
  auto prm = preset_params();
  prm.wavevector = 0.0;
  const auto packet = GaussianPacket::from(prm);
  const auto g = build_measurement_grid(prm, packet, 64);
  EXPECT_EQ(g.size(), 64u);
  EXPECT_NEAR(g.lo, -g.hi, 1e-45);
  EXPECT_NEAR(g.hi - g.lo, 16.0 * prm.hbar / prm.sigma, 1e-44);

  PhysicalParams d;  // CODATA hbar
  const auto gd = build_measurement_grid(d, 4096);
  const double hs = d.hbar / d.sigma;
  EXPECT_NEAR(gd.lo, -8.0 * hs, 1e-44);
  EXPECT_NEAR(gd.hi, d.hbar * d.wavevector + 8.0 * hs, 1e-43);
  EXPECT_NEAR(gd.lo, -2.1e-29, 0.1e-29);
  EXPECT_NEAR(gd.hi, 1.0545718e-28 + 2.1e-29, 0.1e-29);

  EXPECT_THROW(build_measurement_grid(d, 63), std::invalid_argument);
}

TEST(MeasurementGrid, Invariants) {
  for (double k0 : {0.0, 1e6, -2e6, 4e6}) {
    PhysicalParams prm;
    prm.wavevector = k0;
    const auto packet = GaussianPacket::from(prm);
    const auto g = build_measurement_grid(prm, packet, recommended_grid_points(prm, packet));
    EXPECT_EQ(g.size() % 2, 1u);
    EXPECT_LT(g.lo, g.hi);
    double mass = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i > 0) {
        ASSERT_GT(g.points[i], g.points[i - 1]);
      }
      ASSERT_GE(g.weights[i], 0.0);
      mass += g.weights[i] * packet.density(g.points[i], prm.hbar);
    }
    EXPECT_GE(mass, 1.0 - 1e-9);
    EXPECT_LE(mass, 1.0 + 1e-12);
    EXPECT_NEAR(mass, 1.0, 1e-8);
  }
}

TEST(OscillationPanels, ScalesWithRate) {
  GaussianPacket g{4e-5, 0.0};
  EXPECT_EQ(oscillation_panels(0.0, g, 1e-34), 16);
  const int n = oscillation_panels(1e32, g, 1e-34);
  EXPECT_GT(n, 16);
  EXPECT_EQ(oscillation_panels(2e32, g, 1e-34), 2 * n);
}
