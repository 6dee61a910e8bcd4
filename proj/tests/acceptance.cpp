// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rabimet/cfi.hpp"
#include "rabimet/check.hpp"
#include "rabimet/metrics.hpp"
#include "rabimet/oracle.hpp"
#include "rabimet/sweep.hpp"

using namespace rabimet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

PhysicalParams with_hbar(double hbar) {
  PhysicalParams p;
  p.hbar = hbar;
  return p;
}

double qfi_with(const PhysicalParams& p) { return qfi_with_kinetic(p, GaussianPacket::from(p)).value; }
double qfi_wo(const PhysicalParams& p) { return qfi_without_kinetic(p).value; }

Outcome resonance_identity() {
  PhysicalParams p;
  p.detuning = 0.0;
  double worst = 0.0;
  for (int i = 1; i <= 10; ++i) {
    p.time = 0.1 * i;
    const double t2 = p.time * p.time;
    worst = std::max({worst, rel(qfi_wo(p), t2), rel(cfi_pdm_without_kinetic(p), t2)});
  }
  return {worst <= 1e-12, fmt("worst relative error %.2e (limit 1e-12)", worst)};
}

Outcome forced_equivalence() {
  double worst = 0.0;
  for (double delta : {-2000.0, -1000.0, 0.0, 1000.0, 2000.0}) {
    for (double t : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      PhysicalParams p = with_hbar(1e-34);
      p.wavevector = 0.0;
      p.detuning = delta;
      p.time = t;
      worst = std::max(worst, rel(qfi_with(p), qfi_wo(p)));
    }
  }
  return {worst <= 1e-9, fmt("worst relative gap %.2e over 5x5 (delta, t) (limit 1e-9)", worst)};
}

Outcome fidelity_closed_form() {
  PhysicalParams p = with_hbar(1e-34);
  p.wavevector = 0.0;
  const double a = p.hbar * p.time / (2.0 * p.mass * p.sigma * p.sigma);
  const double ref = 1.0 / std::sqrt(1.0 + a * a);
  const double f = fidelity(p, GaussianPacket::from(p)).value;
  PhysicalParams t0 = p;
  t0.time = 0.0;
  const double f0 = fidelity(t0, GaussianPacket::from(t0)).value;
  const bool ok = std::abs(f - ref) <= 1e-8 && f0 == 1.0;
  return {ok, fmt("fidelity %.10f vs closed form %.10f; fidelity(t=0) = %.17g", f, ref, f0)};
}

Outcome oracle_equivalence() {
  const auto q = oracle_check(CheckTarget::qfi, 42, 20);
  const auto f = oracle_check(CheckTarget::fidelity, 42, 20);
  const auto c = oracle_check(CheckTarget::cfi, 42, 20);
  const bool ok = q.passed() && f.passed() && c.passed();
  if (!ok) {
    for (const auto* r : {&q, &f, &c}) {
      if (!r->passed()) std::fputs(format_report(*r).c_str(), stdout);
    }
  }
  return {ok, fmt("20 draws, seed 42: qfi worst %.2e rel, fidelity worst %.2e abs, cfi worst %.2e rel",
                  q.worst(), f.worst(), c.worst())};
}

Outcome qfi_orderings() {
  bool ok = true;
  std::string detail;
  for (double hbar : {1e-34, kCodataHbar}) {
    bool a = true, b = true, c = true;
    double prev_wo = -INFINITY;
    for (double delta : {1000.0, 500.0, 100.0}) {
      PhysicalParams p = with_hbar(hbar);
      p.detuning = delta;
      a = a && qfi_with(p) < qfi_wo(p);
      b = b && qfi_wo(p) > prev_wo;
      prev_wo = qfi_wo(p);
    }
    double prev = INFINITY;
    std::vector<double> vals;
    for (double k0 : {1e6, 2e6, 4e6}) {
      PhysicalParams p = with_hbar(hbar);
      p.wavevector = k0;
      const double v = qfi_with(p);
      vals.push_back(v);
      c = c && v < prev;
      prev = v;
    }
    ok = ok && a && b && c;
    detail += fmt("hbar=%.4g: ", hbar) + "(a) " + (a ? "ok" : "no") + " (b) " + (b ? "ok" : "no") +
              " (c) " + (c ? "ok" : "no") + fmt(" [%.4f, %.4f, %.3g]", vals[0], vals[1], vals[2]);
    if (hbar == 1e-34) detail += "; ";
  }
  return {ok, detail};
}

Outcome symmetry_identities() {
  double even = 0.0, refl = 0.0;
  PhysicalParams p = with_hbar(1e-34);
  const double axis = -p.hbar * p.wavevector * p.wavevector / p.mass;
  for (int i = 0; i < 20; ++i) {
    const double delta = -2000.0 + 4000.0 * (i + 0.5) / 20.0;
    PhysicalParams a = p, b = p, c = p;
    a.detuning = delta;
    b.detuning = -delta;
    c.detuning = axis - delta;
    even = std::max(even, rel(qfi_wo(a), qfi_wo(b)));
    refl = std::max(refl, rel(qfi_with(a), qfi_with(c)));
  }
  return {even <= 1e-12 && refl <= 1e-8,
          fmt("even in delta: %.2e (limit 1e-12); reflection about -hbar k0^2/2m: %.2e (limit 1e-8)",
              even, refl)};
}

// Sign changes of qfi_with - qfi_without along the fig3 delta axis, refined
// by bisection on the analytic functions.
std::vector<double> crossings(double hbar) {
  auto spec = preset("fig3");
  spec.hbar_override = hbar;
  const auto r = run_sweep(spec);
  const std::size_t cw = column_index(r, "qfi_with");
  const std::size_t co = column_index(r, "qfi_without");
  std::vector<double> out;
  const PhysicalParams base = spec.resolved_params();
  auto gap = [&](double delta) {
    PhysicalParams p = base;
    p.detuning = delta;
    return qfi_with(p) - qfi_wo(p);
  };
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const double g0 = r.rows[i - 1][cw] - r.rows[i - 1][co];
    const double g1 = r.rows[i][cw] - r.rows[i][co];
    if ((g0 < 0) != (g1 < 0)) {
      double lo = r.rows[i - 1][0], hi = r.rows[i][0];
      const bool lo_neg = g0 < 0;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        ((gap(mid) < 0) == lo_neg ? lo : hi) = mid;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

Outcome crossing_location() {
  bool ok = true;
  std::string detail;
  for (double hbar : {1e-34, kCodataHbar}) {
    const auto xs = crossings(hbar);
    const bool good = xs.size() == 1 && xs[0] > -350.0 && xs[0] < -100.0;
    ok = ok && good;
    detail += fmt("hbar=%.4g: %g crossing(s)", hbar, static_cast<double>(xs.size()));
    if (!xs.empty()) detail += fmt(", delta* = %.3f s^-1", xs[0]);
    detail += "; ";
  }
  return {ok, detail + "required: unique delta* in (-350, -100)"};
}

Outcome sigma_peak() {
  bool ok = true;
  std::string detail;
  for (double hbar : {1e-34, kCodataHbar}) {
    auto spec = preset("fig4");
    spec.hbar_override = hbar;
    const auto r = run_sweep(spec);
    const std::size_t cw = column_index(r, "qfi_with");
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
      if (r.rows[i][cw] > r.rows[best][cw]) best = i;
    }
    const bool interior = best != 0 && best + 1 != r.rows.size();
    ok = ok && interior;
    detail += fmt("hbar=%.4g: argmax sigma = %.4g m (index %g", hbar, r.rows[best][0],
                  static_cast<double>(best)) +
              fmt(" of 200), qfi_with %.5f, endpoints %.5f / %.5f; ", r.rows[best][cw],
                  r.rows.front()[cw], r.rows.back()[cw]);
  }
  return {ok, detail + "required: interior argmax"};
}

Outcome information_inequalities() {
  const auto draws = oracle::random_draws(2024, 50);
  double worst_excess = -INFINITY, worst_mass = 0.0;
  bool ok = true;
  for (const auto& p : draws) {
    const auto packet = GaussianPacket::from(p);
    for (Variant v : {Variant::with_kinetic, Variant::without_kinetic}) {
      const double q = qfi(v, p, packet).value;
      const double tol = 1e-9 * std::max(1.0, q);
      const double pdm = cfi_pdm(v, p, packet).value;
      const auto grid = build_measurement_grid(p, packet, recommended_grid_points(p, packet));
      const auto density = branch_density(p, packet, grid, v);
      const double mm = cfi_mm(density).value;
      const double cm = cfi_cm(density).value;
      for (double excess : {pdm - cm, mm - cm, pdm - q, mm - q, cm - q}) {
        worst_excess = std::max(worst_excess, excess / tol);
        ok = ok && excess <= tol;
      }
      const double mass_err = std::abs(density.total_mass() - 1.0);
      worst_mass = std::max(worst_mass, mass_err);
      ok = ok && mass_err <= 1e-6;
    }
  }
  return {ok, fmt("50 draws x 2 variants: worst excess %.3g tol units (<= 1), branch mass error %.2e "
                  "(limit 1e-6)",
                  worst_excess, worst_mass)};
}

Outcome determinism_and_convergence() {
  double worst = 0.0;
  for (double delta : {1000.0, -300.0}) {
    for (double k0 : {1e6, 4e6}) {
      PhysicalParams p = with_hbar(1e-34);
      p.detuning = delta;
      p.wavevector = k0;
      const auto packet = GaussianPacket::from(p);
      worst = std::max(worst, rel(fidelity(p, packet, 1e-12).value, fidelity(p, packet, 5e-13).value));
      worst = std::max(worst, rel(qfi_with_kinetic(p, packet, 1e-12).value,
                                  qfi_with_kinetic(p, packet, 5e-13).value));
      worst = std::max(worst, rel(cfi_pdm_with_kinetic(p, packet, 1e-12).value,
                                  cfi_pdm_with_kinetic(p, packet, 5e-13).value));
      const std::size_t n = recommended_grid_points(p, packet);
      for (Scheme s : {Scheme::mm, Scheme::cm}) {
        worst = std::max(worst, rel(cfi(s, Variant::with_kinetic, p, packet, 1e-12, n).value,
                                    cfi(s, Variant::with_kinetic, p, packet, 1e-12, 2 * n - 1).value));
      }
    }
  }
  auto spec = preset("fig6");
  spec.seed = 7;
  const std::string first = to_csv(run_sweep(spec, 1));
  const bool identical = to_csv(run_sweep(spec, 1)) == first && to_csv(run_sweep(spec, 4)) == first;

  const auto conv = oracle_check(CheckTarget::convergence, 42, 20);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& l : conv.lines) {
    lo = std::min(lo, l.analytic);
    hi = std::max(hi, l.analytic);
  }
  PhysicalParams d;
  const double order = oracle::rk4_convergence_order(d, 0.0, 20000);
  lo = std::min(lo, order);
  hi = std::max(hi, order);
  const bool ok = worst < 1e-8 && identical && lo >= 3.7 && hi <= 4.3;
  return {ok, fmt("budget doubling max change %.2e (limit 1e-8); RK4 order in [%.4f, %.4f]", worst, lo,
                  hi) +
                  "; repeated sweeps " + (identical ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "resonant exact identity", resonance_identity},
      {2, "forced equivalence at k0 = 0", forced_equivalence},
      {3, "fidelity closed form", fidelity_closed_form},
      {4, "oracle equivalence", oracle_equivalence},
      {5, "QFI orderings", qfi_orderings},
      {6, "symmetry identities", symmetry_identities},
      {7, "crossing location", crossing_location},
      {8, "sigma-peak existence", sigma_peak},
      {9, "information inequalities", information_inequalities},
      {10, "determinism and convergence", determinism_and_convergence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d, %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
