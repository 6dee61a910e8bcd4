// rabimet: point evaluations, figure sweeps, and oracle checks.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 numerical failure,
// 4 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "rabimet/cfi.hpp"
#include "rabimet/check.hpp"
#include "rabimet/config.hpp"
#include "rabimet/errors.hpp"
#include "rabimet/metrics.hpp"
#include "rabimet/sweep.hpp"

namespace {

using namespace rabimet;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct ParamFlags {
  std::optional<double> hbar, mass, rabi, delta, k0, time, sigma;

  void attach(CLI::App* app) {
    app->add_option("--hbar", hbar, "reduced Planck constant, J s");
    app->add_option("--mass", mass, "atomic mass, kg");
    app->add_option("--rabi,--omega", rabi, "Rabi frequency Omega, rad/s");
    app->add_option("--delta,--detuning", delta, "detuning Delta, rad/s");
    app->add_option("--k0,--wavevector", k0, "laser wavevector, 1/m");
    app->add_option("--time,--t", time, "interaction time, s");
    app->add_option("--sigma", sigma, "packet position width, m");
  }

  void apply(PhysicalParams& p) const {
    if (hbar) p.hbar = *hbar;
    if (mass) p.mass = *mass;
    if (rabi) p.rabi = *rabi;
    if (delta) p.detuning = *delta;
    if (k0) p.wavevector = *k0;
    if (time) p.time = *time;
    if (sigma) p.sigma = *sigma;
  }
};

struct PointArgs {
  ParamFlags flags;
  std::string config;
  std::string variant = "with";
  std::string scheme = "pdm";
  std::string format = "text";
  double tolerance = kDefaultTolerance;
  std::size_t grid_points = 0;
};

struct SweepArgs {
  ParamFlags flags;
  std::string config;
  std::string preset;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool third_k0 = false;
  bool emit_config = false;
};

struct OracleArgs {
  std::string target = "qfi";
  std::uint64_t seed = 42;
  std::size_t draws = 20;
};

Variant parse_variant(const std::string& s) {
  if (s == "with") return Variant::with_kinetic;
  if (s == "without") return Variant::without_kinetic;
  throw std::invalid_argument("--variant must be 'with' or 'without'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "pdm") return Scheme::pdm;
  if (s == "mm") return Scheme::mm;
  if (s == "cm") return Scheme::cm;
  throw std::invalid_argument("--scheme must be pdm, mm or cm");
}

PhysicalParams point_params(const PointArgs& a) {
  PhysicalParams p;
  if (!a.config.empty()) {
    const auto cfg = load_config(a.config);
    p = cfg.spec.resolved_params();
  }
  a.flags.apply(p);
  p.validate();
  return p;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void report_point(const std::string& metric, const MetricValue& v, const PhysicalParams& p,
                  const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["metric"] = metric;
    j["value"] = v.value;
    j["error"] = v.error;
    j["params"] = {{"hbar", p.hbar},         {"mass", p.mass},
                   {"rabi", p.rabi},         {"detuning", p.detuning},
                   {"wavevector", p.wavevector}, {"time", p.time},
                   {"sigma", p.sigma}};
    write_output("", j.dump(2) + "\n");
    return;
  }
  write_output("", metric + " " + format_double(v.value) + " error " + format_double(v.error) + "\n");
}

int run_fidelity(const PointArgs& a) {
  const auto p = point_params(a);
  report_point("fidelity", evaluate(Metric::fidelity, p, a.tolerance), p, a.format);
  return 0;
}

int run_qfi(const PointArgs& a) {
  const auto p = point_params(a);
  const Variant v = parse_variant(a.variant);
  const Metric m = v == Variant::with_kinetic ? Metric::qfi_with : Metric::qfi_without;
  report_point(std::string(to_string(m)), evaluate(m, p, a.tolerance), p, a.format);
  return 0;
}

int run_cfi(const PointArgs& a) {
  const auto p = point_params(a);
  const Variant v = parse_variant(a.variant);
  const Scheme s = parse_scheme(a.scheme);
  const auto r = cfi(s, v, p, GaussianPacket::from(p), a.tolerance, a.grid_points);
  report_point("cfi_" + std::string(to_string(s)) + "_" + std::string(to_string(v)),
               {r.value, r.estimated_error}, p, a.format);
  return 0;
}

int run_sweep_command(const SweepArgs& a) {
  SweepSpec spec;
  if (!a.config.empty()) {
    spec = load_config(a.config).spec;
    if (!a.preset.empty()) throw std::invalid_argument("give either --preset or --config, not both");
  } else if (!a.preset.empty()) {
    spec = preset(a.preset, a.third_k0);
  } else {
    throw std::invalid_argument("sweep needs --preset or --config");
  }
  a.flags.apply(spec.fixed);
  if (a.flags.hbar) spec.hbar_override = *a.flags.hbar;
  if (a.seed) spec.seed = *a.seed;
  if (a.emit_config) {
    write_output(a.out, emit_config(spec));
    return 0;
  }
  const auto result = run_sweep(spec, a.jobs);
  write_output(a.out, a.format == "json" ? to_json(result) : to_csv(result));
  return 0;
}

int run_oracle(const OracleArgs& a) {
  const auto report = oracle_check(parse_check_target(a.target), a.seed, a.draws);
  write_output("", format_report(report));
  return report.passed() ? 0 : kExitNumerical;
}

void attach_point(CLI::App* cmd, PointArgs& a) {
  a.flags.attach(cmd);
  cmd->add_option("--config", a.config, "key = value parameter file");
  cmd->add_option("--tol", a.tolerance, "quadrature tolerance");
  cmd->add_option("--format", a.format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fidelity and Fisher information of a driven two-level atom with recoil"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  PointArgs fid_args, qfi_args, cfi_args;
  SweepArgs sweep_args;
  OracleArgs oracle_args;

  auto* fid = app.add_subcommand("fidelity", "fidelity between dynamics with and without recoil");
  attach_point(fid, fid_args);

  auto* qfi_cmd = app.add_subcommand("qfi", "quantum Fisher information for Omega");
  attach_point(qfi_cmd, qfi_args);
  qfi_cmd->add_option("--variant", qfi_args.variant, "with or without")
      ->check(CLI::IsMember({"with", "without"}));

  auto* cfi_cmd = app.add_subcommand("cfi", "classical Fisher information of a measurement");
  attach_point(cfi_cmd, cfi_args);
  cfi_cmd->add_option("--variant", cfi_args.variant, "with or without")
      ->check(CLI::IsMember({"with", "without"}));
  cfi_cmd->add_option("--scheme", cfi_args.scheme, "pdm, mm or cm")
      ->check(CLI::IsMember({"pdm", "mm", "cm"}));
  cfi_cmd->add_option("--grid-points", cfi_args.grid_points, "measurement grid size (0: automatic)");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV or JSON");
  sweep_args.flags.attach(sweep);
  sweep->add_option("--preset", sweep_args.preset, "fig1 .. fig7")
      ->check(CLI::IsMember({"fig1", "fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6", "fig7"}));
  sweep->add_option("--config", sweep_args.config, "key = value sweep file");
  sweep->add_option("--out", sweep_args.out, "output path (default stdout)");
  sweep->add_option("--format", sweep_args.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--seed", sweep_args.seed, "seed recorded with the output");
  sweep->add_option("--jobs", sweep_args.jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--fig2a-third-k0", sweep_args.third_k0, "add k0 = 3e6 1/m to fig2a");
  sweep->add_flag("--emit-config", sweep_args.emit_config, "print the resolved configuration and exit");

  auto* orc = app.add_subcommand("oracle", "compare analytic results with the brute-force oracle");
  orc->add_option("--target", oracle_args.target, "qfi, cfi, fidelity, unitary or convergence")
      ->check(CLI::IsMember({"qfi", "cfi", "fidelity", "unitary", "convergence"}));
  orc->add_option("--seed", oracle_args.seed, "draw seed");
  orc->add_option("--draws", oracle_args.draws, "number of random draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fid) return run_fidelity(fid_args);
    if (*qfi_cmd) return run_qfi(qfi_args);
    if (*cfi_cmd) return run_cfi(cfi_args);
    if (*sweep) return run_sweep_command(sweep_args);
    if (*orc) return run_oracle(oracle_args);
  } catch (const IoError& e) {
    std::cerr << "rabimet: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "rabimet: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rabimet: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "rabimet: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
