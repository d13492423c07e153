// qsp: command-line front end. Exit 0 on completed work, 1 on usage or
// config errors, 2 when a solver run was inconclusive.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qsp/config.hpp"
#include "qsp/output.hpp"
#include "qsp/regime.hpp"
#include "qsp/run.hpp"
#include "qsp/suite.hpp"
#include "qsp/sweep.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string preset;
  std::string coeff;
  std::string formulation;
  std::optional<double> t_max;
  std::optional<long> grid;
  std::optional<double> mass;
  std::optional<double> theta;
  std::optional<double> alpha;
  std::vector<std::string> set;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "config file or preset name");
  cmd->add_option("--preset", o.preset, "preset name")
      ->check(CLI::IsMember(qsp::preset_names()));
  cmd->add_option("--coeff", o.coeff, "coefficient override");
  cmd->add_option("--formulation", o.formulation, "f, u or both")
      ->check(CLI::IsMember({"f", "u", "both"}));
  cmd->add_option("--t-max", o.t_max, "final time");
  cmd->add_option("--grid", o.grid, "cells in both coordinates");
  cmd->add_option("--mass", o.mass, "total mass M");
  cmd->add_option("--theta", o.theta, "design exponent theta");
  cmd->add_option("--alpha", o.alpha, "design exponent alpha");
  cmd->add_option("--set", o.set, "extra key=value config assignments");
}

qsp::RunConfig build_config(const Overrides& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw qsp::ConfigError("--config", "give either --config or --preset");
  }
  qsp::RunConfig cfg;
  if (!o.preset.empty()) cfg = qsp::preset(o.preset);
  else if (!o.config.empty()) cfg = qsp::resolve_config(o.config);
  else throw qsp::ConfigError("--config", "a config file or preset is required");

  if (!o.coeff.empty()) cfg.coefficient = qsp::parse_coefficient_arg(o.coeff);
  if (!o.formulation.empty()) qsp::apply_key(cfg, "solver.formulation", o.formulation);
  if (o.t_max) cfg.t_max = *o.t_max;
  if (o.grid) cfg.n = cfg.ny = *o.grid;
  if (o.mass) cfg.mass = *o.mass;
  if (o.theta) cfg.theta = *o.theta;
  if (o.alpha) cfg.alpha = *o.alpha;
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw qsp::ConfigError("--set", "expected key=value");
    qsp::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  qsp::validate(cfg);
  return cfg;
}

std::vector<qsp::DecrCandidate> candidates(const std::optional<double>& theta,
                                           const std::optional<double>& alpha) {
  if (!alpha) {
    if (!theta) return {};
    std::vector<qsp::DecrCandidate> out;
    for (auto c : qsp::default_candidates()) {
      c.theta = *theta;
      if (c.alpha > c.theta / (1.0 + c.theta)) out.push_back(c);
    }
    return out;
  }
  return {qsp::DecrCandidate{theta.value_or(0.5), *alpha}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the 1D quasilinear Smoluchowski-Poisson system"};
  app.require_subcommand(1);

  std::string coeff;
  std::optional<double> theta, alpha, mass;
  std::optional<long> grid;
  std::string out_dir;
  unsigned jobs = 1;
  std::vector<std::string> params;
  Overrides run;

  auto* classify = app.add_subcommand("classify", "regime report as JSON");
  classify->add_option("--coeff", coeff, "coefficient")->required();
  classify->add_option("--theta", theta);
  classify->add_option("--alpha", alpha);

  auto* design = app.add_subcommand("design", "blowup design as JSON");
  design->add_option("--coeff", coeff, "coefficient")->required();
  design->add_option("--mass", mass);
  design->add_option("--theta", theta);
  design->add_option("--alpha", alpha);
  design->add_option("--grid", grid, "N_y for the delta search");

  auto* simulate = app.add_subcommand("simulate", "one run; summary JSON and CSV series");
  add_run_options(simulate, run);
  simulate->add_option("--out", out_dir, "output directory (default out/<name>)");

  auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
  add_run_options(sweep, run);
  sweep->add_option("--param", params, "key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "output directory (default sweep/<name>)");

  auto* validate = app.add_subcommand("validate", "invariant suite on builtin coefficients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*classify) {
      const auto c = qsp::parse_coefficient_arg(coeff).build();
      const auto list = candidates(theta, alpha);
      std::cout << qsp::dump_json(qsp::to_json(qsp::classify(c, list)));
      return 0;
    }
    if (*design) {
      const qsp::Potentials p(qsp::parse_coefficient_arg(coeff).build());
      const double M = mass.value_or(1.0);
      if (!(M > 0.0)) throw qsp::ConfigError("mass", "must be positive");
      const auto report = qsp::classify(p.coefficient(), candidates(theta, alpha));
      if (!report.decr || !report.tail_integrable) {
        throw qsp::ConfigError("--coeff", fmt::format("no blowup design: classified as {}",
                                                      qsp::to_string(report.clause)));
      }
      qsp::BlowupDesign d = qsp::partial_design(p, M, report.decr->theta, report.decr->alpha);
      try {
        qsp::select_delta(p, d, grid.value_or(400));
        std::cout << qsp::dump_json(qsp::to_json(d));
      } catch (const qsp::DesignError& e) {
        d.trace = e.trace();
        qsp::Json j = qsp::to_json(d);
        j["error"] = e.what();
        std::cout << qsp::dump_json(j);
      }
      return 0;
    }
    if (*simulate) {
      const qsp::RunConfig cfg = build_config(run);
      const qsp::RunResult r = qsp::simulate(cfg);
      const std::filesystem::path dir =
          !out_dir.empty() ? std::filesystem::path(out_dir)
                           : !cfg.out_dir.empty() ? cfg.out_dir
                                                  : std::filesystem::path("out") / cfg.name;
      qsp::emit_outputs(r, dir);
      std::cout << qsp::dump_json(qsp::to_json(r.summary));
      std::cerr << fmt::format("{}: {} at t = {:.6g}, wall clock {:.3f} s, outputs in {}\n",
                               cfg.name, qsp::to_string(r.summary.verdict), r.summary.final_time,
                               r.summary.wall_clock, dir.string());
      return qsp::exit_status(r.summary);
    }
    if (*sweep) {
      const qsp::RunConfig cfg = build_config(run);
      std::vector<qsp::SweepParam> parsed;
      for (const auto& p : params) parsed.push_back(qsp::parse_sweep_param(p));
      const std::filesystem::path dir =
          out_dir.empty() ? std::filesystem::path("sweep") / cfg.name : std::filesystem::path(out_dir);
      const qsp::SweepReport report = qsp::run_sweep(cfg, parsed, dir, jobs);
      std::cout << qsp::dump_json(qsp::to_json(report));
      return report.status();
    }
    if (*validate) {
      const auto checks = qsp::validate_builtins();
      qsp::Json list = qsp::Json::array();
      bool all = true;
      for (const auto& c : checks) {
        list.push_back(qsp::to_json(c));
        all = all && (!c.applicable || c.passed);
      }
      std::cout << qsp::dump_json(qsp::Json{{"passed", all}, {"checks", list}});
      return 0;
    }
  } catch (const qsp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const qsp::expr::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
