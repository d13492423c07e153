#include "qsp/sweep.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "qsp/run.hpp"

namespace qsp {

SweepParam parse_sweep_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw ConfigError("--param", fmt::format("expected key=v1,v2,..., got '{}'", text));
  }
  SweepParam p;
  p.key = text.substr(0, eq);
  std::istringstream in(text.substr(eq + 1));
  for (std::string v; std::getline(in, v, ',');) {
    if (v.empty()) throw ConfigError(p.key, "empty sweep value");
    p.values.push_back(v);
  }
  return p;
}

std::vector<std::vector<std::pair<std::string, std::string>>> sweep_tuples(
    const std::vector<SweepParam>& params) {
  std::vector<std::vector<std::pair<std::string, std::string>>> out{{}};
  for (const auto& p : params) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& prefix : out) {
      for (const auto& v : p.values) {
        auto t = prefix;
        t.emplace_back(p.key, v);
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

int SweepReport::status() const {
  int worst = 0;
  for (const auto& c : children) worst = std::max(worst, c.status);
  return worst;
}

SweepReport run_sweep(const RunConfig& base, const std::vector<SweepParam>& params,
                      const std::filesystem::path& out_dir, unsigned jobs) {
  SweepReport report;
  report.base = base.name;
  report.params = params;
  const auto tuples = sweep_tuples(params);
  report.children.resize(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    report.children[i].index = i;
    report.children[i].assignment = tuples[i];
    report.children[i].dir = fmt::format("run_{:03d}", i);
  }

  // Apply every tuple up front so key errors surface before any solver work.
  std::vector<std::optional<RunConfig>> configs(tuples.size());
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    try {
      RunConfig cfg = base;
      for (const auto& [key, value] : tuples[i]) apply_key(cfg, key, value);
      validate(cfg);
      cfg.name = fmt::format("{}/{}", base.name, report.children[i].dir);
      configs[i] = std::move(cfg);
    } catch (const ConfigError& e) {
      report.children[i].error = e.what();
      report.children[i].status = 1;
    }
  }

  std::filesystem::create_directories(out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tuples.size();) {
      if (!configs[i]) continue;
      SweepChild& child = report.children[i];
      try {
        const RunResult r = simulate(*configs[i]);
        emit_outputs(r, out_dir / child.dir);
        child.verdict = r.summary.verdict;
        child.blowup_time = r.summary.blowup_time;
        child.final_time = r.summary.final_time;
        child.checks_passed = r.summary.checks_passed();
        child.status = exit_status(r.summary);
      } catch (const std::exception& e) {
        child.error = e.what();
        child.status = dynamic_cast<const ConfigError*>(&e) ? 1 : 2;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tuples.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream manifest(out_dir / "manifest.json", std::ios::binary);
  if (!manifest) throw std::runtime_error("cannot write manifest.json");
  manifest << dump_json(to_json(report));
  return report;
}

Json to_json(const SweepReport& report) {
  Json params = Json::array();
  for (const auto& p : report.params) params.push_back(Json{{"key", p.key}, {"values", p.values}});
  Json children = Json::array();
  for (const auto& c : report.children) {
    Json assignment = Json::object();
    for (const auto& [k, v] : c.assignment) assignment[k] = v;
    children.push_back(Json{{"index", c.index},
                            {"dir", c.dir},
                            {"assignment", std::move(assignment)},
                            {"verdict", c.verdict ? Json(to_string(*c.verdict)) : Json(nullptr)},
                            {"blowup_time", number(c.blowup_time)},
                            {"final_time", number(c.final_time)},
                            {"checks_passed", c.checks_passed},
                            {"status", c.status},
                            {"error", c.error.empty() ? Json(nullptr) : Json(c.error)}});
  }
  return Json{{"base", report.base},
              {"params", std::move(params)},
              {"runs", report.children.size()},
              {"children", std::move(children)}};
}

}  // namespace qsp
