#include "qsp/output.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace qsp {

const char* const kSeriesHeader =
    "t,dt,f_min,f_max,u_max,mass_err,L1,m_q,sigma,slack_corollary,slack_gex5,slack_gex6,"
    "slack_moment_ode,slack_prandtl";

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

void dump_into(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? "\n" + std::string(indent * (depth + 1), ' ') : "";
  const std::string close = indent > 0 ? "\n" + std::string(indent * depth, ' ') : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += pad;
        out += Json(key).dump();
        out += colon;
        dump_into(value, indent, depth + 1, out);
      }
      out += close + '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        out += pad;
        dump_into(value, indent, depth + 1, out);
      }
      out += close + ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\"";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

Json optional_index(const std::optional<std::size_t>& i) { return i ? Json(*i) : Json(nullptr); }

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  out += '\n';
  return out;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }
Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json to_json(const Supremum& s) {
  return Json{{"value", number(s.value)}, {"argmax", number(s.argmax)}, {"divergent", s.divergent}};
}

Json to_json(const RegimeReport& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back(Json{{"theta", c.theta},
                              {"alpha", c.alpha},
                              {"gamma_theta", number(c.gamma_theta.value)},
                              {"c_infinity", number(c.c_infinity.value)},
                              {"admissible", c.admissible()}});
  }
  Json j{{"coefficient", r.coefficient},
         {"clause", to_string(r.clause)},
         {"gamma", number(r.gamma.value)},
         {"tail_integrable", r.tail_integrable},
         {"tail_certainty", to_string(r.tail_certainty)},
         {"value_certainty", to_string(r.value_certainty)}};
  if (r.decr) {
    j["theta"] = r.decr->theta;
    j["alpha"] = r.decr->alpha;
    j["gamma_theta"] = number(r.decr->gamma_theta.value);
    j["c_infinity"] = number(r.decr->c_infinity.value);
  } else {
    j["theta"] = nullptr;
    j["alpha"] = nullptr;
    j["gamma_theta"] = nullptr;
    j["c_infinity"] = nullptr;
  }
  j["default_candidates"] = r.default_candidates;
  j["candidates"] = std::move(candidates);
  j["note"] = r.note;
  return j;
}

Json to_json(const DeltaTrial& t) {
  return Json{{"delta", number(t.delta)},     {"lyapunov", number(t.lyapunov)},
              {"k0", number(t.k0)},           {"mq0_exact", number(t.mq0_exact)},
              {"mq0_discrete", number(t.mq0_discrete)}, {"lambda", number(t.lambda)}};
}

Json to_json(const BlowupDesign& d) {
  Json trace = Json::array();
  for (const auto& t : d.trace) trace.push_back(to_json(t));
  return Json{{"coefficient", d.coefficient},
              {"mass", number(d.mass)},
              {"theta", number(d.theta)},
              {"alpha", number(d.alpha)},
              {"gamma_theta", number(d.gamma_theta)},
              {"c_infinity", number(d.c_infinity)},
              {"q_floor", number(d.q_floor)},
              {"q", number(d.q)},
              {"eps_m", number(d.eps_m)},
              {"eps_tail", number(d.eps_tail)},
              {"psi0", number(d.psi0)},
              {"psi_tilde_2m", number(d.psi_tilde_2m)},
              {"c1", number(d.c1)},
              {"c2", number(d.c2)},
              {"mu_m", number(d.mu_m)},
              {"ny", d.ny},
              {"delta", number(d.delta)},
              {"lyapunov0", number(d.lyapunov0)},
              {"k0", number(d.k0)},
              {"mq0_exact", number(d.mq0_exact)},
              {"mq0_discrete", number(d.mq0_discrete)},
              {"lambda0", number(d.lambda0)},
              {"violated_invariants", d.violated_invariants()},
              {"trace", std::move(trace)}};
}

Json to_json(const CheckVerdict& c) {
  return Json{{"name", c.name},
              {"applicable", c.applicable},
              {"passed", c.passed},
              {"min_slack", number(c.min_slack)},
              {"first_violation", optional_index(c.first_violation)},
              {"tolerance", number(c.tolerance)},
              {"detail", c.detail}};
}

Json to_json(const RunSummary& s) {
  Json runs = Json::array();
  for (const auto& r : s.runs) {
    runs.push_back(Json{{"formulation", to_string(r.form)},
                        {"verdict", to_string(r.verdict)},
                        {"blowup_time", number(r.blowup_time)},
                        {"final_time", number(r.final_time)},
                        {"steps", r.steps},
                        {"rejected", r.rejected},
                        {"max_mass_err", number(r.max_mass_err)},
                        {"reason", r.reason}});
  }
  Json checks = Json::array();
  for (const auto& c : s.checks) checks.push_back(to_json(c));
  Json trace = Json::array();
  for (const auto& t : s.design_trace) trace.push_back(to_json(t));

  return Json{
      {"name", s.name},
      {"verdict", to_string(s.verdict)},
      {"blowup_time", number(s.blowup_time)},
      {"final_time", number(s.final_time)},
      {"checks_passed", s.checks_passed()},
      {"regime", to_json(s.regime)},
      {"design", s.design ? to_json(*s.design) : Json(nullptr)},
      {"design_error", s.design_error ? Json(*s.design_error) : Json(nullptr)},
      {"design_trace", std::move(trace)},
      {"initial",
       {{"kind", to_string(s.config.initial.kind)},
        {"q", number(s.initial.q)},
        {"delta", number(s.initial.delta)},
        {"m0", number(s.initial.m0)},
        {"threshold_scale", number(s.initial.scale)},
        {"lyapunov0", number(s.lyapunov0)},
        {"note", s.initial.note}}},
      {"runs", std::move(runs)},
      {"checks", std::move(checks)},
      {"crossval_gap", number(s.crossval_gap)},
      {"config", to_json(s.config)},
  };
}

void write_series_csv(const DiagnosticsSeries& series, std::ostream& out) {
  out << kSeriesHeader << '\n';
  for (const auto& r : series) {
    out << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.f_min) << ','
        << format_double(r.f_max) << ',' << format_double(r.u_max) << ','
        << format_double(r.mass_err) << ',' << cell(r.L1) << ',' << cell(r.m_q) << ','
        << cell(r.sigma) << ',' << cell(r.slack_corollary) << ',' << cell(r.slack_gex5) << ','
        << cell(r.slack_gex6) << ',' << cell(r.slack_moment_ode) << ',' << cell(r.slack_prandtl)
        << '\n';
  }
}

void write_series_u_csv(const DiagnosticsSeries& series, std::ostream& out) {
  out << "t,dt,u_max,mass_err\n";
  for (const auto& r : series) {
    out << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.u_max) << ','
        << format_double(r.mass_err) << '\n';
  }
}

void emit_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
    return out;
  };
  if (!result.series.empty()) {
    auto out = open("series.csv");
    write_series_csv(result.series, out);
  }
  if (!result.series_u.empty()) {
    auto out = open("series_u.csv");
    write_series_u_csv(result.series_u, out);
  }
  {
    auto out = open("summary.json");
    out << dump_json(to_json(result.summary));
  }
  write_csv(result.summary.initial.f, dir / "initial_f.csv");
  if (result.final_f) write_csv(result.final_f->as_f(), dir / "final_f.csv");
  if (result.final_u) write_csv(result.final_u->as_u(), dir / "final_u.csv");
}

}  // namespace qsp
