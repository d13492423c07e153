#include "qsp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace qsp {

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : std::runtime_error(key.empty() ? what : fmt::format("{}: {}", key, what)), key_(key) {}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, fmt::format("expected a number, got '{}'", text));
  }
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

long to_long(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, fmt::format("expected an integer, got '{}'", text));
  }
  return v;
}

std::optional<double> to_auto_double(const std::string& key, const std::string& text) {
  if (trim(text) == "auto") return std::nullopt;
  return to_double(key, text);
}

std::vector<double> split_args(const std::string& key, std::string_view inside) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(inside)};
  while (std::getline(in, item, ',')) out.push_back(to_double(key, item));
  return out;
}

const std::map<std::string, std::string, std::less<>>& preset_table() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"blowup-demo", R"(name = blowup-demo
mass = 1
[coefficient]
builtin = shifted_power
c = 1
beta = -2
[initial]
kind = pam
q = auto
delta = auto
[solver]
formulation = f
t_max = 50
[grid]
ny = 400
[output]
every = 1
)"},
      {"global-demo", R"(name = global-demo
mass = 1
[coefficient]
builtin = shifted_power
c = 1
beta = -1
[initial]
kind = cosine
amplitude = 0.5
[solver]
formulation = f
t_max = 5
[grid]
n = 400
ny = 400
[output]
interval = 0.01
)"},
      {"decr-demo", R"(name = decr-demo
mass = 1
[coefficient]
builtin = singular_power
c = 1
p = 2.5
beta = 1
[initial]
kind = pam
q = auto
delta = auto
[solver]
formulation = f
t_max = 50
[grid]
ny = 400
[design]
theta = 0.5
alpha = 1.5
[output]
every = 1
)"},
      {"crossval", R"(name = crossval
mass = 1
[coefficient]
builtin = shifted_power
c = 1
beta = -1
[initial]
kind = cosine
amplitude = 0.5
[solver]
formulation = both
t_max = 0.1
dt_init = 1e-5
dt_max_h = 0.25
[grid]
n = 400
ny = 400
[output]
interval = 0.01
)"},
  };
  return table;
}

}  // namespace

Coefficient CoefficientSpec::build() const {
  if (builtin.empty()) {
    if (expression.empty()) throw ConfigError("coefficient", "no builtin or expression given");
    return Coefficient::from_expression(expression);
  }
  if (builtin == "constant") return Coefficient::constant(c);
  if (builtin == "shifted_power") return Coefficient::shifted_power(c, beta);
  if (builtin == "singular_power") return Coefficient::singular_power(c, p, beta);
  throw ConfigError("coefficient.builtin", fmt::format("unknown family '{}'", builtin));
}

std::string CoefficientSpec::describe() const {
  if (builtin.empty()) return expression;
  if (builtin == "constant") return fmt::format("constant({})", c);
  if (builtin == "shifted_power") return fmt::format("shifted_power({},{})", c, beta);
  return fmt::format("singular_power({},{},{})", c, p, beta);
}

CoefficientSpec parse_coefficient_arg(const std::string& text) {
  const std::string t = trim(text);
  CoefficientSpec spec;
  for (const char* family : {"constant", "shifted_power", "singular_power"}) {
    const std::string_view name = family;
    if (t.size() > name.size() + 1 && t.compare(0, name.size(), name) == 0 &&
        t[name.size()] == '(' && t.back() == ')') {
      const auto args = split_args("--coeff", std::string_view(t).substr(
                                                  name.size() + 1, t.size() - name.size() - 2));
      const std::size_t want = name == "singular_power" ? 3 : name == "shifted_power" ? 2 : 1;
      if (args.size() != want) {
        throw ConfigError("--coeff", fmt::format("{} takes {} arguments", name, want));
      }
      spec.builtin = std::string(name);
      spec.c = args[0];
      if (name == "shifted_power") spec.beta = args[1];
      if (name == "singular_power") {
        spec.p = args[1];
        spec.beta = args[2];
      }
      return spec;
    }
  }
  if (t.empty()) throw ConfigError("--coeff", "empty coefficient");
  spec.expression = t;
  return spec;
}

std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::constant: return "constant";
    case InitialKind::cosine: return "cosine";
    case InitialKind::pam: return "pam";
    case InitialKind::samples: return "samples";
  }
  return "cosine";
}

std::string_view to_string(FormulationChoice f) {
  switch (f) {
    case FormulationChoice::f: return "f";
    case FormulationChoice::u: return "u";
    case FormulationChoice::both: return "both";
  }
  return "f";
}

double RunConfig::effective_dt_max() const {
  return dt_max_h ? *dt_max_h / static_cast<double>(std::max(n, ny)) : dt_max;
}

double RunConfig::effective_interval() const {
  return output_interval > 0.0 ? output_interval : t_max / 100.0;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "name") {
    cfg.name = v;
  } else if (key == "mass") {
    cfg.mass = to_double(key, v);
  } else if (key == "coefficient.expr") {
    cfg.coefficient.expression = v;
  } else if (key == "coefficient.builtin") {
    cfg.coefficient.builtin = v;
  } else if (key == "coefficient.c") {
    cfg.coefficient.c = to_double(key, v);
  } else if (key == "coefficient.p") {
    cfg.coefficient.p = to_double(key, v);
  } else if (key == "coefficient.beta") {
    cfg.coefficient.beta = to_double(key, v);
  } else if (key == "initial.kind") {
    if (v == "constant") cfg.initial.kind = InitialKind::constant;
    else if (v == "cosine") cfg.initial.kind = InitialKind::cosine;
    else if (v == "pam") cfg.initial.kind = InitialKind::pam;
    else if (v == "samples") cfg.initial.kind = InitialKind::samples;
    else throw ConfigError(key, fmt::format("unknown kind '{}'", v));
  } else if (key == "initial.amplitude") {
    cfg.initial.amplitude = to_double(key, v);
  } else if (key == "initial.q") {
    cfg.initial.q = to_auto_double(key, v);
  } else if (key == "initial.delta") {
    cfg.initial.delta = to_auto_double(key, v);
  } else if (key == "initial.file") {
    cfg.initial.file = v;
  } else if (key == "initial.field") {
    if (v != "u" && v != "f") throw ConfigError(key, "must be u or f");
    cfg.initial.field = v;
  } else if (key == "solver.formulation") {
    if (v == "f") cfg.formulation = FormulationChoice::f;
    else if (v == "u") cfg.formulation = FormulationChoice::u;
    else if (v == "both") cfg.formulation = FormulationChoice::both;
    else throw ConfigError(key, fmt::format("unknown formulation '{}'", v));
  } else if (key == "solver.t_max") {
    cfg.t_max = to_double(key, v);
  } else if (key == "solver.dt_init") {
    cfg.dt_init = to_double(key, v);
  } else if (key == "solver.dt_max") {
    cfg.dt_max = to_double(key, v);
    cfg.dt_max_h.reset();
  } else if (key == "solver.dt_max_h") {
    cfg.dt_max_h = to_double(key, v);
  } else if (key == "grid.n") {
    cfg.n = to_long(key, v);
  } else if (key == "grid.ny") {
    cfg.ny = to_long(key, v);
  } else if (key == "output.dir") {
    cfg.out_dir = v;
  } else if (key == "output.interval") {
    cfg.output_interval = to_double(key, v);
  } else if (key == "output.every") {
    cfg.output_every = to_long(key, v);
  } else if (key == "design.theta") {
    cfg.theta = to_double(key, v);
  } else if (key == "design.alpha") {
    cfg.alpha = to_auto_double(key, v);
  } else if (key == "tolerance.touchdown") {
    cfg.touchdown = to_double(key, v);
  } else if (key == "tolerance.target_change") {
    cfg.target_change = to_double(key, v);
  } else if (key == "tolerance.newton") {
    cfg.newton_tolerance = to_double(key, v);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

void validate(const RunConfig& cfg) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(key, fmt::format("must be positive, got {}", v));
  };
  positive("mass", cfg.mass);
  positive("solver.t_max", cfg.t_max);
  positive("solver.dt_init", cfg.dt_init);
  positive("solver.dt_max", cfg.dt_max);
  if (cfg.dt_max_h) positive("solver.dt_max_h", *cfg.dt_max_h);
  positive("design.theta", cfg.theta);
  positive("tolerance.touchdown", cfg.touchdown);
  positive("tolerance.target_change", cfg.target_change);
  positive("tolerance.newton", cfg.newton_tolerance);
  if (cfg.touchdown >= 1.0) throw ConfigError("tolerance.touchdown", "must be below 1");
  if (cfg.n < 4) throw ConfigError("grid.n", "needs at least 4 cells");
  if (cfg.ny < 4) throw ConfigError("grid.ny", "needs at least 4 cells");
  if (cfg.output_interval < 0.0) throw ConfigError("output.interval", "must not be negative");
  if (cfg.output_every < 0) throw ConfigError("output.every", "must not be negative");
  if (cfg.alpha) {
    const double lo = cfg.theta / (1.0 + cfg.theta);
    if (!(*cfg.alpha > lo && *cfg.alpha <= 2.0)) {
      throw ConfigError("design.alpha", fmt::format("must lie in ({}, 2]", lo));
    }
  }

  const CoefficientSpec& c = cfg.coefficient;
  if (c.builtin.empty() == c.expression.empty()) {
    throw ConfigError("coefficient", "give exactly one of builtin and expr");
  }
  if (!c.builtin.empty()) {
    if (c.builtin != "constant" && c.builtin != "shifted_power" && c.builtin != "singular_power") {
      throw ConfigError("coefficient.builtin", fmt::format("unknown family '{}'", c.builtin));
    }
    positive("coefficient.c", c.c);
  }

  const InitialSpec& init = cfg.initial;
  switch (init.kind) {
    case InitialKind::cosine:
      if (!(std::abs(init.amplitude) < cfg.mass)) {
        throw ConfigError("initial.amplitude", "|amplitude| must be below mass for positivity");
      }
      break;
    case InitialKind::pam:
      if (init.q) positive("initial.q", *init.q);
      if (init.delta) {
        positive("initial.delta", *init.delta);
        if (!init.q) throw ConfigError("initial.delta", "an explicit delta needs an explicit q");
        if (!(*init.delta < pam_delta_limit(cfg.mass, *init.q))) {
          throw ConfigError("initial.delta", fmt::format("must be below {}",
                                                         pam_delta_limit(cfg.mass, *init.q)));
        }
      }
      break;
    case InitialKind::samples:
      if (init.file.empty()) throw ConfigError("initial.file", "required for samples");
      break;
    case InitialKind::constant:
      break;
  }
}

RunConfig parse_config(std::istream& in, const std::string& name) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", fmt::format("{}: {}", name, e.what()));
  }
  RunConfig cfg;
  cfg.name = name;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      apply_key(cfg, key, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(key + "." + sub, "nested sections are not supported");
      apply_key(cfg, key + "." + sub, leaf.data());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", fmt::format("cannot open '{}'", path.string()));
  return parse_config(in, path.stem().string());
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& entry : preset_table()) out.push_back(entry.first);
  return out;
}

RunConfig preset(const std::string& name) {
  const auto it = preset_table().find(name);
  if (it == preset_table().end()) {
    throw ConfigError("--preset", fmt::format("unknown preset '{}'", name));
  }
  std::istringstream in(it->second);
  return parse_config(in, name);
}

RunConfig resolve_config(const std::string& spec) {
  if (preset_table().count(spec)) return preset(spec);
  return load_config(spec);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json("auto");
  };
  ordered_json coefficient = {{"spec", cfg.coefficient.describe()}};
  if (cfg.coefficient.builtin.empty()) {
    coefficient["expr"] = cfg.coefficient.expression;
  } else {
    coefficient["builtin"] = cfg.coefficient.builtin;
    coefficient["c"] = cfg.coefficient.c;
    coefficient["p"] = cfg.coefficient.p;
    coefficient["beta"] = cfg.coefficient.beta;
  }
  ordered_json initial = {{"kind", to_string(cfg.initial.kind)}};
  switch (cfg.initial.kind) {
    case InitialKind::cosine: initial["amplitude"] = cfg.initial.amplitude; break;
    case InitialKind::pam:
      initial["q"] = opt(cfg.initial.q);
      initial["delta"] = opt(cfg.initial.delta);
      break;
    case InitialKind::samples:
      initial["file"] = cfg.initial.file;
      initial["field"] = cfg.initial.field;
      break;
    case InitialKind::constant: break;
  }
  return ordered_json{
      {"name", cfg.name},
      {"mass", cfg.mass},
      {"coefficient", coefficient},
      {"initial", initial},
      {"solver",
       {{"formulation", to_string(cfg.formulation)},
        {"t_max", cfg.t_max},
        {"dt_init", cfg.dt_init},
        {"dt_max", cfg.effective_dt_max()}}},
      {"grid", {{"n", cfg.n}, {"ny", cfg.ny}}},
      {"output", {{"interval", cfg.effective_interval()}, {"every", cfg.output_every}}},
      {"design", {{"theta", cfg.theta}, {"alpha", opt(cfg.alpha)}}},
      {"tolerance",
       {{"touchdown", cfg.touchdown},
        {"target_change", cfg.target_change},
        {"newton", cfg.newton_tolerance}}},
  };
}

}  // namespace qsp
