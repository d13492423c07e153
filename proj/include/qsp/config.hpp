#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsp/coefficient.hpp"
#include "qsp/transform.hpp"

namespace qsp {

/// Names the offending key in its message.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct CoefficientSpec {
  std::string expression;  ///< used when builtin is empty
  std::string builtin;     ///< constant | shifted_power | singular_power
  double c = 1.0;
  double p = 0.0;
  double beta = 0.0;

  Coefficient build() const;
  std::string describe() const;
};

/// "shifted_power(1,-2)", "singular_power(1,2.5,1)", "constant(2)", or an
/// expression in r.
CoefficientSpec parse_coefficient_arg(const std::string& text);

enum class InitialKind { constant, cosine, pam, samples };
enum class FormulationChoice { f, u, both };

struct InitialSpec {
  InitialKind kind = InitialKind::cosine;
  double amplitude = 0.5;
  std::optional<double> q;      ///< empty = from the design
  std::optional<double> delta;  ///< empty = from the delta search
  std::string file;
  std::string field = "u";      ///< samples file holds u or f
};

struct RunConfig {
  std::string name = "run";
  CoefficientSpec coefficient;
  double mass = 1.0;
  InitialSpec initial;
  FormulationChoice formulation = FormulationChoice::f;
  Index n = 400;
  Index ny = 400;
  double t_max = 1.0;
  double dt_init = 1e-4;
  double dt_max = 1e-2;
  std::optional<double> dt_max_h;  ///< dt_max = dt_max_h / n when set
  double output_interval = 0.0;    ///< 0 = t_max / 100
  long output_every = 0;
  double theta = 0.5;
  std::optional<double> alpha;     ///< empty = default scan
  double touchdown = 1e-6;
  double target_change = 0.05;
  double newton_tolerance = 1e-12;
  std::filesystem::path out_dir;

  double effective_dt_max() const;
  double effective_interval() const;
};

/// Sets one dotted key ("mass", "grid.n", "initial.delta", ...).
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);
/// Constraint checks; throws ConfigError naming the key.
void validate(const RunConfig& cfg);

/// Flat-section INI: `key = value`, `[section]` headers, `#`/`;` comments.
RunConfig parse_config(std::istream& in, const std::string& name);
RunConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);
/// Preset when `spec` names one, otherwise a config file.
RunConfig resolve_config(const std::string& spec);

std::string_view to_string(InitialKind k);
std::string_view to_string(FormulationChoice f);

nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace qsp
