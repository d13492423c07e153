#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsp/config.hpp"
#include "qsp/diagnostics.hpp"
#include "qsp/regime.hpp"
#include "qsp/solver.hpp"

namespace qsp {

/// Initial data as built from the config, in both coordinates when available.
struct InitialData {
  FieldF f;
  std::optional<FieldU> u;  ///< set for u-based kinds and when f_to_u succeeds
  std::optional<double> q;  ///< moment order, when known
  std::optional<double> delta;
  double m0 = 0.0;          ///< 1 / max f0
  double scale = 1.0;       ///< min(1, min f0); thresholds are relative to it
  std::string note;
};

struct FormulationOutcome {
  Formulation form = Formulation::f_form;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> blowup_time;
  double final_time = 0.0;
  long steps = 0;
  long rejected = 0;
  std::string reason;
  double max_mass_err = 0.0;
};

struct RunSummary {
  std::string name;
  Verdict verdict = Verdict::inconclusive;  ///< of the primary formulation
  std::optional<double> blowup_time;
  double final_time = 0.0;
  RegimeReport regime;
  std::optional<BlowupDesign> design;
  std::optional<std::string> design_error;
  std::vector<DeltaTrial> design_trace;  ///< filled when the search failed
  std::optional<double> lyapunov0;
  InitialData initial;
  std::vector<FormulationOutcome> runs;
  std::vector<CheckVerdict> checks;
  std::optional<double> crossval_gap;  ///< relative L1 gap of u at the final time
  RunConfig config;
  double wall_clock = 0.0;  ///< seconds; kept out of the JSON report

  bool checks_passed() const;
};

struct RunResult {
  RunSummary summary;
  DiagnosticsSeries series;    ///< f-form records
  DiagnosticsSeries series_u;  ///< u-form records (t, dt, u_max, mass_err)
  std::optional<SolverState> final_f;
  std::optional<SolverState> final_u;
};

/// Builds the initial profile; fills the design when pam parameters are "auto".
InitialData build_initial(const RunConfig& cfg, const std::optional<BlowupDesign>& design);

/// Classifies, designs, integrates the requested formulations and runs the
/// applicable check suites. Solver failures end up as an "inconclusive" verdict.
RunResult simulate(const RunConfig& cfg);

/// 0 for completed work, 2 when any formulation was inconclusive.
int exit_status(const RunSummary& summary);

}  // namespace qsp
