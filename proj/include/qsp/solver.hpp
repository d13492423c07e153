#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qsp/coefficient.hpp"
#include "qsp/transform.hpp"

namespace qsp {

enum class Formulation { f_form, u_form };
std::string_view to_string(Formulation f);

/// Potential v on the u-grid and its gradient on the N+1 faces.
struct FieldV {
  Vector v;     ///< cell values, discrete mean zero
  Vector dvdx;  ///< face values, zero at both ends
};

/// v'' = M - u with Neumann ends and mean zero, by the flux sweep
/// w_{j+1/2} = w_{j-1/2} + h (M - u_j). Requires |h sum u - M| <= 1e-10 M.
FieldV solve_poisson(const FieldU& u, double mass);
inline FieldV solve_poisson(const FieldU& u) { return solve_poisson(u, u.mass); }

/// Solves a tridiagonal system in place (Thomas algorithm); `rhs` becomes
/// the solution. Sub/super diagonals have size n-1.
void solve_tridiagonal(const Vector& lower, Vector diag, const Vector& upper, Vector& rhs);

struct SolverState {
  Formulation form = Formulation::f_form;
  double t = 0.0;
  double dt = 0.0;
  long steps = 0;
  double mass = 0.0;
  Vector field;  ///< f on [0, M] or u on [0, 1]
  FieldV v;      ///< u-form only

  FieldF as_f() const { return FieldF{field, mass}; }
  FieldU as_u() const { return FieldU{field, mass}; }
};

SolverState make_state(const FieldF& f);
SolverState make_state(const FieldU& u);

/// Raised when a step cannot be completed above the step-size floor.
class NearSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepOptions {
  double newton_tolerance = 1e-12;
  int max_iterations = 40;
  double dt_floor = 1e-14;
};

struct StepResult {
  SolverState state;
  double dt_used = 0.0;
  int halvings = 0;
  int iterations = 0;
};

/// Backward Euler for f_t = (Psi(f))_yy - 1 + M f with Newton on the
/// tridiagonal system; dt is halved on failure.
StepResult step_f(const Potentials& p, const SolverState& s, double dt, const StepOptions& opt = {});

/// Finite-volume step for u_t = (a(u) u_x - u v_x)_x: implicit diffusion with
/// harmonic-mean face coefficients (Picard), explicit upwind drift.
StepResult step_u(const Potentials& p, const SolverState& s, double dt, const StepOptions& opt = {});

enum class Verdict { blowup, global_so_far, inconclusive };
std::string_view to_string(Verdict v);

struct RunOptions {
  double t_max = 1.0;
  double dt_init = 1e-4;
  double dt_max = 1e-2;
  double dt_min = 1e-12;
  double target_change = 0.05;
  double touchdown = 1e-6;   ///< f-form: blowup when min f falls below
  double runaway = 1e6;      ///< u-form: blowup when max u exceeds
  double record_interval = 0.0;  ///< 0 records only at start and end
  long record_every = 0;         ///< also record every n-th step when > 0
  StepOptions step;
};

struct RunOutcome {
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> blowup_time;
  double final_time = 0.0;
  long steps = 0;
  long rejected = 0;
  std::string reason;
  SolverState final_state;
};

/// Called for every recorded state, in time order.
using Observer = std::function<void(const SolverState&)>;

/// Advances to t_max or to a verdict. dt targets `target_change` maximum
/// pointwise relative change per step, halving above twice the target and
/// doubling below half of it.
RunOutcome integrate(const Potentials& p, SolverState s, const RunOptions& opt,
                     const Observer& observe);

}  // namespace qsp
