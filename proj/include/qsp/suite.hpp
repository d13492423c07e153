#pragma once

#include <cstdint>
#include <vector>

#include "qsp/coefficient.hpp"
#include "qsp/diagnostics.hpp"
#include "qsp/transform.hpp"

namespace qsp {

/// Positive profile 1/M (1 + sum_k a_k cos(k pi y / M)) with random a_k,
/// rescaled to unit integral.
FieldF random_fourier_profile(double mass, Index ny, std::uint64_t seed, int modes = 8);

/// Both inequalities of the E1 / L1-norm bounds on `count` random profiles.
CheckVerdict lemma4_random_suite(const Potentials& p, double mass, int count, Index ny,
                                 std::uint64_t seed);

/// Majorant checks for a coefficient with integrable tail: pointwise
/// domination, concavity, surrogate growth bound.
CheckVerdict majorant_suite(const Coefficient& c);

/// Classification, majorant, random-profile and preset checks on the builtin
/// coefficients. Short horizons keep it under a few seconds.
std::vector<CheckVerdict> validate_builtins();

}  // namespace qsp
