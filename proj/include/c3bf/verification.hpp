#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "c3bf/cbf_constraints.hpp"

// Randomized self-checks of the constraint math and the filter. Each suite
// draws a seeded sample set, checks a property against an independent oracle
// (finite differences, closed-form projection, direct geometry), and reports
// the worst observed metric plus a serialized counterexample on failure.

namespace c3bf::verification {

struct SuiteResult {
  std::string name;
  long long samples{0};
  long long failures{0};
  double worst{0};                // the suite metric at its worst observed value
  std::string worst_description;  // what `worst` measures
  std::string counterexample;     // JSON for the first failing sample, else empty

  bool passed() const { return failures == 0; }
};

// Applied to each analytically evaluated constraint before it is checked.
// Tests inject faults here to confirm the suites actually detect them.
using ConstraintTamper = std::function<ConstraintEval(const ConstraintEval&)>;

// Input rows must stay bounded away from zero wherever the constraint is
// defined. worst = minimum |L_g h| seen.
SuiteResult check_lgh_nonvanishing_horizontal(long long samples, std::uint64_t seed);
SuiteResult check_lgh_nonvanishing_vertical(long long samples, std::uint64_t seed);

// Analytic dh/dt along the closed-loop flow against a central finite
// difference. worst = maximum relative error.
SuiteResult check_hdot_finite_difference_horizontal(long long samples, std::uint64_t seed,
                                                    const ConstraintTamper& tamper = {});
SuiteResult check_hdot_finite_difference_vertical(long long samples, std::uint64_t seed,
                                                  const ConstraintTamper& tamper = {});

// Active-set projection against the closed-form switching law on random
// single-constraint instances, including the on-boundary identity when the
// constraint is active. worst = max(component deviation, boundary residual).
SuiteResult check_qp_matches_closed_form(long long samples, std::uint64_t seed);

// Corrections vanish with the constraint margin: zero for psi >= 0 and
// O(|psi|) just below zero. worst = max correction magnitude on the
// near-boundary side.
SuiteResult check_switching_continuity(long long samples, std::uint64_t seed);

// Nonzero corrections are parallel to the input row. worst = max |sin| of the
// angle between the correction and L_g h.
SuiteResult check_correction_direction(long long samples, std::uint64_t seed);

// Every suite with a shared base sample count; the input-row suites run 10x
// the base count. Per-suite seeds are derived from `seed` deterministically.
std::vector<SuiteResult> run_all(long long samples, std::uint64_t seed,
                                 const ConstraintTamper& tamper = {});

}  // namespace c3bf::verification
