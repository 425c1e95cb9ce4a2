#pragma once

#include <string>
#include <vector>

#include "xlalign/bitext.hpp"

namespace xlalign {

/// Independent transcription of grow-diag-final-and over dense boolean
/// matrices. Kept deliberately separate from symmetrize_gdfa: it is the
/// oracle the production code is checked against, in selftest and in the
/// acceptance suite.
AlignmentSet gdfa_reference(const AlignmentSet& forward, const AlignmentSet& backward);

struct CheckResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0; // worst relative error or residual observed
    std::string detail;
};

/// Built-in verification battery: analytic-vs-numeric gradient checks for
/// every differentiable objective, the orthogonality fixed-point iteration,
/// and GDFA equivalence against gdfa_reference on random cases.
/// break_op, when non-empty, perturbs the named op's analytic gradient so
/// the negative path is exercisable (used by `selftest --break`).
std::vector<CheckResult> run_selfchecks(const std::string& break_op = "");

} // namespace xlalign
