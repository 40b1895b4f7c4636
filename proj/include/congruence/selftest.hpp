#pragma once

#include <string>
#include <vector>

#include "congruence/mapanalysis.hpp"

namespace congruence {

struct SelftestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs the bundled invariant suites on the embedded scenes: Gauss-equation
// consistency, the second-fundamental-form derivative identity, Riemann
// symmetries, constant-curvature values, the isotropic-restriction lemma,
// conformal profiles and curvature laws, the isotropic bending limit, and
// end-to-end verdicts.
std::vector<SelftestResult> run_selftest(const AnalysisConfig& config);

}  // namespace congruence
