#pragma once

#include <string>
#include <vector>

#include "resonia/config.hpp"
#include "resonia/width.hpp"

namespace resonia {

struct CriterionResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    WidthReport width;
    bool all_pass = false;
    bool numerical_failure = false;
    std::string failure_note;
};

// Runs the full acceptance pipeline on a configuration. Criteria that fail
// numerically are recorded (pipeline continues where stages are independent).
VerifyReport run_verify(const RunConfig& cfg);

// Radial-reduction ladder for 2D radial potentials (flagged path): the
// angular-momentum-zero half-line problem with Dirichlet wall at r = 0.
WidthReport run_width_ladder_radial(const PotentialSpec& spec2d, const WidthOptions& opt);

}  // namespace resonia
