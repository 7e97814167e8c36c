#pragma once

// Plain-text `key = value` run configuration.  The keys are the
// RegularityBudget and NoiseSpec field names; numerics keys (tol, max_level,
// beta, theta, picard_tol, max_picard_iters, window_grid_depth,
// output_depth) are optional and default sensibly.  `#` starts a comment.

#include <iosfwd>
#include <string>

#include "rough_mild/fbm.hpp"
#include "rough_mild/heat.hpp"

namespace rough_mild {

struct RunConfig {
    NoiseSpec noise;
    RegularityBudget budget;
    SolverConfig solver;
    int output_depth = 5;

    // mirror the budget exponents into the convolution config
    void sync() ;
};

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::string& path);

// ROUGH_MILD_SEED, when set, overrides the configured seed.
void apply_env_seed_override(RunConfig& cfg);

}  // namespace rough_mild
