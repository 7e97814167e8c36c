#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rough_mild {

// A requested time is not resolvable on the driver's dyadic grid, or a
// refinement level exceeds the available resolution.
class GridIncompatibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A regularity/admissibility precondition failed (Young condition
// alpha + gamma > 1, config window violations, ...).
class AdmissibilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The dyadic scheme did not reach the requested tolerance within the level
// budget.  Carries the observed per-level increment norms for diagnosis.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> increments)
        : std::runtime_error(what), level_increments(std::move(increments)) {}

    std::vector<double> level_increments;
};

// No admissible step size remains above the grid resolution: the solve is
// treated as exploded at the current window start.
class StepTooSmallError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rough_mild
