#pragma once

// Young integral F(t) = int_0^t H(s) dX(s) of an operator-valued path H
// against a Holder driver X, as left-point Riemann sums on the common grid:
//
//     F(t_k) = sum_{i<k} H(t_i) [X(t_{i+1}) - X(t_i)].
//
// Requires alpha + gamma > 1 (Holder exponents of H and X).  The certified
// local defect obeys
//
//     |F(t) - F(s) - H(s)(X(t) - X(s))| <=
//         K_{alpha+gamma} H_alpha(H) H_gamma(X) (t-s)^{alpha+gamma}
//
// with the dyadic-refinement sewing constant K_theta = (1 - 2^{1-theta})^{-1}.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rough_mild/paths.hpp"

namespace rough_mild {

// Linear map from noise-space elements to state-space elements, applied
// lazily (never materialized as a matrix).
using LinearOp = std::function<SpectralElement(const SpectralElement&)>;

struct OperatorPath {
    std::vector<double> times;   // common grid with the driver
    std::vector<LinearOp> ops;   // operator at each grid point
    // Grid indices where the operator genuinely changes.  A path resampled
    // piecewise-constantly from a coarser grid keeps its Holder data at the
    // coarse nodes; seminorm measurement is restricted to these.  Empty
    // means "all nodes".
    std::vector<std::size_t> native_nodes;
    ScaleIndex input_scale{0.0};
    ScaleIndex output_scale{0.0};
    double holder_exponent_hint = 1.0;

    std::size_t size() const { return times.size(); }
    void validate() const;
    // randomized linearity probe of every native operator
    bool probe_linear(int n_modes, std::uint64_t seed, double tol = 1e-10) const;
};

// Constant-in-time operator path over the given grid.
OperatorPath constant_operator_path(std::vector<double> times, LinearOp op,
                                    ScaleIndex input_scale = {0.0},
                                    ScaleIndex output_scale = {0.0});

// (1 - 2^{1-theta})^{-1}, theta > 1.
double sewing_constant(double theta);

// Randomized linearity probe: op(a x + b y) = a op(x) + b op(y) within tol.
bool probe_linearity(const LinearOp& op, int n_modes, std::uint64_t seed,
                     double tol = 1e-10, int trials = 8);

// Left-point Riemann sum over a partition given as increasing grid indices.
// A single-index partition is the empty sum.
SpectralElement riemann_sum(const OperatorPath& H, const SampledPath& X,
                            std::span<const std::size_t> partition);

struct YoungResult {
    SampledPath path;              // F on the driver grid, F(t_0) = 0
    double error_estimate = 0.0;   // K H_gamma(X) H_alpha(H) mesh^{alpha+gamma-1} T
    double constant_used = 0.0;    // K_{alpha+gamma}
    double driver_seminorm = 0.0;  // measured H_gamma(X)
    double operator_seminorm = 0.0;  // measured H_alpha(H) (probe-based estimate)
};

// Full-grid integral with the certified residual estimate.  Throws
// AdmissibilityError when alpha + gamma <= 1 and GridIncompatibilityError
// when H and X do not share a grid.
YoungResult young_integral(const OperatorPath& H, const SampledPath& X,
                           double alpha, double gamma);

// Measured Holder seminorm of the operator path in the subordinate norm,
// estimated by applying operator increments to basis and random probe
// vectors.  alpha in (0, 1].
double operator_holder_seminorm(const OperatorPath& H, double alpha,
                                int n_modes, std::uint64_t seed = 0x6b796f756eULL);

}  // namespace rough_mild
