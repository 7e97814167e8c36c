#pragma once

// The concrete applications: admissibility arithmetic for the exponent
// budget, the additive linear solve Y = S(X) driven by cylindrical fBm
// noise, and two nonlinear coefficient operators on the spectral grid:
//
//   Nemytskii   [B(u) phi](x) = sigma(u(x)) phi(x)   (pseudo-spectral:
//               evaluate on the collocation grid, multiply, project back)
//   rank-one    B(w) x = ( int_0^1 sigma(w) phi dx ) c_1(x) e_1
//               (globally Lipschitz, so solves extend to any horizon)

#include <iosfwd>
#include <optional>
#include <string>

#include "rough_mild/fbm.hpp"
#include "rough_mild/solver.hpp"

namespace rough_mild {

struct RegularityBudget {
    double H = 0.75;      // Hurst index of the driving noise
    double mu = 0.1;      // spatial decay index of the noise coefficients
    double gamma = 0.72;  // time Holder exponent granted to the driver
    double alpha = 0.15;  // driver scale deficit (X in B_{-alpha})
    double delta = 0.2;   // state space B_delta
    double kappa = 0.31;  // time Holder exponent of the solution
    double rho = -0.15;   // output scale of B (the heat case takes rho = -alpha)
    double p = 6.0;       // Sobolev integrability exponents of the admissibility
    double p_hat = 1.1;   //   arithmetic (recorded verbatim; computations are l2)
};

struct ConditionReport {
    bool scale_shift = false;       // alpha < gamma
    bool delta_window = false;      // 0 < delta < gamma - alpha
    bool kappa_window = false;      // 0 < kappa < min(gamma - alpha - delta, 1)
    bool young_time = false;        // gamma + kappa > 1
    bool kappa_rho_window = false;  // 0 < kappa < min(gamma + rho - delta, 1)
    bool noise_time_window = false;   // gamma < H
    bool noise_scale_window = false;  // mu < alpha < 1
    bool linear_mu = false;           // mu < 2H (strict)
    bool linear_gap = false;          // 0 < delta < 2H - mu and 2 kappa < 2H - mu - delta
    bool nonlinear_gap = false;       // 2 kappa < 2H - mu - delta
    bool nonlinear_time = false;      // H + kappa > 1
    bool sobolev_p_hat = false;       // p_hat < 1 / (1 - alpha)
    bool sobolev_p = false;           // p > 1 / delta

    bool linear_solvable = false;
    bool nonlinear_solvable = false;
};

// Pure arithmetic on the budget; every verdict is reproducible from the
// record alone.
ConditionReport check_conditions(const RegularityBudget& budget);

void print_condition_report(std::ostream& os, const ConditionReport& report);

struct ScalarNonlinearity {
    std::function<double(double)> sigma;
    std::function<double(double)> sigma_prime;
    std::function<double(double)> sigma_second;
    double sup_sigma = 0.0;
    double sup_sigma_prime = 0.0;
    double sup_sigma_second = 0.0;
    std::string name;

    // finite-difference consistency of sigma_prime at step 1e-5
    bool validate_derivatives(std::uint64_t seed, int trials = 64) const;
};

ScalarNonlinearity sigma_sin();
ScalarNonlinearity sigma_tanh();
ScalarNonlinearity sigma_constant(double c);
// c0 + c1 v + c2 v^2; sup bounds taken over the working range |v| <= 10
ScalarNonlinearity sigma_poly(double c0, double c1, double c2);
// "sin" | "tanh" | "poly:c0,c1,c2"
ScalarNonlinearity parse_sigma(const std::string& text);

// Pointwise multiplication operator on the collocation grid x_j = j/M.
// noise/output scale are both -alpha (the driver's space); the bounds use
// the truncated embedding constants
//   E_delta = sqrt(2 sum_{n<=N} lambda_n^{-2 delta}),   lambda_N^alpha,
// which are finite at any truncation and flagged as truncation-dependent.
RoughOperator nemytskii_operator(const ScalarNonlinearity& sigma, int grid_cells,
                                 int n_modes, double delta, double alpha);

// B(w) x = (int sigma(w) phi) c_1(x) e_1 with global_M_B =
// sup|sigma'| |phi|_{L2} lambda_1^{-delta}.
RoughOperator rank_one_operator(const ScalarNonlinearity& sigma,
                                const SpectralElement& phi, double delta,
                                double alpha);

// Additive linear solve Y(t) = S(X)(t) (null initial condition) on the
// dyadic output grid of the given depth.
SolveReport solve_linear_heat(const NoiseSpec& spec, const RegularityBudget& budget,
                              const DyadicConvolutionConfig& cfg,
                              int output_depth = 5);
// Same with an injected driver (deterministic surrogates in tests).
SolveReport solve_linear_driver(const ConvolutionDriver& X,
                                const RegularityBudget& budget,
                                const DyadicConvolutionConfig& cfg,
                                int output_depth = 5);

// End-to-end nonlinear solve: generates the field, wires the Nemytskii
// operator with rho = -alpha into picard_solve, null initial condition.
// Throws AdmissibilityError when check_conditions rejects the budget.
SolveReport solve_nonlinear_heat(const NoiseSpec& spec,
                                 const ScalarNonlinearity& sigma,
                                 const RegularityBudget& budget,
                                 const SolverConfig& cfg, double horizon);

// run_meta sidecar: windows (R, tau, contraction, iters), explosion flag and
// the Hilbert-scale note with the recorded Sobolev verdicts.
void write_run_meta(std::ostream& os, const SolveReport& report,
                    const RegularityBudget& budget);

}  // namespace rough_mild
