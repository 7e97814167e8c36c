#include "rough_mild/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rough_mild/detail/numerics.hpp"
#include "rough_mild/rng.hpp"

namespace rough_mild {

void SolverConfig::validate() const {
    conv.validate();
    if (!(theta > 0.0 && theta < 1.0))
        throw AdmissibilityError("solver config: theta in (0,1) required");
    if (!(picard_tol > 0.0))
        throw AdmissibilityError("solver config: picard_tol > 0 required");
    if (max_picard_iters < 2)
        throw AdmissibilityError("solver config: max_picard_iters >= 2 required");
    if (window_grid_depth < 1)
        throw AdmissibilityError("solver config: window_grid_depth >= 1 required");
    if (!(conv.gamma + conv.kappa > 1.0))
        throw AdmissibilityError("solver config: gamma + kappa > 1 required");
}

double window_norm(const SampledPath& diff, double kappa, ScaleIndex delta) {
    double sup = 0.0;
    for (const auto& v : diff.values) sup = std::max(sup, norm_alpha(delta, v));
    return holder_seminorm(diff, kappa, delta).seminorm + sup;
}

namespace {

SampledPath path_difference(const SampledPath& a, const SampledPath& b) {
    if (a.times != b.times)
        throw GridIncompatibilityError("path difference: grids differ");
    SampledPath d;
    d.times = a.times;
    d.scale = a.scale;
    d.values.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        d.values.push_back(a.values[i] - b.values[i]);
    return d;
}

// kappa < min(gamma + rho - delta, 1); the regularity window the fixed-point
// construction needs, surfaced as a config-level precondition.
void check_regularity_window(const SolverConfig& cfg, const RoughOperator& B) {
    const double cap = std::min(cfg.conv.gamma + B.output_scale.alpha - cfg.conv.delta, 1.0);
    if (!(cfg.conv.kappa > 0.0 && cfg.conv.kappa < cap))
        throw AdmissibilityError("solver: kappa < min(gamma + rho - delta, 1) violated");
}

// Estimate of the subordinate norm of B(y): max over normalized probe
// directions in the noise scale.
double operator_norm_estimate(const RoughOperator& B, const SpectralElement& y,
                              int n_modes, std::uint64_t seed = 0x726f5f6eULL) {
    const LinearOp op = B.apply(y);
    double best = 0.0;
    GaussianStream g(seed);
    auto push = [&](SpectralElement v) {
        const double nu = norm_alpha(B.noise_scale, v);
        if (nu == 0.0) return;
        v *= 1.0 / nu;
        best = std::max(best, norm_alpha(B.output_scale, op(v)));
    };
    for (int k = 1; k <= n_modes; ++k) push(SpectralElement::basis(n_modes, k));
    for (int r = 0; r < 4; ++r) {
        SpectralElement v = SpectralElement::zero(n_modes);
        for (int i = 0; i < n_modes; ++i) v.coeffs[static_cast<std::size_t>(i)] = g.next();
        push(std::move(v));
    }
    return best;
}

// Measured C in H_kappa(S(X)) <= C H_gamma(X): the output/input seminorm
// ratio of the linear convolution on a coarse probe grid.  Falls back to 1
// when the driver is degenerate or the probe fails to converge.
double calibrate_output_constant(const SampledPath& X, double driver_seminorm,
                                 const SolverConfig& cfg) {
    if (driver_seminorm <= 0.0) return 1.0;
    try {
        SampledDriver driver(X);
        const double T = X.horizon();
        const int probe_depth = 3;
        std::vector<double> times;
        for (int i = 0; i <= (1 << probe_depth); ++i)
            times.push_back(T * static_cast<double>(i) / (1 << probe_depth));
        DyadicConvolutionConfig probe_cfg = cfg.conv;
        probe_cfg.fixed_level.reset();
        const auto result = convolve_path(driver, times, probe_cfg);
        const double hk =
            holder_seminorm(result.path, cfg.conv.kappa, ScaleIndex{cfg.conv.delta}).seminorm;
        const double c = hk / driver_seminorm;
        return (std::isfinite(c) && c > 0.0) ? c : 1.0;
    } catch (const NonConvergenceError&) {
        return 1.0;
    } catch (const GridIncompatibilityError&) {
        return 1.0;
    }
}

double dyadic_fraction_at_most(double horizon, double cap) {
    double tau = horizon;
    while (tau > cap) tau *= 0.5;
    return tau;
}

// Everything the radius/step formulas consume, measured once per window.
struct BallInputs {
    double h_gamma = 0.0;      // H_gamma(X; U)
    double output_C = 1.0;     // calibrated H_kappa(S(X)) / H_gamma(X)
    double young_K = 0.0;      // sewing_constant(gamma + kappa)
    double y_norm_dk = 0.0;    // |y|_{delta+kappa}
    double y_norm_d = 0.0;     // |y|_delta
    double b_norm = 0.0;       // estimated |B(y)|
};

BallInputs measure_ball_inputs(const SpectralElement& y0, const SampledPath& X,
                               const RoughOperator& B, const SolverConfig& cfg) {
    BallInputs in;
    in.h_gamma = holder_seminorm(X, cfg.conv.gamma, B.noise_scale).seminorm;
    in.output_C = calibrate_output_constant(X, in.h_gamma, cfg);
    in.young_K = sewing_constant(cfg.conv.gamma + cfg.conv.kappa);
    in.y_norm_dk = norm_alpha(ScaleIndex{cfg.conv.delta + cfg.conv.kappa}, y0);
    in.y_norm_d = norm_alpha(ScaleIndex{cfg.conv.delta}, y0);
    in.b_norm = operator_norm_estimate(B, y0, y0.n_modes());
    return in;
}

double ball_radius_from(const BallInputs& in, double theta) {
    const double c_kappa = 1.0;
    return (c_kappa * in.y_norm_dk + in.output_C * in.h_gamma * in.b_norm) /
           (1.0 - theta);
}

}  // namespace

BallParameters ball_parameters(const SpectralElement& y0, const SampledPath& X,
                               const RoughOperator& B, double theta,
                               const SolverConfig& cfg) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("ball_parameters: theta in (0,1) required");
    cfg.conv.validate();
    X.validate();

    const double kappa = cfg.conv.kappa;
    const double horizon = X.horizon();
    const double grid_dt = X.times[1] - X.times[0];

    const BallInputs in = measure_ball_inputs(y0, X, B, cfg);
    const double h_gamma = in.h_gamma;
    const double K = in.young_K;
    const double C = in.output_C;
    const double y_norm_d = in.y_norm_d;

    BallParameters out;
    out.theta = theta;
    out.radius = ball_radius_from(in, theta);

    if (h_gamma == 0.0) {
        out.tau = dyadic_fraction_at_most(horizon, std::min(1.0, horizon));
        return out;
    }

    const double budget = theta / ((1.0 + K) * C * h_gamma);
    if (B.global_M_B) {
        // tau^kappa = theta / ((1+K) M_B C H), independent of y0
        const double tau_raw = std::pow(budget / *B.global_M_B, 1.0 / kappa);
        double tau = dyadic_fraction_at_most(horizon, std::min(1.0, horizon));
        while (tau > tau_raw && tau > grid_dt) tau *= 0.5;
        if (tau > tau_raw)
            throw StepTooSmallError("ball_parameters: no admissible tau above grid resolution");
        out.tau = tau;
        return out;
    }

    // monotone bisection over dyadic fractions of the horizon
    double tau = dyadic_fraction_at_most(horizon, std::min(1.0, horizon));
    while (tau >= grid_dt) {
        const double lhs =
            B.bound_M_B(y_norm_d + out.radius * std::pow(tau, kappa)) * std::pow(tau, kappa);
        if (lhs <= budget) {
            out.tau = tau;
            return out;
        }
        tau *= 0.5;
    }
    throw StepTooSmallError("ball_parameters: no admissible tau above grid resolution");
}

SampledPath gamma_map(const SampledPath& Y, const SampledPath& X_window,
                      const SpectralElement& y0, const RoughOperator& B,
                      const SolverConfig& cfg,
                      const std::optional<DriftTerm>& drift) {
    cfg.validate();
    check_regularity_window(cfg, B);
    Y.validate();
    X_window.validate();

    const std::size_t coarse_cells = Y.size() - 1;
    const std::size_t fine_cells = X_window.size() - 1;
    if (fine_cells % coarse_cells != 0)
        throw GridIncompatibilityError("gamma_map: fine grid does not refine the coarse grid");
    const std::size_t stride = fine_cells / coarse_cells;

    // Operator path B(Y(.)) on the fine grid, constant on each coarse cell.
    OperatorPath H;
    H.times = X_window.times;
    H.ops.resize(X_window.size());
    H.input_scale = B.noise_scale;
    H.output_scale = B.output_scale;
    H.holder_exponent_hint = cfg.conv.kappa;
    for (std::size_t i = 0; i < coarse_cells; ++i) {
        const LinearOp op = B.apply(Y.values[i]);
        for (std::size_t j = i * stride; j < (i + 1) * stride; ++j) H.ops[j] = op;
        H.native_nodes.push_back(i * stride);
    }
    H.ops[fine_cells] = B.apply(Y.values[coarse_cells]);
    H.native_nodes.push_back(fine_cells);

    const YoungResult Z = young_integral(H, X_window, cfg.conv.kappa, cfg.conv.gamma);

    // S(Z) at the coarse times, then the flow of the initial value.
    SampledDriver z_driver(Z.path);
    const ConvolutionResult conv = convolve_path(z_driver, Y.times, cfg.conv);

    SampledPath out;
    out.times = Y.times;
    out.scale = ScaleIndex{cfg.conv.delta};
    out.values.reserve(Y.size());
    for (std::size_t i = 0; i < Y.size(); ++i)
        out.values.push_back(semigroup_apply(Y.times[i], y0) + conv.path.values[i]);

    if (drift) {
        // per-cell Gauss-Legendre of int_0^{t_i} S(t_i - s) F(Y(s)) ds with Y
        // interpolated linearly between coarse nodes
        const auto rule = detail::gauss_legendre(4);
        const int n_modes = y0.n_modes();
        std::vector<SpectralElement> f_nodes;   // F at quadrature nodes, cellwise
        std::vector<double> s_nodes, w_nodes;
        for (std::size_t i = 1; i < Y.size(); ++i) {
            // extend node/value tables over cell [t_{i-1}, t_i]
            std::vector<double> ns, ws;
            detail::map_rule(rule, Y.times[i - 1], Y.times[i], ns, ws);
            for (std::size_t q = 0; q < ns.size(); ++q) {
                const double lam_t = (ns[q] - Y.times[i - 1]) / (Y.times[i] - Y.times[i - 1]);
                SpectralElement y_interp =
                    (1.0 - lam_t) * Y.values[i - 1] + lam_t * Y.values[i];
                f_nodes.push_back(drift->apply(y_interp));
                s_nodes.push_back(ns[q]);
                w_nodes.push_back(ws[q]);
            }
            // accumulate the full integral for t_i over all nodes so far
            SpectralElement acc = SpectralElement::zero(n_modes);
            for (std::size_t q = 0; q < s_nodes.size(); ++q) {
                for (int m = 0; m < n_modes; ++m) {
                    const double lam = eigenvalue(m + 1);
                    acc.coeffs[static_cast<std::size_t>(m)] +=
                        w_nodes[q] * std::exp(-lam * (Y.times[i] - s_nodes[q])) *
                        f_nodes[q].coeffs[static_cast<std::size_t>(m)];
                }
            }
            out.values[i] += acc;
        }
    }

    out.validate();
    return out;
}

namespace {

struct WindowOutcome {
    bool success = false;
    bool nonconvergent_scheme = false;
    SampledPath solution;  // coarse window path (window-local times)
    double contraction = 0.0;
    int iters = 0;
};

WindowOutcome solve_window(const SpectralElement& y_start, const SampledPath& Xw,
                           const RoughOperator& B,
                           const std::optional<DriftTerm>& drift,
                           const SolverConfig& cfg) {
    WindowOutcome out;
    const std::size_t fine_cells = Xw.size() - 1;
    std::size_t coarse_cells = std::size_t{1} << cfg.window_grid_depth;
    while (coarse_cells > 1 && fine_cells % coarse_cells != 0) coarse_cells /= 2;
    if (fine_cells % coarse_cells != 0) return out;

    const std::size_t stride = fine_cells / coarse_cells;
    SampledPath Y;
    Y.scale = ScaleIndex{cfg.conv.delta};
    for (std::size_t i = 0; i <= coarse_cells; ++i) {
        Y.times.push_back(Xw.times[i * stride]);
        Y.values.push_back(cfg.initial_guess == PicardInitialGuess::semigroup_flow
                               ? semigroup_apply(Xw.times[i * stride], y_start)
                               : y_start);
    }

    double prev_diff = -1.0;
    double factor = 0.0;
    for (int k = 0; k < cfg.max_picard_iters; ++k) {
        SampledPath next;
        try {
            next = gamma_map(Y, Xw, y_start, B, cfg, drift);
        } catch (const NonConvergenceError&) {
            out.nonconvergent_scheme = true;
            return out;
        }
        const double diff =
            window_norm(path_difference(next, Y), cfg.conv.kappa, ScaleIndex{cfg.conv.delta});
        Y = std::move(next);
        out.iters = k + 1;
        if (prev_diff > 1e4 * std::numeric_limits<double>::epsilon())
            factor = std::max(factor, diff / prev_diff);
        if (diff < cfg.picard_tol) {
            out.success = factor < 1.0;
            out.contraction = factor;
            out.solution = std::move(Y);
            return out;
        }
        prev_diff = diff;
    }
    out.contraction = factor;
    return out;  // max_picard_iters exhausted
}

}  // namespace

SolveReport picard_solve(const SpectralElement& y0, const SampledPath& X,
                         const RoughOperator& B, double horizon,
                         const std::optional<DriftTerm>& drift,
                         const SolverConfig& cfg) {
    cfg.validate();
    check_regularity_window(cfg, B);
    X.validate();
    if (!X.is_uniform())
        throw GridIncompatibilityError("picard_solve: driver must be uniformly sampled");
    const std::size_t master_cells = X.size() - 1;
    if ((master_cells & (master_cells - 1)) != 0)
        throw GridIncompatibilityError("picard_solve: driver cell count must be a power of two");
    if (horizon > X.horizon() * (1.0 + 1e-12))
        throw std::invalid_argument("picard_solve: horizon exceeds driver coverage");

    const double dt = X.times[1] - X.times[0];
    SolveReport report;
    report.solution.scale = ScaleIndex{cfg.conv.delta};
    report.solution.times.push_back(0.0);
    report.solution.values.push_back(y0);

    SpectralElement y_window = y0;
    double w = 0.0;
    std::size_t w_idx = 0;
    std::optional<double> reusable_tau;  // kept across windows when M_B is global

    while (w < horizon * (1.0 - 1e-12)) {
        const double remaining = horizon - w;
        double tau;
        if (cfg.forced_tau) {
            tau = std::min(*cfg.forced_tau, remaining);
        } else if (reusable_tau && *reusable_tau <= remaining) {
            tau = *reusable_tau;
        } else {
            tau = dyadic_fraction_at_most(X.horizon(), std::min(1.0, remaining));
        }

        bool window_done = false;
        double ball_radius = 0.0;
        for (int retry = 0; retry <= cfg.max_tau_retries && !window_done; ++retry) {
            const std::size_t tau_cells = static_cast<std::size_t>(
                std::nearbyint(tau / dt));
            if (tau_cells < 2 || tau_cells > master_cells - w_idx) {
                tau *= 0.5;
                continue;
            }

            // window slice of the driver, rebased to 0
            SampledPath Xw;
            Xw.scale = X.scale;
            Xw.times.reserve(tau_cells + 1);
            Xw.values.reserve(tau_cells + 1);
            for (std::size_t i = 0; i <= tau_cells; ++i) {
                Xw.times.push_back(dt * static_cast<double>(i));
                Xw.values.push_back(X.values[w_idx + i]);
            }

            SolverConfig wcfg = cfg;
            if (cfg.tau_from_ball_formula && !cfg.forced_tau) {
                try {
                    const BallParameters ball =
                        ball_parameters(y_window, Xw, B, cfg.theta, cfg);
                    ball_radius = ball.radius;
                    if (ball.tau < tau) {
                        tau = ball.tau;
                        continue;
                    }
                } catch (const StepTooSmallError&) {
                    report.exploded = true;
                    report.final_time = w;
                    report.holder_kappa_seminorm = report.solution.size() >= 2
                        ? holder_seminorm(report.solution, cfg.conv.kappa,
                                          ScaleIndex{cfg.conv.delta}).seminorm
                        : 0.0;
                    return report;
                }
            } else {
                // diagnostic only; the a-posteriori controller decides the step
                ball_radius =
                    ball_radius_from(measure_ball_inputs(y_window, Xw, B, cfg), cfg.theta);
            }

            WindowOutcome outcome = solve_window(y_window, Xw, B, drift, wcfg);
            const bool acceptable =
                outcome.success && outcome.contraction < cfg.theta;
            if (acceptable || (outcome.success && cfg.forced_tau)) {
                WindowRecord rec;
                rec.start = w;
                rec.end = w + tau;
                rec.radius = ball_radius;
                rec.tau = tau;
                rec.contraction_factor = outcome.contraction;
                rec.picard_iters = outcome.iters;
                report.windows.push_back(rec);

                for (std::size_t i = 1; i < outcome.solution.size(); ++i) {
                    report.solution.times.push_back(w + outcome.solution.times[i]);
                    report.solution.values.push_back(outcome.solution.values[i]);
                }
                y_window = outcome.solution.values.back();
                w += tau;
                w_idx += tau_cells;
                if (B.global_M_B && !cfg.forced_tau) reusable_tau = tau;
                window_done = true;
            } else {
                tau *= 0.5;
            }
        }

        if (!window_done) {
            report.exploded = true;
            break;
        }
    }

    report.final_time = w;
    if (report.solution.size() >= 2) {
        report.solution.validate();
        report.holder_kappa_seminorm =
            holder_seminorm(report.solution, cfg.conv.kappa, ScaleIndex{cfg.conv.delta})
                .seminorm;
    }
    return report;
}

ItoProbeResult ito_map_probe(const SampledPath& X1, const SampledPath& X2,
                             const SpectralElement& y0, const RoughOperator& B,
                             const SolverConfig& cfg) {
    ItoProbeResult out;
    const SampledPath diff_x = path_difference(X1, X2);
    const double h_gamma_diff =
        holder_seminorm(diff_x, cfg.conv.gamma, B.noise_scale).seminorm;
    if (h_gamma_diff == 0.0) {
        out.degenerate = true;
        return out;
    }

    // identical discretization for both solves
    SolverConfig fixed = cfg;
    if (!fixed.forced_tau)
        fixed.forced_tau = std::min(1.0, X1.horizon());
    if (!fixed.conv.fixed_level) {
        const std::size_t cells = X1.size() - 1;
        int depth = 0;
        while ((std::size_t{1} << (depth + 1)) <= cells) ++depth;
        fixed.conv.fixed_level =
            std::max(1, std::min(cfg.conv.max_level, depth - fixed.window_grid_depth));
    }

    const SolveReport r1 = picard_solve(y0, X1, B, X1.horizon(), std::nullopt, fixed);
    const SolveReport r2 = picard_solve(y0, X2, B, X2.horizon(), std::nullopt, fixed);
    if (r1.exploded || r2.exploded)
        throw NonConvergenceError("ito_map_probe: a solve exploded", {});

    const SampledPath diff_y = path_difference(r1.solution, r2.solution);
    const double h_kappa_diff =
        holder_seminorm(diff_y, cfg.conv.kappa, ScaleIndex{cfg.conv.delta}).seminorm;
    out.ratio = h_kappa_diff / h_gamma_diff;
    return out;
}

HypothesisProbeReport probe_hypothesis(const RoughOperator& B, int n_modes,
                                       double radius, ScaleIndex delta,
                                       int trials, std::uint64_t seed) {
    HypothesisProbeReport rep;
    GaussianStream g(seed);
    const auto rule = detail::gauss_legendre(64);

    auto random_in_ball = [&](double r) {
        SpectralElement v = SpectralElement::zero(n_modes);
        for (int i = 0; i < n_modes; ++i) v.coeffs[static_cast<std::size_t>(i)] = g.next();
        const double nrm = norm_alpha(delta, v);
        if (nrm > 0.0) v *= r / nrm;
        return v;
    };

    for (int trial = 0; trial < trials; ++trial) {
        const SpectralElement y = random_in_ball(radius * 0.8);
        const SpectralElement yp = random_in_ball(radius * 0.8);
        const SpectralElement z = random_in_ball(1.0);
        SpectralElement x = random_in_ball(1.0);
        const double xn = norm_alpha(B.noise_scale, x);
        if (xn > 0.0) x *= 1.0 / xn;

        // mean-value identity by quadrature over the segment [y, y']
        const SpectralElement lhs = B.apply(yp)(x) - B.apply(y)(x);
        const SpectralElement dy = yp - y;
        SpectralElement rhs = SpectralElement::zero(n_modes);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double tq = 0.5 * (rule.nodes[q] + 1.0);
            const double wq = 0.5 * rule.weights[q];
            rhs += wq * B.derivative(y + tq * dy, dy, x);
        }
        const double res = norm_alpha(B.output_scale, lhs - rhs) /
                           std::max(1.0, norm_alpha(B.output_scale, lhs));
        rep.max_mean_value_residual = std::max(rep.max_mean_value_residual, res);

        // Holder bound on the derivative
        const SpectralElement dlhs = B.derivative(yp, z, x) - B.derivative(y, z, x);
        const double denom = B.bound_M_C(radius) *
                             std::pow(norm_alpha(delta, dy), B.epsilon) *
                             norm_alpha(delta, z);
        if (denom > 0.0) {
            const double ratio = norm_alpha(B.output_scale, dlhs) / denom;
            rep.max_derivative_ratio = std::max(rep.max_derivative_ratio, ratio);
        }
    }
    rep.passed = rep.max_mean_value_residual <= 1e-6 && rep.max_derivative_ratio <= 1.0;
    return rep;
}

}  // namespace rough_mild
