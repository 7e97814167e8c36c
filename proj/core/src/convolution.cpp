#include "rough_mild/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "rough_mild/detail/numerics.hpp"

namespace rough_mild {

double DyadicConvolutionConfig::beta_value() const {
    if (beta) return *beta;
    const double lo = 1.0 - gamma;
    const double hi = std::min(1.0 - alpha - delta, 1.0);
    return 0.5 * (lo + hi);
}

void DyadicConvolutionConfig::validate() const {
    if (!(alpha < gamma))
        throw AdmissibilityError("convolution config: alpha < gamma required");
    if (!(delta > 0.0 && delta < gamma - alpha))
        throw AdmissibilityError("convolution config: 0 < delta < gamma - alpha required");
    if (!(kappa > 0.0 && kappa < std::min(gamma - alpha - delta, 1.0)))
        throw AdmissibilityError(
            "convolution config: 0 < kappa < min(gamma - alpha - delta, 1) required");
    const double b = beta_value();
    if (!(b > 1.0 - gamma && b < std::min(1.0 - alpha - delta, 1.0)))
        throw AdmissibilityError(
            "convolution config: beta in (1 - gamma, min(1 - alpha - delta, 1)) required");
    if (max_level < 0) throw AdmissibilityError("convolution config: max_level >= 0 required");
    if (!(tol >= 0.0)) throw AdmissibilityError("convolution config: tol >= 0 required");
    if (fixed_level && *fixed_level < 0)
        throw AdmissibilityError("convolution config: fixed_level >= 0 required");
}

void ConvolutionDriver::value_into(double time, std::span<double> out) const {
    const SpectralElement v = value(time);
    if (out.size() != v.coeffs.size())
        throw std::invalid_argument("value_into: output span size mismatch");
    std::copy(v.coeffs.begin(), v.coeffs.end(), out.begin());
}

// ---------------------------------------------------------------------------
// Drivers

AnalyticDriver::AnalyticDriver(std::function<SpectralElement(double)> fn,
                               double horizon, int n_modes)
    : fn_(std::move(fn)), horizon_(horizon), n_modes_(n_modes) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("AnalyticDriver: horizon > 0 required");
    if (n_modes_ < 1) throw std::invalid_argument("AnalyticDriver: N >= 1 required");
}

int AnalyticDriver::max_level_at(double t) const {
    if (t < 0.0 || t > horizon_ * (1.0 + 1e-12))
        throw GridIncompatibilityError("AnalyticDriver: time outside horizon");
    return 62;
}

SpectralElement AnalyticDriver::value(double time) const {
    SpectralElement v = fn_(time);
    if (v.n_modes() != n_modes_)
        throw std::invalid_argument("AnalyticDriver: callable returned wrong mode count");
    return v;
}

std::unique_ptr<ConvolutionDriver> AnalyticDriver::shifted(double t0) const {
    if (t0 < 0.0 || t0 >= horizon_)
        throw GridIncompatibilityError("AnalyticDriver::shifted: t0 inside [0, horizon) required");
    auto base = fn_;
    return std::make_unique<AnalyticDriver>(
        [base, t0](double u) { return base(t0 + u); }, horizon_ - t0, n_modes_);
}

SampledDriver::SampledDriver(SampledPath path)
    : SampledDriver(std::make_shared<const SampledPath>(std::move(path))) {}

SampledDriver::SampledDriver(std::shared_ptr<const SampledPath> path)
    : path_(std::move(path)) {
    path_->validate();
    if (!path_->is_uniform())
        throw GridIncompatibilityError("SampledDriver: uniform grid required");
    dt_ = path_->times[1] - path_->times[0];
}

int SampledDriver::n_modes() const { return path_->n_modes(); }
double SampledDriver::horizon() const { return path_->horizon(); }

std::size_t SampledDriver::index_of(double time) const {
    const double x = time / dt_;
    const double r = std::nearbyint(x);
    if (std::abs(x - r) > 1e-6 * std::max(1.0, std::abs(x)))
        throw GridIncompatibilityError("SampledDriver: requested time " +
                                       std::to_string(time) + " not on the grid");
    if (r < 0.0 || r >= static_cast<double>(path_->size()))
        throw GridIncompatibilityError("SampledDriver: requested time outside the grid");
    return static_cast<std::size_t>(r);
}

int SampledDriver::max_level_at(double t) const {
    const std::size_t idx = index_of(t);
    if (idx == 0) return 62;  // the empty window resolves at any level
    // Nodes t k / 2^n have grid index (idx k) / 2^n; all of them are integers
    // exactly when 2^n divides idx.
    int level = 0;
    std::size_t p = idx;
    while ((p & 1u) == 0u) {
        p >>= 1u;
        ++level;
    }
    return level;
}

SpectralElement SampledDriver::value(double time) const {
    return path_->values[index_of(time)];
}

void SampledDriver::value_into(double time, std::span<double> out) const {
    const auto& v = path_->values[index_of(time)].coeffs;
    if (out.size() != v.size())
        throw std::invalid_argument("SampledDriver::value_into: span size mismatch");
    std::copy(v.begin(), v.end(), out.begin());
}

std::unique_ptr<ConvolutionDriver> SampledDriver::shifted(double t0) const {
    const std::size_t i0 = index_of(t0);
    if (i0 + 2 > path_->size())
        throw GridIncompatibilityError("SampledDriver::shifted: window too short");
    SampledPath sub;
    sub.scale = path_->scale;
    sub.times.reserve(path_->size() - i0);
    sub.values.reserve(path_->size() - i0);
    for (std::size_t i = i0; i < path_->size(); ++i) {
        sub.times.push_back(dt_ * static_cast<double>(i - i0));
        sub.values.push_back(path_->values[i]);
    }
    return std::make_unique<SampledDriver>(std::move(sub));
}

// ---------------------------------------------------------------------------
// Dyadic level sums

namespace {

struct LevelRange {
    long long k_lo = 0;
    long long k_hi = 0;  // terms run over k in [k_lo, k_hi)
};

double snap(double x) {
    const double r = std::nearbyint(x);
    return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x)) ? r : x;
}

LevelRange dyadic_range(double s, double s_prime, double t, int level) {
    if (!(t > 0.0)) throw std::invalid_argument("dyadic sum: t > 0 required");
    if (!(0.0 <= s && s <= s_prime && s_prime <= t * (1.0 + 1e-12)))
        throw std::invalid_argument("dyadic sum: 0 <= s <= s' <= t required");
    const double scale = std::ldexp(1.0, level);  // 2^level
    LevelRange r;
    r.k_lo = static_cast<long long>(std::ceil(snap(scale * s / t)));
    r.k_hi = static_cast<long long>(std::floor(snap(scale * s_prime / t)));
    return r;
}

// One level of the scheme.  Terms are accumulated per mode from the node
// nearest t downward, so the semigroup factor recurrence only decays.
SpectralElement level_sum(const ConvolutionDriver& X, double s, double s_prime,
                          double t, int level, CellRule rule) {
    const int n_modes = X.n_modes();
    SpectralElement acc = SpectralElement::zero(n_modes);
    const LevelRange range = dyadic_range(s, s_prime, t, level);
    if (range.k_lo >= range.k_hi) return acc;  // empty summation range

    const double cell = std::ldexp(t, -level);  // t / 2^level
    const long long count = range.k_hi - range.k_lo;

    // Node values (count+1 rows of n_modes).
    std::vector<double> nodes(static_cast<std::size_t>(count + 1) * n_modes);
    for (long long k = range.k_lo; k <= range.k_hi; ++k) {
        const double u = std::ldexp(t * static_cast<double>(k), -level);
        X.value_into(u, std::span<double>(
                            nodes.data() + (k - range.k_lo) * n_modes,
                            static_cast<std::size_t>(n_modes)));
    }

    for (int m = 0; m < n_modes; ++m) {
        const double lam = eigenvalue(m + 1);
        const double decay = std::exp(-lam * cell);
        // factor at the last term k = k_hi - 1
        double factor;
        if (rule == CellRule::left_endpoint) {
            // exp(-lam (t - u_k)) at u_k = (k_hi - 1) cell
            factor = std::exp(-lam * (t - cell * static_cast<double>(range.k_hi - 1)));
        } else {
            // exact cell average: exp(-lam (t - u_{k+1})) (1 - e^{-lam cell})/(lam cell)
            const double phi = -std::expm1(-lam * cell) / (lam * cell);
            factor = std::exp(-lam * (t - cell * static_cast<double>(range.k_hi))) * phi;
        }
        double sum = 0.0;
        for (long long k = range.k_hi - 1; k >= range.k_lo; --k) {
            const std::size_t row = static_cast<std::size_t>(k - range.k_lo);
            const double inc = nodes[(row + 1) * n_modes + m] - nodes[row * n_modes + m];
            sum += factor * inc;
            factor *= decay;
        }
        acc.coeffs[static_cast<std::size_t>(m)] = sum;
    }
    return acc;
}

double slope_of_levels(std::span<const double> increments) {
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < increments.size(); ++n) {
        if (increments[n] > 0.0) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log2(increments[n]));
        }
    }
    if (xs.size() < 2) return 0.0;
    return detail::ols_fit(xs, ys).slope;
}

}  // namespace

SpectralElement dyadic_level(const ConvolutionDriver& X, double s,
                             double s_prime, double t, int level,
                             CellRule rule) {
    if (level < 0) throw std::invalid_argument("dyadic_level: level >= 0 required");
    if (level > X.max_level_at(t))
        throw GridIncompatibilityError("dyadic_level: level exceeds driver resolution");
    return level_sum(X, s, s_prime, t, level, rule);
}

SpectralElement convolve_window(const ConvolutionDriver& X, double s,
                                double s_prime, double t,
                                const DyadicConvolutionConfig& cfg,
                                std::vector<double>* increments_out) {
    cfg.validate();
    const ScaleIndex delta{cfg.delta};
    const int available = X.max_level_at(t);

    if (cfg.fixed_level) {
        if (*cfg.fixed_level > available)
            throw GridIncompatibilityError("convolve: fixed_level exceeds driver resolution");
        SpectralElement prev = level_sum(X, s, s_prime, t, 0, cfg.cell_rule);
        for (int n = 1; n <= *cfg.fixed_level; ++n) {
            SpectralElement cur = level_sum(X, s, s_prime, t, n, cfg.cell_rule);
            if (increments_out)
                increments_out->push_back(norm_alpha(delta, cur - prev));
            prev = std::move(cur);
        }
        return prev;
    }

    const int level_budget = std::min(cfg.max_level, available);
    std::vector<double> increments;
    SpectralElement prev = level_sum(X, s, s_prime, t, 0, cfg.cell_rule);
    int quiet_levels = 0;
    for (int n = 1; n <= level_budget; ++n) {
        SpectralElement cur = level_sum(X, s, s_prime, t, n, cfg.cell_rule);
        const double inc = norm_alpha(delta, cur - prev);
        increments.push_back(inc);
        prev = std::move(cur);
        // A level is only informative once the dyadic nodes genuinely
        // subdivide [s, s']; windows away from 0 have empty ranges at coarse
        // levels, whose zero increments must not stop the iteration.  Two
        // consecutive quiet informative levels are required.
        const LevelRange range = dyadic_range(s, s_prime, t, n);
        const bool informative = range.k_hi - range.k_lo >= 2;
        if (informative && inc < cfg.tol) {
            if (++quiet_levels >= 2) {
                if (increments_out) *increments_out = std::move(increments);
                return prev;
            }
        } else {
            quiet_levels = 0;
        }
    }
    if (increments_out) *increments_out = increments;
    throw NonConvergenceError(
        "convolve: A^delta level increment still above tol at max_level",
        std::move(increments));
}

ConvolutionResult convolve(const ConvolutionDriver& X, double t,
                           const DyadicConvolutionConfig& cfg) {
    if (!(t > 0.0)) throw std::invalid_argument("convolve: t > 0 required");
    ConvolutionResult result;
    SpectralElement value =
        convolve_window(X, 0.0, t, t, cfg, &result.level_increments);
    result.levels_used = static_cast<int>(result.level_increments.size()) + 1;
    result.rate_slope = slope_of_levels(result.level_increments);
    result.path.times = {0.0, t};
    result.path.values = {SpectralElement::zero(X.n_modes()), std::move(value)};
    result.path.scale = ScaleIndex{cfg.delta};
    result.path.validate();
    return result;
}

ConvolutionResult convolve_path(const ConvolutionDriver& X,
                                std::span<const double> times,
                                const DyadicConvolutionConfig& cfg) {
    if (times.empty()) throw std::invalid_argument("convolve_path: empty time list");
    ConvolutionResult result;
    result.path.scale = ScaleIndex{cfg.delta};
    double t_max = 0.0;
    for (double t : times) t_max = std::max(t_max, t);
    for (double t : times) {
        result.path.times.push_back(t);
        if (t == 0.0) {
            result.path.values.push_back(SpectralElement::zero(X.n_modes()));
            continue;
        }
        std::vector<double>* sink = (t == t_max) ? &result.level_increments : nullptr;
        result.path.values.push_back(convolve_window(X, 0.0, t, t, cfg, sink));
    }
    result.levels_used = static_cast<int>(result.level_increments.size()) + 1;
    result.rate_slope = slope_of_levels(result.level_increments);
    result.path.validate();
    return result;
}

SpectralElement smooth_oracle(const std::function<SpectralElement(double)>& x_derivative,
                              double t, int quad_points, int n_modes) {
    if (quad_points < 8)
        throw std::invalid_argument("smooth_oracle: quad_points >= 8 required");
    if (!(t >= 0.0)) throw std::domain_error("smooth_oracle: t >= 0 required");
    SpectralElement acc = SpectralElement::zero(n_modes);
    if (t == 0.0) return acc;
    const auto rule = detail::gauss_legendre(quad_points);
    std::vector<double> nodes, weights;
    detail::map_rule(rule, 0.0, t, nodes, weights);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        SpectralElement v = x_derivative(nodes[q]);
        if (v.n_modes() != n_modes)
            throw std::invalid_argument("smooth_oracle: derivative mode-count mismatch");
        for (int m = 0; m < n_modes; ++m) {
            const double lam = eigenvalue(m + 1);
            acc.coeffs[static_cast<std::size_t>(m)] +=
                weights[q] * std::exp(-lam * (t - nodes[q])) *
                v.coeffs[static_cast<std::size_t>(m)];
        }
    }
    return acc;
}

double chasles_residual(const ConvolutionDriver& X, double s, double s1,
                        double s2, double t, int level) {
    const SpectralElement left = dyadic_level(X, s, s1, t, level);
    const SpectralElement right = dyadic_level(X, s1, s2, t, level);
    const SpectralElement whole = dyadic_level(X, s, s2, t, level);
    return norm_alpha({0.0}, left + right - whole);
}

double flow_identity_residual(const ConvolutionDriver& X, double t, double h,
                              const DyadicConvolutionConfig& cfg) {
    if (h < 0.0) throw std::invalid_argument("flow_identity_residual: h >= 0 required");
    if (h == 0.0) return 0.0;
    const ScaleIndex delta{cfg.delta};

    // eq: S(X)(0,t;t+h) = S(h) S(X)(0,t;t)
    const SpectralElement lhs_prop = convolve_window(X, 0.0, t, t + h, cfg);
    const SpectralElement rhs_prop =
        semigroup_apply(h, convolve_window(X, 0.0, t, t, cfg));
    const double r_prop = norm_alpha(delta, lhs_prop - rhs_prop);

    // eq: S(X)(t,t+h;t+h) = S(X_{t+.})(0,h;h)
    const SpectralElement lhs_shift = convolve_window(X, t, t + h, t + h, cfg);
    const auto shifted = X.shifted(t);
    const SpectralElement rhs_shift = convolve_window(*shifted, 0.0, h, h, cfg);
    const double r_shift = norm_alpha(delta, lhs_shift - rhs_shift);

    return std::max(r_prop, r_shift);
}

void write_rate_csv(std::ostream& os, std::span<const int> levels,
                    std::span<const double> increments,
                    std::span<const double> bound_rhs) {
    if (levels.size() != increments.size() || levels.size() != bound_rhs.size())
        throw std::invalid_argument("write_rate_csv: column length mismatch");
    os << "level,increment_norm,bound_rhs\n";
    std::string line;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        line = std::to_string(levels[i]);
        line += ',';
        append_roundtrip_double(line, increments[i]);
        line += ',';
        append_roundtrip_double(line, bound_rhs[i]);
        line += '\n';
        os << line;
    }
}

}  // namespace rough_mild
