#include "rough_mild/young.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rough_mild/errors.hpp"
#include "rough_mild/rng.hpp"

namespace rough_mild {

void OperatorPath::validate() const {
    if (times.size() != ops.size())
        throw std::invalid_argument("OperatorPath: times/ops length mismatch");
    if (times.size() < 2)
        throw std::invalid_argument("OperatorPath: at least two samples required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("OperatorPath: times must be strictly increasing");
    for (std::size_t idx : native_nodes)
        if (idx >= times.size())
            throw std::out_of_range("OperatorPath: native node index out of range");
}

bool OperatorPath::probe_linear(int n_modes, std::uint64_t seed, double tol) const {
    validate();
    std::vector<std::size_t> nodes = native_nodes;
    if (nodes.empty()) {
        nodes.resize(size());
        for (std::size_t i = 0; i < size(); ++i) nodes[i] = i;
    }
    for (std::size_t idx : nodes)
        if (!probe_linearity(ops[idx], n_modes, mix64(seed ^ idx), tol)) return false;
    return true;
}

OperatorPath constant_operator_path(std::vector<double> times, LinearOp op,
                                    ScaleIndex input_scale, ScaleIndex output_scale) {
    OperatorPath H;
    H.times = std::move(times);
    H.ops.assign(H.times.size(), op);
    H.native_nodes = {0};
    H.input_scale = input_scale;
    H.output_scale = output_scale;
    H.holder_exponent_hint = 1.0;
    H.validate();
    return H;
}

double sewing_constant(double theta) {
    if (!(theta > 1.0))
        throw std::domain_error("sewing_constant: theta > 1 required");
    return 1.0 / (1.0 - std::exp2(1.0 - theta));
}

bool probe_linearity(const LinearOp& op, int n_modes, std::uint64_t seed,
                     double tol, int trials) {
    GaussianStream g(seed);
    for (int trial = 0; trial < trials; ++trial) {
        SpectralElement x = SpectralElement::zero(n_modes);
        SpectralElement y = SpectralElement::zero(n_modes);
        for (int i = 0; i < n_modes; ++i) {
            x.coeffs[static_cast<std::size_t>(i)] = g.next();
            y.coeffs[static_cast<std::size_t>(i)] = g.next();
        }
        const double a = g.next();
        const double b = g.next();
        const SpectralElement lhs = op(a * x + b * y);
        const SpectralElement rhs = a * op(x) + b * op(y);
        const double scale = std::max(1.0, norm_alpha({0.0}, lhs));
        if (norm_alpha({0.0}, lhs - rhs) > tol * scale) return false;
    }
    return true;
}

namespace {

void require_common_grid(const OperatorPath& H, const SampledPath& X) {
    if (H.times.size() != X.times.size())
        throw GridIncompatibilityError("young: operator and driver grids differ in size");
    for (std::size_t i = 0; i < H.times.size(); ++i)
        if (H.times[i] != X.times[i])
            throw GridIncompatibilityError("young: operator and driver grids differ");
}

// Same discrete proxy as holder_seminorm but admitting gamma = 1 (smooth
// drivers are measured with the Lipschitz seminorm).
double seminorm_up_to_lipschitz(const SampledPath& path, double gamma,
                                ScaleIndex measured_in) {
    if (gamma < 1.0) return holder_seminorm(path, gamma, measured_in).seminorm;
    std::vector<double> w(static_cast<std::size_t>(path.n_modes()), 1.0);
    if (measured_in.alpha != 0.0)
        for (int k = 1; k <= path.n_modes(); ++k)
            w[static_cast<std::size_t>(k - 1)] =
                std::pow(eigenvalue(k), 2.0 * measured_in.alpha);
    double best = 0.0;
    const std::size_t n = path.size();
    auto visit = [&](std::size_t i, std::size_t j) {
        const auto& a = path.values[i].coeffs;
        const auto& b = path.values[j].coeffs;
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = b[k] - a[k];
            s += w[k] * d * d;
        }
        best = std::max(best, std::sqrt(s) / (path.times[j] - path.times[i]));
    };
    if (n <= 2048) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
    } else {
        for (std::size_t lag = 1; lag < n; lag *= 2)
            for (std::size_t i = 0; i + lag < n; ++i) visit(i, i + lag);
    }
    return best;
}

}  // namespace

SpectralElement riemann_sum(const OperatorPath& H, const SampledPath& X,
                            std::span<const std::size_t> partition) {
    H.validate();
    X.validate();
    require_common_grid(H, X);
    if (partition.empty())
        throw std::invalid_argument("riemann_sum: partition must contain at least one index");
    for (std::size_t r = 0; r < partition.size(); ++r) {
        if (partition[r] >= X.size())
            throw std::out_of_range("riemann_sum: partition index out of range");
        if (r > 0 && partition[r] <= partition[r - 1])
            throw std::invalid_argument("riemann_sum: partition indices must increase");
    }
    SpectralElement acc = SpectralElement::zero(X.n_modes());
    for (std::size_t r = 0; r + 1 < partition.size(); ++r) {
        const std::size_t i = partition[r];
        const std::size_t j = partition[r + 1];
        acc += H.ops[i](X.values[j] - X.values[i]);
    }
    return acc;
}

double operator_holder_seminorm(const OperatorPath& H, double alpha,
                                int n_modes, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("operator_holder_seminorm: alpha in (0,1] required");
    H.validate();

    std::vector<std::size_t> nodes = H.native_nodes;
    if (nodes.empty()) {
        nodes.resize(H.size());
        for (std::size_t i = 0; i < H.size(); ++i) nodes[i] = i;
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() < 2) return 0.0;  // constant operator path

    // Probe directions: the basis plus a few Gaussian vectors, all
    // normalized in the input scale.  The result is a lower estimate of the
    // subordinate-norm seminorm, exact for scalar multiples of a fixed map.
    std::vector<SpectralElement> probes;
    for (int k = 1; k <= n_modes; ++k)
        probes.push_back(SpectralElement::basis(n_modes, k));
    GaussianStream g(seed);
    for (int extra = 0; extra < 4; ++extra) {
        SpectralElement v = SpectralElement::zero(n_modes);
        for (int i = 0; i < n_modes; ++i) v.coeffs[static_cast<std::size_t>(i)] = g.next();
        probes.push_back(v);
    }
    for (auto& p : probes) {
        const double nrm = norm_alpha(H.input_scale, p);
        if (nrm > 0.0) p *= 1.0 / nrm;
    }

    double best = 0.0;
    const bool all_pairs = nodes.size() <= 512;
    auto visit = [&](std::size_t a, std::size_t b) {
        const double dt = H.times[nodes[b]] - H.times[nodes[a]];
        double opnorm = 0.0;
        for (const auto& p : probes) {
            const SpectralElement d = H.ops[nodes[b]](p) - H.ops[nodes[a]](p);
            opnorm = std::max(opnorm, norm_alpha(H.output_scale, d));
        }
        best = std::max(best, opnorm / std::pow(dt, alpha));
    };
    if (all_pairs) {
        for (std::size_t a = 0; a + 1 < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b) visit(a, b);
    } else {
        for (std::size_t lag = 1; lag < nodes.size(); lag *= 2)
            for (std::size_t a = 0; a + lag < nodes.size(); ++a) visit(a, a + lag);
    }
    return best;
}

YoungResult young_integral(const OperatorPath& H, const SampledPath& X,
                           double alpha, double gamma) {
    if (!(alpha + gamma > 1.0))
        throw AdmissibilityError("young_integral: alpha + gamma > 1 required (Young condition)");
    H.validate();
    X.validate();
    require_common_grid(H, X);

    YoungResult out;
    out.path.times = X.times;
    out.path.scale = H.output_scale;
    out.path.values.reserve(X.size());
    SpectralElement acc = SpectralElement::zero(X.n_modes());
    out.path.values.push_back(acc);
    double mesh = 0.0;
    for (std::size_t i = 0; i + 1 < X.size(); ++i) {
        acc += H.ops[i](X.values[i + 1] - X.values[i]);
        out.path.values.push_back(acc);
        mesh = std::max(mesh, X.times[i + 1] - X.times[i]);
    }

    out.constant_used = sewing_constant(alpha + gamma);
    out.driver_seminorm = seminorm_up_to_lipschitz(X, gamma, X.scale);
    out.operator_seminorm = operator_holder_seminorm(H, std::min(alpha, 1.0), X.n_modes());
    const double span = X.times.back() - X.times.front();
    out.error_estimate = out.constant_used * out.driver_seminorm *
                         out.operator_seminorm *
                         std::pow(mesh, alpha + gamma - 1.0) * span;
    return out;
}

}  // namespace rough_mild
