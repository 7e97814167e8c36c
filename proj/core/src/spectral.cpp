#include "rough_mild/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rough_mild {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;

void require_same_size(const SpectralElement& a, const SpectralElement& b) {
    if (a.coeffs.size() != b.coeffs.size())
        throw std::invalid_argument("SpectralElement: mode-count mismatch");
}
}  // namespace

SpectralElement SpectralElement::zero(int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("SpectralElement: N >= 1 required");
    return SpectralElement(std::vector<double>(static_cast<std::size_t>(n_modes), 0.0));
}

SpectralElement SpectralElement::basis(int n_modes, int k) {
    auto e = zero(n_modes);
    if (k < 1 || k > n_modes)
        throw std::out_of_range("SpectralElement::basis: mode index out of range");
    e.coeffs[static_cast<std::size_t>(k - 1)] = 1.0;
    return e;
}

bool SpectralElement::is_valid() const {
    if (coeffs.empty()) return false;
    for (double c : coeffs)
        if (!std::isfinite(c)) return false;
    return true;
}

SpectralElement& SpectralElement::operator+=(const SpectralElement& o) {
    require_same_size(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
}

SpectralElement& SpectralElement::operator-=(const SpectralElement& o) {
    require_same_size(*this, o);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
}

SpectralElement& SpectralElement::operator*=(double c) {
    for (double& v : coeffs) v *= c;
    return *this;
}

SpectralElement operator+(SpectralElement a, const SpectralElement& b) { return a += b; }
SpectralElement operator-(SpectralElement a, const SpectralElement& b) { return a -= b; }
SpectralElement operator*(double c, SpectralElement a) { return a *= c; }

double eigenvalue(int n) {
    if (n < 1) throw std::domain_error("eigenvalue: n >= 1 required");
    const double w = 2.0 * kPi * static_cast<double>(n);
    return w * w;
}

double SemigroupConstants::smoothing_envelope(double alpha) {
    if (alpha < 0.0) throw std::domain_error("smoothing_envelope: alpha >= 0 required");
    if (alpha == 0.0) return 1.0;  // 0^0 := 1
    return std::pow(alpha / std::exp(1.0), alpha);
}

SpectralElement frac_power_apply(ScaleIndex alpha, const SpectralElement& x) {
    SpectralElement out = x;
    if (alpha.alpha == 0.0) return out;  // A^0 = Id
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        const double lam = eigenvalue(static_cast<int>(i) + 1);
        const double w = std::pow(lam, alpha.alpha);
        const double v = w * out.coeffs[i];
        if (!std::isfinite(v) && std::isfinite(out.coeffs[i]) && out.coeffs[i] != 0.0)
            throw std::range_error("frac_power_apply: lambda^alpha overflows double range");
        if (!std::isfinite(w))
            throw std::range_error("frac_power_apply: lambda^alpha overflows double range");
        out.coeffs[i] = v;
    }
    return out;
}

SpectralElement semigroup_apply(double t, const SpectralElement& x) {
    if (t < 0.0 || !std::isfinite(t))
        throw std::domain_error("semigroup_apply: t >= 0 required");
    SpectralElement out = x;
    for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
        const double lam = eigenvalue(static_cast<int>(i) + 1);
        out.coeffs[i] *= std::exp(-lam * t);
    }
    return out;
}

double norm_alpha(ScaleIndex alpha, const SpectralElement& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.coeffs.size(); ++i) {
        const double lam = eigenvalue(static_cast<int>(i) + 1);
        const double w = (alpha.alpha == 0.0) ? 1.0 : std::pow(lam, alpha.alpha);
        const double term = w * x.coeffs[i];
        s += term * term;
    }
    return std::sqrt(s);
}

double smoothing_norm(double alpha, double t, int n_modes) {
    if (t <= 0.0) throw std::domain_error("smoothing_norm: t > 0 required");
    if (alpha < 0.0) throw std::domain_error("smoothing_norm: alpha >= 0 required");
    if (n_modes < 1) throw std::invalid_argument("smoothing_norm: N >= 1 required");
    double best = 0.0;
    for (int n = 1; n <= n_modes; ++n) {
        const double lam = eigenvalue(n);
        const double v = std::pow(lam, alpha) * std::exp(-lam * t);
        if (v > best) best = v;
    }
    return best;
}

std::vector<double> grid_evaluate(const SpectralElement& x,
                                  std::span<const double> points) {
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double p = points[j];
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("grid_evaluate: point outside [0,1]");
        double v = 0.0;
        for (std::size_t i = 0; i < x.coeffs.size(); ++i) {
            const double c = x.coeffs[i];
            if (c == 0.0) continue;
            v += c * kSqrt2 * std::sin(2.0 * kPi * static_cast<double>(i + 1) * p);
        }
        out[j] = v;
    }
    return out;
}

std::vector<double> uniform_interior_grid(int grid_cells) {
    if (grid_cells < 2) throw std::invalid_argument("uniform_interior_grid: M >= 2 required");
    std::vector<double> pts(static_cast<std::size_t>(grid_cells - 1));
    for (int j = 1; j < grid_cells; ++j)
        pts[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) / grid_cells;
    return pts;
}

SpectralElement grid_project(std::span<const double> interior_values, int n_modes) {
    const int grid_cells = static_cast<int>(interior_values.size()) + 1;
    if (n_modes < 1) throw std::invalid_argument("grid_project: N >= 1 required");
    if (grid_cells < 2 * n_modes + 2)
        throw AdmissibilityError("grid_project: grid too coarse for N modes (aliasing), need M >= 2N+2");
    // Discrete orthogonality: sum_{j=0}^{M-1} sin(2 pi n j / M) sin(2 pi m j / M)
    // = (M/2) delta_{nm} for n, m <= N < M/2, so
    // c_n = (sqrt(2)/M) sum_j f(x_j) sin(2 pi n j / M).
    SpectralElement out = SpectralElement::zero(n_modes);
    const double scale = kSqrt2 / static_cast<double>(grid_cells);
    for (int n = 1; n <= n_modes; ++n) {
        double s = 0.0;
        const double w = 2.0 * kPi * static_cast<double>(n) / grid_cells;
        for (int j = 1; j < grid_cells; ++j)
            s += interior_values[static_cast<std::size_t>(j - 1)] * std::sin(w * j);
        out.coeffs[static_cast<std::size_t>(n - 1)] = scale * s;
    }
    return out;
}

}  // namespace rough_mild
