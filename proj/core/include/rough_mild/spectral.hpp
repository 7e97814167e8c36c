#pragma once

// Spectral realization of the Dirichlet Laplacian A = -d^2/dx^2 on (0,1)
// over the orthonormal sine system e_n(x) = sqrt(2) sin(2 pi n x), with
// eigenvalues lambda_n = (2 pi n)^2.  Fractional powers A^a act diagonally
// (c_n -> lambda_n^a c_n), the analytic semigroup S(t) = exp(-tA) acts as
// c_n -> exp(-lambda_n t) c_n, and every graded norm
//
//     |x|_a = ( sum_n lambda_n^{2a} c_n^2 )^{1/2}
//
// is a weighted l2 norm, exact on the truncated space.

#include <span>
#include <vector>

#include "rough_mild/errors.hpp"

namespace rough_mild {

// Order of a scale space: x lives "in B_alpha".  Negative orders are the
// distribution side of the scale and are realized by the same weighted norms.
struct ScaleIndex {
    double alpha = 0.0;
};

// Element of the truncated scale space: coefficients c_1..c_N over the sine
// eigenbasis.  Plain value type; all operations are pure.
struct SpectralElement {
    std::vector<double> coeffs;

    SpectralElement() = default;
    explicit SpectralElement(std::vector<double> c) : coeffs(std::move(c)) {}

    int n_modes() const { return static_cast<int>(coeffs.size()); }

    static SpectralElement zero(int n_modes);
    // e_k as an element with n_modes coefficients (k is 1-based)
    static SpectralElement basis(int n_modes, int k);

    // invariants: N >= 1 and every coefficient finite
    bool is_valid() const;

    SpectralElement& operator+=(const SpectralElement& o);
    SpectralElement& operator-=(const SpectralElement& o);
    SpectralElement& operator*=(double c);
};

SpectralElement operator+(SpectralElement a, const SpectralElement& b);
SpectralElement operator-(SpectralElement a, const SpectralElement& b);
SpectralElement operator*(double c, SpectralElement a);

// lambda_n = (2 pi n)^2, n >= 1
double eigenvalue(int n);

// Semigroup data for this instance: |S(t)| <= M exp(-lambda t) holds with
// M = 1 and lambda = lambda_1 = 4 pi^2 (spectral gap of the Dirichlet
// Laplacian).  smoothing_envelope(a) = (a/e)^a is the scalar envelope of
// sup_u u^a exp(-u), with 0^0 := 1; it plays the role of M_a in
// |A^a S(t)| <= M_a t^{-a} exp(-lambda t).
struct SemigroupConstants {
    double contraction = 1.0;
    double spectral_gap = 39.47841760435743;  // 4 pi^2

    static double smoothing_envelope(double alpha);
};

// c_n -> lambda_n^alpha c_n.  Throws std::range_error if the reweighting
// overflows double range (never silently saturates).
SpectralElement frac_power_apply(ScaleIndex alpha, const SpectralElement& x);

// c_n -> exp(-lambda_n t) c_n, t >= 0 (std::domain_error otherwise).
SpectralElement semigroup_apply(double t, const SpectralElement& x);

// |x|_alpha = ( sum lambda_n^{2 alpha} c_n^2 )^{1/2}
double norm_alpha(ScaleIndex alpha, const SpectralElement& x);

// Exact operator norm of A^alpha S(t) on the N-mode space:
// max_{n<=N} lambda_n^alpha exp(-lambda_n t), for alpha >= 0, t > 0.
double smoothing_norm(double alpha, double t, int n_modes);

// Pointwise evaluation sum_n c_n sqrt(2) sin(2 pi n p) at points in [0,1].
std::vector<double> grid_evaluate(const SpectralElement& x,
                                  std::span<const double> points);

// Uniform interior grid x_j = j/M, j = 1..M-1.
std::vector<double> uniform_interior_grid(int grid_cells);

// Discrete sine projection from values on the uniform interior grid
// (values.size() = M-1, grid x_j = j/M).  Requires M >= 2 n_modes + 2, else
// the mode content aliases and an AdmissibilityError is thrown.
SpectralElement grid_project(std::span<const double> interior_values, int n_modes);

}  // namespace rough_mild
