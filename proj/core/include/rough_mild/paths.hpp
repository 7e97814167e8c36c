#pragma once

// Time-sampled paths with values in a scale space, increments
// f(s,t) = f(t) - f(s), the discrete Holder seminorm
//
//     H_{gamma,T}(f) = max_{i<j} |f(t_i, t_j)|_a / (t_j - t_i)^gamma
//
// and an empirical Holder-exponent estimator (log-log regression of mean
// increment norms over dyadic lags).

#include <iosfwd>
#include <span>
#include <vector>

#include "rough_mild/spectral.hpp"

namespace rough_mild {

struct SampledPath {
    std::vector<double> times;            // strictly increasing, times[0] = 0
    std::vector<SpectralElement> values;  // one per time
    ScaleIndex scale{0.0};                // the space the path natively lives in

    std::size_t size() const { return times.size(); }
    int n_modes() const { return values.empty() ? 0 : values.front().n_modes(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    // length >= 2, equal lengths, strictly increasing times starting at 0,
    // finite values, uniform mode count
    void validate() const;

    bool is_uniform(double rel_tol = 1e-9) const;
};

// Path with value(t) = f(t) on the given grid.
SampledPath make_path(std::vector<double> times,
                      std::vector<SpectralElement> values,
                      ScaleIndex scale = {0.0});

// values[j] - values[i]; requires 0 <= i <= j < size.
SpectralElement increment(const SampledPath& path, std::size_t i, std::size_t j);

struct HolderReport {
    double seminorm = 0.0;
    double argmax_s = 0.0;
    double argmax_t = 0.0;
    double exponent_estimate = 0.0;  // NaN when not computed / degenerate
    double fit_residual = 0.0;
};

// Discrete proxy of H_{gamma,T}: exact max over all grid pairs for paths of
// up to 2048 points, dyadic-lag pairs (i, i + 2^k) above that (the proxy is
// then a lower bound).  gamma must lie in (0,1).
HolderReport holder_seminorm(const SampledPath& path, double gamma,
                             ScaleIndex measured_in);

// OLS slope of log(mean increment norm at lag l) vs log(lag * dt) over dyadic
// lags.  Requires a uniform grid with >= 33 points.  A constant path yields a
// NaN exponent sentinel.
HolderReport holder_exponent_estimate(const SampledPath& path,
                                      ScaleIndex measured_in);

// CSV round trip, header `t,c1,...,cN`, shortest round-trip decimals, LF
// line endings.
void write_path_csv(std::ostream& os, const SampledPath& path);
SampledPath read_path_csv(std::istream& is, ScaleIndex declared_scale = {0.0});

// Helpers shared by every CSV writer in the library.
void append_roundtrip_double(std::string& out, double v);
double parse_double(std::string_view token);

}  // namespace rough_mild
