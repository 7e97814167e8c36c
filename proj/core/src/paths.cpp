#include "rough_mild/paths.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rough_mild/detail/numerics.hpp"

namespace rough_mild {

void SampledPath::validate() const {
    if (times.size() != values.size())
        throw std::invalid_argument("SampledPath: times/values length mismatch");
    if (times.size() < 2)
        throw std::invalid_argument("SampledPath: at least two samples required");
    if (times.front() != 0.0)
        throw std::invalid_argument("SampledPath: t_0 = 0 required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("SampledPath: times must be strictly increasing");
    const int n = values.front().n_modes();
    for (const auto& v : values) {
        if (v.n_modes() != n)
            throw std::invalid_argument("SampledPath: non-uniform mode count");
        if (!v.is_valid())
            throw std::invalid_argument("SampledPath: non-finite value");
    }
}

bool SampledPath::is_uniform(double rel_tol) const {
    if (times.size() < 2) return false;
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > rel_tol * std::max(1.0, std::abs(dt)))
            return false;
    return true;
}

SampledPath make_path(std::vector<double> times,
                      std::vector<SpectralElement> values, ScaleIndex scale) {
    SampledPath p;
    p.times = std::move(times);
    p.values = std::move(values);
    p.scale = scale;
    p.validate();
    return p;
}

SpectralElement increment(const SampledPath& path, std::size_t i, std::size_t j) {
    if (j >= path.size() || i > j)
        throw std::out_of_range("increment: need 0 <= i <= j < path size");
    return path.values[j] - path.values[i];
}

namespace {

// Pair visitation shared by the seminorm: all pairs up to 2048 points,
// dyadic lags beyond.
template <class Fn>
void for_each_pair(std::size_t n_points, Fn&& fn) {
    if (n_points <= 2048) {
        for (std::size_t i = 0; i + 1 < n_points; ++i)
            for (std::size_t j = i + 1; j < n_points; ++j) fn(i, j);
        return;
    }
    for (std::size_t lag = 1; lag < n_points; lag *= 2)
        for (std::size_t i = 0; i + lag < n_points; ++i) fn(i, i + lag);
}

std::vector<double> squared_norm_weights(int n_modes, double alpha) {
    std::vector<double> w(static_cast<std::size_t>(n_modes), 1.0);
    if (alpha != 0.0)
        for (int n = 1; n <= n_modes; ++n)
            w[static_cast<std::size_t>(n - 1)] = std::pow(eigenvalue(n), 2.0 * alpha);
    return w;
}

double weighted_increment_norm(const SampledPath& path, std::size_t i,
                               std::size_t j, std::span<const double> w) {
    const auto& a = path.values[i].coeffs;
    const auto& b = path.values[j].coeffs;
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = b[k] - a[k];
        s += w[k] * d * d;
    }
    return std::sqrt(s);
}

}  // namespace

HolderReport holder_seminorm(const SampledPath& path, double gamma,
                             ScaleIndex measured_in) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("holder_seminorm: gamma in (0,1) required");
    path.validate();
    HolderReport rep;
    rep.exponent_estimate = std::numeric_limits<double>::quiet_NaN();
    rep.fit_residual = std::numeric_limits<double>::quiet_NaN();
    const auto w = squared_norm_weights(path.n_modes(), measured_in.alpha);
    for_each_pair(path.size(), [&](std::size_t i, std::size_t j) {
        const double dt = path.times[j] - path.times[i];
        const double r = weighted_increment_norm(path, i, j, w) / std::pow(dt, gamma);
        if (r > rep.seminorm) {
            rep.seminorm = r;
            rep.argmax_s = path.times[i];
            rep.argmax_t = path.times[j];
        }
    });
    return rep;
}

HolderReport holder_exponent_estimate(const SampledPath& path,
                                      ScaleIndex measured_in) {
    path.validate();
    if (path.size() < 33)
        throw std::invalid_argument("holder_exponent_estimate: >= 33 points required");
    if (!path.is_uniform())
        throw std::invalid_argument("holder_exponent_estimate: uniform grid required");

    const std::size_t n = path.size();
    const double dt = path.times[1] - path.times[0];
    const auto w = squared_norm_weights(path.n_modes(), measured_in.alpha);
    std::vector<double> log_lag, log_mean;
    for (std::size_t lag = 1; 4 * lag <= n - 1; lag *= 2) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i + lag < n; ++i) {
            acc += weighted_increment_norm(path, i, i + lag, w);
            ++count;
        }
        const double mean = acc / static_cast<double>(count);
        if (mean > 0.0) {
            log_lag.push_back(std::log(static_cast<double>(lag) * dt));
            log_mean.push_back(std::log(mean));
        }
    }

    HolderReport rep;
    rep.seminorm = 0.0;
    if (log_lag.size() < 2) {
        // constant (or near-constant) path: undefined exponent sentinel
        rep.exponent_estimate = std::numeric_limits<double>::quiet_NaN();
        rep.fit_residual = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const auto fit = detail::ols_fit(log_lag, log_mean);
    rep.exponent_estimate = fit.slope;
    rep.fit_residual = fit.residual;
    return rep;
}

void append_roundtrip_double(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        throw std::invalid_argument("CSV: malformed floating-point token '" +
                                    std::string(token) + "'");
    return v;
}

void write_path_csv(std::ostream& os, const SampledPath& path) {
    path.validate();
    std::string line = "t";
    for (int n = 1; n <= path.n_modes(); ++n) {
        line += ",c";
        line += std::to_string(n);
    }
    line += '\n';
    os << line;
    for (std::size_t i = 0; i < path.size(); ++i) {
        line.clear();
        append_roundtrip_double(line, path.times[i]);
        for (double c : path.values[i].coeffs) {
            line += ',';
            append_roundtrip_double(line, c);
        }
        line += '\n';
        os << line;
    }
}

SampledPath read_path_csv(std::istream& is, ScaleIndex declared_scale) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("path CSV: empty input");
    if (line.rfind("t,", 0) != 0)
        throw std::invalid_argument("path CSV: missing `t,c1,...` header");

    SampledPath path;
    path.scale = declared_scale;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::size_t end = (comma == std::string::npos) ? line.size() : comma;
            row.push_back(parse_double(std::string_view(line).substr(start, end - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() < 2)
            throw std::invalid_argument("path CSV: row with fewer than two fields");
        path.times.push_back(row.front());
        path.values.emplace_back(std::vector<double>(row.begin() + 1, row.end()));
    }
    path.validate();
    return path;
}

}  // namespace rough_mild
