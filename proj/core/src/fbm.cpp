#include "rough_mild/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <stdexcept>

#include "rough_mild/errors.hpp"
#include "rough_mild/rng.hpp"

namespace rough_mild {

double QRule::q(int n) const {
    if (n < 1) throw std::domain_error("QRule: mode index >= 1 required");
    switch (kind) {
        case Kind::constant:
            return 1.0;
        case Kind::power:
            return std::pow(static_cast<double>(n), -exponent);
        case Kind::file:
            if (static_cast<std::size_t>(n) > custom.size())
                throw std::out_of_range("QRule: q-file has too few entries");
            return custom[static_cast<std::size_t>(n - 1)];
    }
    throw std::logic_error("QRule: unknown kind");
}

QRule QRule::constant() { return QRule{}; }

QRule QRule::power(double a) {
    if (a < 0.0) throw std::invalid_argument("QRule::power: a >= 0 required");
    QRule r;
    r.kind = Kind::power;
    r.exponent = a;
    return r;
}

QRule QRule::from_values(std::vector<double> q) {
    QRule r;
    r.kind = Kind::file;
    r.custom = std::move(q);
    return r;
}

QRule QRule::parse(const std::string& text) {
    if (text == "const") return constant();
    if (text.rfind("pow:", 0) == 0) return power(std::stod(text.substr(4)));
    if (text.rfind("file:", 0) == 0) {
        std::ifstream in(text.substr(5));
        if (!in) throw std::invalid_argument("QRule: cannot open q-file " + text.substr(5));
        std::vector<double> q;
        double v;
        while (in >> v) q.push_back(v);
        if (q.empty()) throw std::invalid_argument("QRule: empty q-file");
        return from_values(std::move(q));
    }
    throw std::invalid_argument("QRule: expected const | pow:a | file:PATH, got " + text);
}

void NoiseSpec::validate() const {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw std::invalid_argument("NoiseSpec: hurst in (0,1) required");
    if (n_modes < 1) throw std::invalid_argument("NoiseSpec: n_modes >= 1 required");
    if (time_steps < 2 || (time_steps & (time_steps - 1)) != 0)
        throw std::invalid_argument("NoiseSpec: time_steps must be a power of two >= 2");
    if (!(horizon > 0.0)) throw std::invalid_argument("NoiseSpec: horizon > 0 required");
    if (!(mu > 0.0)) throw std::invalid_argument("NoiseSpec: mu > 0 required");
}

std::vector<double> NoiseSpec::grid() const {
    std::vector<double> t(static_cast<std::size_t>(time_steps) + 1);
    for (int j = 0; j <= time_steps; ++j)
        t[static_cast<std::size_t>(j)] =
            horizon * static_cast<double>(j) / static_cast<double>(time_steps);
    return t;
}

double fbm_covariance(double hurst, double s, double t) {
    const double two_h = 2.0 * hurst;
    return 0.5 * (std::pow(std::abs(t), two_h) + std::pow(std::abs(s), two_h) -
                  std::pow(std::abs(t - s), two_h));
}

// ---------------------------------------------------------------------------
// FbmSampler

struct FbmSampler::Impl {
    double hurst = 0.5;
    std::vector<double> times;   // full grid, may start at 0
    std::vector<double> positive_times;
    bool leading_zero = false;
    Method method = Method::cholesky;
    double jitter = 0.0;

    // Cholesky: lower factor of the covariance over the positive times.
    Eigen::MatrixXd chol_lower;

    // Circulant embedding (uniform grids): sqrt of circulant eigenvalues.
    std::vector<double> sqrt_eigs;  // length 2M
    int steps = 0;                  // M
    double dt = 0.0;

    void build_cholesky();
    void build_circulant();
    std::vector<double> sample_cholesky(std::uint64_t seed) const;
    std::vector<double> sample_circulant(std::uint64_t seed) const;
};

void FbmSampler::Impl::build_cholesky() {
    const int m = static_cast<int>(positive_times.size());
    Eigen::MatrixXd cov(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            cov(i, j) = fbm_covariance(hurst, positive_times[static_cast<std::size_t>(i)],
                                       positive_times[static_cast<std::size_t>(j)]);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        // numerically non-PSD: add diagonal jitter and report it
        jitter = 1e-12 * cov.diagonal().maxCoeff();
        Eigen::MatrixXd jittered = cov;
        jittered.diagonal().array() += jitter;
        llt.compute(jittered);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("FbmSampler: covariance factorization failed even with jitter");
    }
    chol_lower = llt.matrixL();
}

void FbmSampler::Impl::build_circulant() {
    // Davies-Harte embedding of the fGn autocovariance
    //   c_k = dt^{2H}/2 (|k+1|^{2H} + |k-1|^{2H} - 2 |k|^{2H})
    // into a 2M circulant; its eigenvalues come out of one real FFT.
    steps = static_cast<int>(positive_times.size());
    const int two_m = 2 * steps;
    const double two_h = 2.0 * hurst;
    const double scale = 0.5 * std::pow(dt, two_h);
    auto autocov = [&](int k) {
        const double kk = static_cast<double>(k);
        return scale * (std::pow(std::abs(kk + 1.0), two_h) +
                        std::pow(std::abs(kk - 1.0), two_h) -
                        2.0 * std::pow(std::abs(kk), two_h));
    };
    std::vector<double> row(static_cast<std::size_t>(two_m));
    for (int k = 0; k <= steps; ++k) row[static_cast<std::size_t>(k)] = autocov(k);
    for (int k = steps + 1; k < two_m; ++k)
        row[static_cast<std::size_t>(k)] = autocov(two_m - k);

    std::vector<std::complex<double>> in(static_cast<std::size_t>(two_m));
    std::vector<std::complex<double>> out(static_cast<std::size_t>(two_m));
    for (int k = 0; k < two_m; ++k) in[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k)];
    fftw_plan plan = fftw_plan_dft_1d(
        two_m, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    sqrt_eigs.resize(static_cast<std::size_t>(two_m));
    for (int k = 0; k < two_m; ++k) {
        double lam = out[static_cast<std::size_t>(k)].real();
        // The embedding is provably nonnegative-definite for fGn; clamp the
        // rounding dust.
        if (lam < 0.0) {
            if (lam < -1e-9 * std::abs(out[0].real()))
                throw std::runtime_error("FbmSampler: circulant embedding produced a negative eigenvalue");
            lam = 0.0;
        }
        sqrt_eigs[static_cast<std::size_t>(k)] = std::sqrt(lam);
    }
}

std::vector<double> FbmSampler::Impl::sample_cholesky(std::uint64_t seed) const {
    const int m = static_cast<int>(positive_times.size());
    GaussianStream g(seed);
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z(i) = g.next();
    Eigen::VectorXd w = chol_lower * z;
    std::vector<double> out;
    out.reserve(times.size());
    if (leading_zero) out.push_back(0.0);
    for (int i = 0; i < m; ++i) out.push_back(w(i));
    return out;
}

std::vector<double> FbmSampler::Impl::sample_circulant(std::uint64_t seed) const {
    const int two_m = 2 * steps;
    GaussianStream g(seed);
    // Hermitian-symmetric Gaussian spectrum: V_0, V_M real; V_j complex for
    // 0 < j < M with V_{2M-j} = conj(V_j).  Draw order is fixed by contract.
    std::vector<std::complex<double>> v(static_cast<std::size_t>(two_m));
    const double norm = 1.0 / std::sqrt(static_cast<double>(two_m));
    v[0] = sqrt_eigs[0] * g.next() * norm;
    v[static_cast<std::size_t>(steps)] =
        sqrt_eigs[static_cast<std::size_t>(steps)] * g.next() * norm;
    for (int j = 1; j < steps; ++j) {
        const double re = g.next();
        const double im = g.next();
        const double amp = sqrt_eigs[static_cast<std::size_t>(j)] * norm / std::sqrt(2.0);
        v[static_cast<std::size_t>(j)] = std::complex<double>(amp * re, amp * im);
        v[static_cast<std::size_t>(two_m - j)] = std::conj(v[static_cast<std::size_t>(j)]);
    }
    std::vector<std::complex<double>> out(static_cast<std::size_t>(two_m));
    fftw_plan plan = fftw_plan_dft_1d(
        two_m, reinterpret_cast<fftw_complex*>(v.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::vector<double> w;
    w.reserve(times.size());
    if (leading_zero) w.push_back(0.0);
    double acc = 0.0;
    for (int k = 0; k < steps; ++k) {
        acc += out[static_cast<std::size_t>(k)].real();  // fGn increment k
        w.push_back(acc);
    }
    return w;
}

FbmSampler::FbmSampler(double hurst, std::vector<double> times, Method method)
    : impl_(std::make_unique<Impl>()) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw std::invalid_argument("FbmSampler: hurst in (0,1) required");
    if (times.size() < 2)
        throw std::invalid_argument("FbmSampler: at least two grid times required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("FbmSampler: times must be strictly increasing");
    if (times.front() < 0.0)
        throw std::invalid_argument("FbmSampler: times must be nonnegative");

    impl_->hurst = hurst;
    impl_->times = std::move(times);
    impl_->leading_zero = impl_->times.front() == 0.0;
    impl_->positive_times.assign(impl_->times.begin() + (impl_->leading_zero ? 1 : 0),
                                 impl_->times.end());

    const std::size_t m = impl_->positive_times.size();
    // Circulant embedding needs a uniform grid anchored at 0.
    bool uniform = impl_->leading_zero;
    if (uniform) {
        impl_->dt = impl_->positive_times.front();
        for (std::size_t i = 0; i < m; ++i) {
            const double expected = impl_->dt * static_cast<double>(i + 1);
            if (std::abs(impl_->positive_times[i] - expected) > 1e-9 * std::max(1.0, expected)) {
                uniform = false;
                break;
            }
        }
    }

    Method chosen = method;
    if (chosen == Method::automatic)
        chosen = (m <= 4096 || !uniform) ? Method::cholesky : Method::circulant;
    if (chosen == Method::circulant && !uniform)
        throw std::invalid_argument("FbmSampler: circulant embedding requires a uniform grid from 0");

    impl_->method = chosen;
    if (chosen == Method::cholesky)
        impl_->build_cholesky();
    else
        impl_->build_circulant();
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

std::vector<double> FbmSampler::sample(std::uint64_t seed) const {
    return impl_->method == Method::cholesky ? impl_->sample_cholesky(seed)
                                             : impl_->sample_circulant(seed);
}

FbmSampler::Method FbmSampler::method_used() const { return impl_->method; }
double FbmSampler::jitter_applied() const { return impl_->jitter; }

std::vector<double> fbm_sample(double hurst, std::span<const double> times,
                               std::uint64_t seed) {
    FbmSampler sampler(hurst, std::vector<double>(times.begin(), times.end()));
    return sampler.sample(seed);
}

// ---------------------------------------------------------------------------

SampledPath noise_field(const NoiseSpec& spec, ScaleIndex declared_scale) {
    spec.validate();
    const auto grid = spec.grid();
    FbmSampler sampler(spec.hurst, grid);

    SampledPath path;
    path.times = grid;
    path.scale = declared_scale;
    path.values.assign(grid.size(), SpectralElement::zero(spec.n_modes));

    for (int n = 1; n <= spec.n_modes; ++n) {
        const double qn = spec.q_rule.q(n);
        const auto w = sampler.sample(mode_seed(spec.seed, n));
        for (std::size_t j = 0; j < grid.size(); ++j)
            path.values[j].coeffs[static_cast<std::size_t>(n - 1)] = qn * w[j];
    }
    path.validate();
    return path;
}

CdtqnDiagnostic check_cdtqn(const NoiseSpec& spec, double probe_mu) {
    CdtqnDiagnostic diag;
    const int n_probe = std::max(spec.n_modes, 64);
    auto term = [&](int n) {
        const double v = spec.q_rule.q(n) / std::pow(static_cast<double>(n), probe_mu);
        return v * v;
    };
    const bool analytic = spec.q_rule.kind != QRule::Kind::file;
    double s = 0.0;
    for (int n = 1; n <= n_probe; ++n) s += term(n);
    diag.partial_sum_N = s;
    const int tail_cap = analytic ? 4 * n_probe
                                  : std::min<int>(4 * n_probe, static_cast<int>(spec.q_rule.custom.size()));
    for (int n = n_probe + 1; n <= tail_cap; ++n) s += term(n);
    diag.partial_sum_4N = s;
    diag.tail_ratio = diag.partial_sum_N > 0.0
                          ? (diag.partial_sum_4N - diag.partial_sum_N) / diag.partial_sum_N
                          : 0.0;

    if (analytic) {
        // (q_n / n^mu)^2 = n^{-2(a + mu)}: convergent iff the exponent > 1.
        const double a = spec.q_rule.kind == QRule::Kind::power ? spec.q_rule.exponent : 0.0;
        diag.verdict = (2.0 * (a + probe_mu) > 1.0) ? CdtqnDiagnostic::Verdict::convergent
                                                    : CdtqnDiagnostic::Verdict::divergent;
    } else {
        // heuristic on the observed tail growth
        if (diag.tail_ratio < 1e-3)
            diag.verdict = CdtqnDiagnostic::Verdict::convergent;
        else if (diag.tail_ratio > 0.5)
            diag.verdict = CdtqnDiagnostic::Verdict::divergent;
        else
            diag.verdict = CdtqnDiagnostic::Verdict::inconclusive;
    }
    return diag;
}

std::vector<CovarianceCheck> covariance_audit(
    const NoiseSpec& spec, std::span<const std::pair<double, double>> pairs,
    int n_samples) {
    spec.validate();
    if (n_samples < 100)
        throw std::invalid_argument("covariance_audit: n_samples >= 100 required");

    // Audit mode 1 on the minimal grid containing the requested pairs.
    std::vector<double> grid;
    for (const auto& [s, t] : pairs) {
        grid.push_back(s);
        grid.push_back(t);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty() || grid.front() != 0.0) grid.insert(grid.begin(), 0.0);

    FbmSampler sampler(spec.hurst, grid);
    const double q1 = spec.q_rule.q(1);

    std::vector<std::vector<double>> draws(static_cast<std::size_t>(n_samples));
    for (int r = 0; r < n_samples; ++r)
        draws[static_cast<std::size_t>(r)] =
            sampler.sample(mode_seed(sample_seed(spec.seed, r), 1));

    auto index_of = [&](double t) {
        const auto it = std::find(grid.begin(), grid.end(), t);
        return static_cast<std::size_t>(it - grid.begin());
    };

    std::vector<CovarianceCheck> checks;
    checks.reserve(pairs.size());
    for (const auto& [s, t] : pairs) {
        const std::size_t is = index_of(s);
        const std::size_t it = index_of(t);
        double mean = 0.0;
        for (const auto& d : draws) mean += d[is] * d[it];
        mean /= static_cast<double>(n_samples);
        double var = 0.0;
        for (const auto& d : draws) {
            const double p = d[is] * d[it] - mean;
            var += p * p;
        }
        var /= static_cast<double>(n_samples - 1);
        const double se = std::sqrt(var / static_cast<double>(n_samples));

        CovarianceCheck chk;
        chk.s = s;
        chk.t = t;
        chk.n_samples = n_samples;
        chk.empirical = q1 * q1 * mean;
        chk.theoretical = q1 * q1 * fbm_covariance(spec.hurst, s, t);
        chk.z_score = se > 0.0 ? (mean - fbm_covariance(spec.hurst, s, t)) / se : 0.0;
        checks.push_back(chk);
    }
    return checks;
}

}  // namespace rough_mild
