#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rough_mild/fbm.hpp"
#include "rough_mild/rng.hpp"

using namespace rough_mild;

namespace {

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_SUITE("fbm_noise") {

TEST_CASE("covariance closed form") {
    CHECK(fbm_covariance(0.8, 0.25, 0.75) ==
          doctest::Approx(0.20502080601613958).epsilon(1e-14));
    CHECK(fbm_covariance(0.7, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(fbm_covariance(0.7, 0.5, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fbm_covariance(0.3, 0.0, 0.6) == doctest::Approx(0.0));
}

TEST_CASE("determinism") {
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    SUBCASE("same sampler, same seed") {
        FbmSampler sampler(0.7, times);
        CHECK(sampler.sample(42) == sampler.sample(42));
        CHECK(sampler.sample(42) != sampler.sample(43));
    }
    SUBCASE("same NoiseSpec gives a bit-identical field") {
        NoiseSpec spec;
        spec.hurst = 0.6;
        spec.n_modes = 3;
        spec.time_steps = 32;
        spec.seed = 1234;
        spec.mu = 0.3;
        const auto a = noise_field(spec);
        const auto b = noise_field(spec);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a.values[i].coeffs == b.values[i].coeffs);
    }
}

TEST_CASE("marginal statistics at 1e4 samples") {
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    const int n = 10000;

    SUBCASE("Var W(1) = 1 within 3 SE for H = 0.7") {
        FbmSampler sampler(0.7, times);
        std::vector<double> w1(n);
        for (int r = 0; r < n; ++r) w1[r] = sampler.sample(sample_seed(7, r)).back();
        const double se = std::sqrt(2.0 / n);  // Var of the variance of N(0,1)
        CHECK(std::abs(sample_var(w1) - 1.0) <= 3.0 * se);
    }
    SUBCASE("E[W(1/2) W(1)] = 1/2 within 3 SE for H = 0.7") {
        FbmSampler sampler(0.7, times);
        std::vector<double> prod(n);
        for (int r = 0; r < n; ++r) {
            const auto w = sampler.sample(sample_seed(11, r));
            prod[r] = w[2] * w[4];
        }
        const double se = std::sqrt(sample_var(prod) / n);
        CHECK(std::abs(sample_mean(prod) - 0.5) <= 3.0 * se);
    }
    SUBCASE("Brownian disjoint increments are uncorrelated within 3 SE") {
        FbmSampler sampler(0.5, times);
        std::vector<double> prod(n);
        for (int r = 0; r < n; ++r) {
            const auto w = sampler.sample(sample_seed(13, r));
            prod[r] = w[2] * (w[4] - w[2]);
        }
        const double se = std::sqrt(sample_var(prod) / n);
        CHECK(std::abs(sample_mean(prod)) <= 3.0 * se);
    }
    SUBCASE("fourth moment: kurtosis 3 within 5 SE") {
        FbmSampler sampler(0.7, times);
        std::vector<double> w1(n);
        for (int r = 0; r < n; ++r) w1[r] = sampler.sample(sample_seed(17, r)).back();
        const double v = sample_var(w1);
        double m4 = 0.0;
        for (double x : w1) m4 += x * x * x * x;
        m4 /= n;
        const double kurt = m4 / (v * v);
        CHECK(std::abs(kurt - 3.0) <= 5.0 * std::sqrt(24.0 / n));
    }
    SUBCASE("self-similarity Var(W(2t))/Var(W(t)) = 2^{2H} within 3 SE") {
        const double H = 0.7;
        FbmSampler sampler(H, times);
        std::vector<double> wt(n), w2t(n);
        for (int r = 0; r < n; ++r) {
            const auto w = sampler.sample(sample_seed(19, r));
            wt[r] = w[2];   // t = 0.5
            w2t[r] = w[4];  // 2t = 1.0
        }
        const double ratio = sample_var(w2t) / sample_var(wt);
        const double want = std::pow(2.0, 2.0 * H);
        const double se_ratio = ratio * std::sqrt(4.0 / n);  // two variance estimates
        CHECK(std::abs(ratio - want) <= 3.0 * se_ratio);
    }
}

TEST_CASE("circulant embedding agrees with the dense factorization") {
    const int steps = 1 << 13;  // large enough to exercise the FFT path
    std::vector<double> times(steps + 1);
    for (int i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) / steps;

    FbmSampler circ(0.7, times);
    CHECK(circ.method_used() == FbmSampler::Method::circulant);

    // variance at t = 1 over a modest batch
    const int n = 1500;
    std::vector<double> w1(n);
    for (int r = 0; r < n; ++r) w1[r] = circ.sample(sample_seed(23, r)).back();
    const double se = std::sqrt(2.0 / n);
    CHECK(std::abs(sample_var(w1) - 1.0) <= 4.0 * se);

    // a mid-grid covariance against the closed form
    std::vector<double> prod(n);
    for (int r = 0; r < n; ++r) {
        const auto w = circ.sample(sample_seed(29, r));
        prod[r] = w[steps / 2] * w[steps];
    }
    const double se_p = std::sqrt(sample_var(prod) / n);
    CHECK(std::abs(sample_mean(prod) - fbm_covariance(0.7, 0.5, 1.0)) <= 4.0 * se_p);
}

TEST_CASE("noise field") {
    SUBCASE("zero coefficients give the zero path") {
        NoiseSpec spec;
        spec.hurst = 0.75;
        spec.n_modes = 4;
        spec.time_steps = 16;
        spec.seed = 5;
        spec.mu = 0.3;
        spec.q_rule = QRule::from_values({0.0, 0.0, 0.0, 0.0});
        const auto p = noise_field(spec);
        for (const auto& v : p.values)
            CHECK(norm_alpha({0.0}, v) == 0.0);
    }
    SUBCASE("single-mode field recovers the Hurst exponent") {
        NoiseSpec spec;
        spec.hurst = 0.75;
        spec.n_modes = 1;
        spec.time_steps = 1 << 12;
        spec.seed = 314159;
        spec.mu = 0.3;
        const auto p = noise_field(spec);
        const auto rep = holder_exponent_estimate(p, {0.0});
        CHECK(rep.exponent_estimate >= spec.hurst - 0.10);
        CHECK(rep.exponent_estimate <= spec.hurst + 0.07);
    }
    SUBCASE("mode independence: cross-covariance at (T,T) within 3 SE of 0") {
        NoiseSpec spec;
        spec.hurst = 0.7;
        spec.n_modes = 2;
        spec.time_steps = 2;
        spec.seed = 8;
        spec.mu = 0.3;
        const int n = 4000;
        std::vector<double> prod(n);
        for (int r = 0; r < n; ++r) {
            spec.seed = sample_seed(8, r);
            const auto p = noise_field(spec);
            prod[r] = p.values.back().coeffs[0] * p.values.back().coeffs[1];
        }
        const double se = std::sqrt(sample_var(prod) / n);
        CHECK(std::abs(sample_mean(prod)) <= 3.0 * se);
    }
}

TEST_CASE("summability condition diagnostics") {
    NoiseSpec spec;
    spec.hurst = 0.75;
    spec.n_modes = 10000;
    spec.time_steps = 16;
    spec.seed = 1;
    spec.mu = 0.6;

    SUBCASE("q_n = 1, mu = 0.6: convergent, partial sum matches the zeta tail estimate") {
        const auto diag = check_cdtqn(spec, 0.6);
        CHECK(diag.verdict == CdtqnDiagnostic::Verdict::convergent);
        // integral test: S_N in [zeta(1.2) - 5 N^{-0.2}, zeta(1.2) - 5 (N+1)^{-0.2}]
        const double zeta12 = 5.591582441177752;
        const double n = 10000.0;
        const double lo = zeta12 - 5.0 * std::pow(n, -0.2);
        const double hi = zeta12 - 5.0 * std::pow(n + 1.0, -0.2) + 1e-12;
        CHECK(diag.partial_sum_N >= lo * 0.99);
        CHECK(diag.partial_sum_N <= hi * 1.01);
    }
    SUBCASE("q_n = 1, mu = 0.5: divergent (harmonic)") {
        CHECK(check_cdtqn(spec, 0.5).verdict == CdtqnDiagnostic::Verdict::divergent);
    }
    SUBCASE("q_n = n^{-1}, mu = 0.1: convergent") {
        spec.q_rule = QRule::power(1.0);
        CHECK(check_cdtqn(spec, 0.1).verdict == CdtqnDiagnostic::Verdict::convergent);
    }
}

TEST_CASE("covariance audit") {
    NoiseSpec spec;
    spec.hurst = 0.8;
    spec.n_modes = 1;
    spec.time_steps = 16;
    spec.seed = 77;
    spec.mu = 0.3;
    const std::vector<std::pair<double, double>> pairs{
        {0.0, 0.5}, {1.0, 1.0}, {0.25, 0.75}};
    const auto checks = covariance_audit(spec, pairs, 2000);
    REQUIRE(checks.size() == 3);
    CHECK(checks[0].theoretical == doctest::Approx(0.0));
    CHECK(checks[1].theoretical == doctest::Approx(1.0));
    CHECK(checks[2].theoretical == doctest::Approx(0.20502080601613958).epsilon(1e-12));
    for (const auto& c : checks) CHECK(std::abs(c.z_score) <= 4.0);
    CHECK_THROWS_AS(covariance_audit(spec, pairs, 50), std::invalid_argument);
}

TEST_CASE("regularity frontier of the field") {
    // mu < alpha and gamma < H: the seminorm in scale -alpha is stable
    // across seeds; gamma = H + 0.15: it grows under grid refinement.
    NoiseSpec spec;
    spec.hurst = 0.75;
    spec.n_modes = 8;
    spec.q_rule = QRule::power(0.3);
    spec.mu = 0.2;
    const double alpha = 0.3;

    SUBCASE("subcritical gamma: bounded across 10 seeds") {
        spec.time_steps = 1 << 10;
        std::vector<double> norms;
        for (std::uint64_t s = 1; s <= 10; ++s) {
            spec.seed = s;
            const auto p = noise_field(spec, {-alpha});
            norms.push_back(holder_seminorm(p, 0.6, {-alpha}).seminorm);
        }
        const auto mm = std::minmax_element(norms.begin(), norms.end());
        CHECK(std::isfinite(*mm.second));
        CHECK(*mm.second / *mm.first < 10.0);
    }
    SUBCASE("supercritical gamma grows under refinement") {
        spec.seed = 4242;
        std::vector<double> norms;
        for (int steps : {1 << 8, 1 << 10, 1 << 12}) {
            spec.time_steps = steps;
            const auto p = noise_field(spec, {-alpha});
            norms.push_back(holder_seminorm(p, 0.90, {-alpha}).seminorm);
        }
        CHECK(norms[2] > norms[0] * 1.5);
    }
}

}  // TEST_SUITE
