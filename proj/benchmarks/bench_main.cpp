#include <benchmark/benchmark.h>

#include <cmath>

#include "rough_mild/convolution.hpp"
#include "rough_mild/fbm.hpp"
#include "rough_mild/heat.hpp"
#include "rough_mild/young.hpp"

namespace rm = rough_mild;

namespace {

rm::SampledPath field(int steps, int modes, std::uint64_t seed) {
    rm::NoiseSpec spec;
    spec.hurst = 0.75;
    spec.n_modes = modes;
    spec.time_steps = steps;
    spec.seed = seed;
    spec.mu = 0.1;
    spec.q_rule = rm::QRule::power(0.2);
    return rm::noise_field(spec, {-0.15});
}

void BM_semigroup_apply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto x = rm::SpectralElement::zero(n);
    for (int i = 0; i < n; ++i) x.coeffs[i] = 1.0 / (i + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rm::semigroup_apply(0.01, x));
    }
}
BENCHMARK(BM_semigroup_apply)->Arg(16)->Arg(64)->Arg(256);

void BM_fbm_cholesky_sample(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    std::vector<double> times(steps + 1);
    for (int i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) / steps;
    rm::FbmSampler sampler(0.75, times, rm::FbmSampler::Method::cholesky);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.sample(seed++));
    }
}
BENCHMARK(BM_fbm_cholesky_sample)->Arg(256)->Arg(1024);

void BM_fbm_circulant_sample(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    std::vector<double> times(steps + 1);
    for (int i = 0; i <= steps; ++i) times[i] = static_cast<double>(i) / steps;
    rm::FbmSampler sampler(0.75, times, rm::FbmSampler::Method::circulant);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.sample(seed++));
    }
}
BENCHMARK(BM_fbm_circulant_sample)->Arg(4096)->Arg(16384);

void BM_convolve_level(benchmark::State& state) {
    const int level = static_cast<int>(state.range(0));
    rm::AnalyticDriver X(
        [](double u) { return std::pow(u, 0.9) * rm::SpectralElement::basis(4, 1); },
        1.0, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rm::dyadic_level(X, 0.0, 1.0, 1.0, level));
    }
}
BENCHMARK(BM_convolve_level)->Arg(8)->Arg(12)->Arg(14);

void BM_young_integral(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    const auto X = field(steps, 4, 7);
    rm::OperatorPath H;
    H.times = X.times;
    for (double s : X.times) {
        const double g = std::sin(s);
        H.ops.push_back([g](const rm::SpectralElement& x) { return g * x; });
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(rm::young_integral(H, X, 1.0, 0.7));
    }
}
BENCHMARK(BM_young_integral)->Arg(1 << 10)->Arg(1 << 12);

void BM_nemytskii_apply(benchmark::State& state) {
    const int modes = static_cast<int>(state.range(0));
    const auto B = rm::nemytskii_operator(rm::sigma_sin(), 4 * modes, modes, 0.2, 0.15);
    auto u = rm::SpectralElement::zero(modes);
    auto phi = rm::SpectralElement::zero(modes);
    for (int i = 0; i < modes; ++i) {
        u.coeffs[i] = 1.0 / (i + 1);
        phi.coeffs[i] = 1.0 / (i + 2);
    }
    const auto op = B.apply(u);
    for (auto _ : state) {
        benchmark::DoNotOptimize(op(phi));
    }
}
BENCHMARK(BM_nemytskii_apply)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
