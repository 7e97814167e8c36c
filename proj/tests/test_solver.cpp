#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rough_mild/heat.hpp"
#include "rough_mild/rng.hpp"
#include "rough_mild/solver.hpp"

using namespace rough_mild;

namespace {

RoughOperator identity_operator(double alpha) {
    RoughOperator B;
    B.apply = [](const SpectralElement&) -> LinearOp {
        return [](const SpectralElement& x) { return x; };
    };
    B.derivative = [](const SpectralElement&, const SpectralElement&,
                      const SpectralElement& x) {
        return SpectralElement::zero(x.n_modes());
    };
    B.bound_M_B = [](double) { return 0.0; };
    B.bound_M_C = [](double) { return 0.0; };
    B.global_M_B = 0.0;
    B.noise_scale = ScaleIndex{-alpha};
    B.output_scale = ScaleIndex{-alpha};
    return B;
}

RoughOperator zero_operator(double alpha) {
    RoughOperator B = identity_operator(alpha);
    B.apply = [](const SpectralElement&) -> LinearOp {
        return [](const SpectralElement& x) { return 0.0 * x; };
    };
    return B;
}

SolverConfig test_config() {
    SolverConfig cfg;
    cfg.conv.alpha = 0.15;
    cfg.conv.gamma = 0.72;
    cfg.conv.delta = 0.2;
    cfg.conv.kappa = 0.31;
    cfg.conv.max_level = 9;
    cfg.conv.tol = 5e-3;
    cfg.picard_tol = 1e-6;
    cfg.window_grid_depth = 4;
    return cfg;
}

SampledPath ramp_path(int cells, double horizon, int n_modes) {
    SampledPath p;
    p.scale = ScaleIndex{-0.15};
    for (int i = 0; i <= cells; ++i) {
        const double t = horizon * static_cast<double>(i) / cells;
        p.times.push_back(t);
        p.values.push_back(t * SpectralElement::basis(n_modes, 1));
    }
    return p;
}

SampledPath zero_path(int cells, double horizon, int n_modes) {
    SampledPath p;
    p.scale = ScaleIndex{-0.15};
    for (int i = 0; i <= cells; ++i) {
        p.times.push_back(horizon * static_cast<double>(i) / cells);
        p.values.push_back(SpectralElement::zero(n_modes));
    }
    return p;
}

SampledPath scaled_noise(std::uint64_t seed, int steps, int n_modes, double scale,
                         double alpha) {
    NoiseSpec spec;
    spec.hurst = 0.75;
    spec.n_modes = n_modes;
    spec.time_steps = steps;
    spec.seed = seed;
    spec.mu = 0.1;
    spec.q_rule = QRule::power(0.2);
    auto p = noise_field(spec, ScaleIndex{-alpha});
    for (auto& v : p.values) v *= scale;
    return p;
}

}  // namespace

TEST_SUITE("nonlinear_solver") {

TEST_CASE("gamma map trivial cases") {
    const auto cfg = test_config();
    const auto y0 = SpectralElement::basis(2, 1);
    const auto X = ramp_path(256, 1.0, 2);

    // arbitrary Y on the coarse grid
    SampledPath Y;
    Y.scale = ScaleIndex{cfg.conv.delta};
    for (int i = 0; i <= 16; ++i) {
        Y.times.push_back(static_cast<double>(i) / 16.0);
        Y.values.push_back(std::sin(1.0 + i) * SpectralElement::basis(2, 1));
    }

    SUBCASE("B = 0 gives the free flow S(t) y0") {
        const auto G = gamma_map(Y, X, y0, zero_operator(0.15), cfg);
        for (std::size_t i = 0; i < G.size(); ++i) {
            const auto want = semigroup_apply(G.times[i], y0);
            CHECK(norm_alpha({0.0}, G.values[i] - want) <= 1e-13);
        }
    }
    SUBCASE("zero driver gives the free flow") {
        const auto Z = zero_path(256, 1.0, 2);
        const auto G = gamma_map(Y, Z, y0, identity_operator(0.15), cfg);
        for (std::size_t i = 0; i < G.size(); ++i) {
            const auto want = semigroup_apply(G.times[i], y0);
            CHECK(norm_alpha({0.0}, G.values[i] - want) <= 1e-13);
        }
    }
    SUBCASE("additive case is independent of Y and matches the closed form") {
        const auto zero_y0 = SpectralElement::zero(2);
        const auto G = gamma_map(Y, X, zero_y0, identity_operator(0.15), cfg);
        const double lam = eigenvalue(1);
        for (std::size_t i = 0; i < G.size(); ++i) {
            const double t = G.times[i];
            const double want = (1.0 - std::exp(-lam * t)) / lam;
            CHECK(G.values[i].coeffs[0] == doctest::Approx(want).epsilon(2e-4));
            CHECK(std::abs(G.values[i].coeffs[1]) <= 1e-12);
        }
    }
}

TEST_CASE("ball parameters") {
    const auto cfg = test_config();
    const auto y0 = SpectralElement::basis(2, 1);

    SUBCASE("zero driver: R from the initial value, tau capped") {
        const auto X = zero_path(64, 1.0, 2);
        const auto ball = ball_parameters(y0, X, identity_operator(0.15), 0.5, cfg);
        const double want_r =
            norm_alpha({cfg.conv.delta + cfg.conv.kappa}, y0) / (1.0 - 0.5);
        CHECK(ball.radius == doctest::Approx(want_r).epsilon(1e-12));
        CHECK(ball.tau == doctest::Approx(1.0));
    }
    SUBCASE("R grows with theta") {
        const auto X = zero_path(64, 1.0, 2);
        const auto b1 = ball_parameters(y0, X, identity_operator(0.15), 0.5, cfg);
        const auto b2 = ball_parameters(y0, X, identity_operator(0.15), 0.9, cfg);
        CHECK(b2.radius > b1.radius);
    }
    SUBCASE("global bound makes tau independent of the state") {
        const auto X = scaled_noise(5, 1 << 10, 2, 0.05, cfg.conv.alpha);
        const auto sigma = sigma_tanh();
        const auto B = rank_one_operator(sigma, SpectralElement::basis(2, 1),
                                         cfg.conv.delta, cfg.conv.alpha);
        REQUIRE(B.global_M_B.has_value());
        const auto ball_a = ball_parameters(y0, X, B, 0.5, cfg);
        const auto ball_b =
            ball_parameters(17.0 * SpectralElement::basis(2, 2), X, B, 0.5, cfg);
        CHECK(ball_a.tau == ball_b.tau);
        CHECK(ball_a.tau <= 1.0);
        CHECK(ball_a.radius != ball_b.radius);
    }
    SUBCASE("hopeless bound reports step-too-small") {
        const auto X = scaled_noise(6, 1 << 8, 2, 1.0, cfg.conv.alpha);
        RoughOperator B = identity_operator(0.15);
        B.global_M_B = 1e12;
        B.bound_M_B = [](double) { return 1e12; };
        CHECK_THROWS_AS(ball_parameters(y0, X, B, 0.5, cfg), StepTooSmallError);
    }
}

TEST_CASE("picard solve: free flow and additive reductions") {
    auto cfg = test_config();
    const auto y0 = SpectralElement::basis(2, 1);

    SUBCASE("B = 0 reproduces S(t) y0 on every grid point") {
        const auto X = scaled_noise(7, 1 << 8, 2, 1.0, cfg.conv.alpha);
        const auto rep = picard_solve(y0, X, zero_operator(0.15), 1.0, std::nullopt, cfg);
        CHECK_FALSE(rep.exploded);
        CHECK(rep.final_time == doctest::Approx(1.0));
        for (std::size_t i = 0; i < rep.solution.size(); ++i) {
            const auto want = semigroup_apply(rep.solution.times[i], y0);
            CHECK(norm_alpha({0.0}, rep.solution.values[i] - want) <= 1e-12);
        }
        for (const auto& w : rep.windows) CHECK(w.contraction_factor < 1.0);
    }
    SUBCASE("additive case: one Picard sweep, equals free flow + convolution") {
        cfg.forced_tau = 1.0;
        cfg.conv.fixed_level = 4;
        const auto X = scaled_noise(11, 1 << 8, 2, 1.0, cfg.conv.alpha);
        const auto rep = picard_solve(y0, X, identity_operator(0.15), 1.0, std::nullopt, cfg);
        CHECK_FALSE(rep.exploded);
        REQUIRE(rep.windows.size() == 1);
        CHECK(rep.windows[0].picard_iters <= 2);

        SampledDriver D(X);
        const auto conv = convolve_path(D, rep.solution.times, cfg.conv);
        for (std::size_t i = 0; i < rep.solution.size(); ++i) {
            const auto want =
                semigroup_apply(rep.solution.times[i], y0) + conv.path.values[i];
            CHECK(norm_alpha({0.0}, rep.solution.values[i] - want) <= 1e-10);
        }
    }
}

TEST_CASE("picard solve: uniqueness via two initial guesses") {
    auto cfg = test_config();
    cfg.forced_tau = 0.5;
    cfg.conv.fixed_level = 6;
    cfg.picard_tol = 1e-7;
    const auto X = scaled_noise(23, 1 << 11, 4, 0.05, cfg.conv.alpha);
    // sigma needs an even component: products of two sine-span functions are
    // cosine series, so the projected coupling of an odd sigma vanishes
    const auto B = nemytskii_operator(sigma_poly(0.4, 0.0, 0.5), 16, 4,
                                      cfg.conv.delta, cfg.conv.alpha);
    const auto y0 = 0.1 * SpectralElement::basis(4, 1);

    auto cfg_frozen = cfg;
    cfg_frozen.initial_guess = PicardInitialGuess::frozen_state;

    const auto r1 = picard_solve(y0, X, B, 1.0, std::nullopt, cfg);
    const auto r2 = picard_solve(y0, X, B, 1.0, std::nullopt, cfg_frozen);
    CHECK_FALSE(r1.exploded);
    CHECK_FALSE(r2.exploded);
    REQUIRE(r1.windows.size() == 2);
    REQUIRE(r1.solution.times == r2.solution.times);
    for (std::size_t i = 0; i < r1.solution.size(); ++i)
        CHECK(norm_alpha({cfg.conv.delta}, r1.solution.values[i] - r2.solution.values[i]) <=
              10.0 * cfg.picard_tol);
    for (const auto& w : r1.windows) {
        CHECK(w.contraction_factor < 1.0);
        CHECK(w.picard_iters >= 2);
    }

    // fixed-point residual of the accepted first window: |Y - Gamma(Y)| <= 2 tol
    const std::size_t coarse = std::size_t{1} << cfg.window_grid_depth;
    SampledPath Yw;
    Yw.scale = ScaleIndex{cfg.conv.delta};
    for (std::size_t i = 0; i <= coarse; ++i) {
        Yw.times.push_back(r1.solution.times[i]);
        Yw.values.push_back(r1.solution.values[i]);
    }
    SampledPath Xw;
    Xw.scale = X.scale;
    const std::size_t half = (X.size() - 1) / 2;
    for (std::size_t i = 0; i <= half; ++i) {
        Xw.times.push_back(X.times[i]);
        Xw.values.push_back(X.values[i]);
    }
    const auto GYw = gamma_map(Yw, Xw, y0, B, cfg);
    SampledPath resid;
    resid.times = Yw.times;
    resid.scale = Yw.scale;
    for (std::size_t i = 0; i < Yw.size(); ++i)
        resid.values.push_back(GYw.values[i] - Yw.values[i]);
    CHECK(window_norm(resid, cfg.conv.kappa, {cfg.conv.delta}) <= 2.0 * cfg.picard_tol);
}

TEST_CASE("Young admissibility gate: gamma + kappa must exceed 1") {
    auto cfg = test_config();
    cfg.conv.gamma = 0.72;
    cfg.conv.kappa = 0.2;  // 0.92 <= 1
    const auto X = scaled_noise(51, 1 << 8, 2, 1.0, cfg.conv.alpha);
    CHECK_THROWS_AS(picard_solve(SpectralElement::zero(2), X, identity_operator(0.15),
                                 1.0, std::nullopt, cfg),
                    AdmissibilityError);
}

TEST_CASE("window concatenation consistency") {
    auto cfg = test_config();
    cfg.conv.fixed_level = 5;
    cfg.picard_tol = 1e-8;
    const auto X = scaled_noise(29, 1 << 11, 2, 0.05, cfg.conv.alpha);
    const auto B = nemytskii_operator(sigma_poly(0.4, 0.0, 0.5), 12, 2,
                                      cfg.conv.delta, cfg.conv.alpha);
    const auto y0 = SpectralElement::zero(2);

    auto one_pass = cfg;
    one_pass.forced_tau = 0.5;
    auto two_pass = cfg;
    two_pass.forced_tau = 0.25;

    const auto r1 = picard_solve(y0, X, B, 0.5, std::nullopt, one_pass);
    const auto r2 = picard_solve(y0, X, B, 0.5, std::nullopt, two_pass);
    REQUIRE_FALSE(r1.exploded);
    REQUIRE_FALSE(r2.exploded);
    REQUIRE(r2.windows.size() == 2);

    for (std::size_t i = 0; i < r1.solution.size(); ++i) {
        const double t = r1.solution.times[i];
        for (std::size_t j = 0; j < r2.solution.size(); ++j) {
            if (r2.solution.times[j] == t) {
                CHECK(norm_alpha({cfg.conv.delta},
                                 r1.solution.values[i] - r2.solution.values[j]) <=
                      10.0 * std::max(cfg.picard_tol, cfg.conv.tol));
            }
        }
    }
}

TEST_CASE("ball invariance and contraction under Gamma (small noise)") {
    auto cfg = test_config();
    const auto X = scaled_noise(31, 1 << 13, 2, 0.005, cfg.conv.alpha);
    const auto B = nemytskii_operator(sigma_poly(0.4, 0.0, 0.5), 12, 2,
                                      cfg.conv.delta, cfg.conv.alpha);
    const auto y0 = 0.05 * SpectralElement::basis(2, 1);

    const auto ball = ball_parameters(y0, X, B, 0.5, cfg);
    REQUIRE(ball.tau >= 1.0 / 32);  // small noise keeps the formula step usable

    // window slice [0, tau] of the driver, coarse grid on top of it
    const std::size_t tau_cells = static_cast<std::size_t>(
        std::nearbyint(ball.tau / (X.times[1] - X.times[0])));
    SampledPath Xw;
    Xw.scale = X.scale;
    for (std::size_t i = 0; i <= tau_cells; ++i) {
        Xw.times.push_back(X.times[i]);
        Xw.values.push_back(X.values[i]);
    }
    const std::size_t coarse = 16;
    REQUIRE(tau_cells % coarse == 0);
    const std::size_t stride = tau_cells / coarse;
    int avail = 0;
    for (std::size_t s = stride; (s & 1u) == 0u; s >>= 1u) ++avail;
    REQUIRE(avail >= 3);
    cfg.conv.fixed_level = avail;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    auto random_ball_path = [&]() {
        // scaled semigroup flows y0 + c v stay in the ball for small c
        SpectralElement dir = SpectralElement::zero(2);
        for (auto& c : dir.coeffs) c = 0.02 * dist(rng);
        SampledPath Y;
        Y.scale = ScaleIndex{cfg.conv.delta};
        for (std::size_t i = 0; i <= coarse; ++i) {
            Y.times.push_back(Xw.times[i * stride]);
            Y.values.push_back(semigroup_apply(Xw.times[i * stride], y0 + dir));
        }
        return Y;
    };

    for (int trial = 0; trial < 5; ++trial) {
        const auto Y = random_ball_path();
        const auto Yp = random_ball_path();
        const auto GY = gamma_map(Y, Xw, y0, B, cfg);
        const auto GYp = gamma_map(Yp, Xw, y0, B, cfg);

        // invariance: H_kappa and the sup in the delta+kappa norm stay <= R
        CHECK(holder_seminorm(GY, cfg.conv.kappa, {cfg.conv.delta}).seminorm <=
              ball.radius);
        double sup = 0.0;
        for (const auto& v : GY.values)
            sup = std::max(sup, norm_alpha({cfg.conv.delta + cfg.conv.kappa}, v));
        CHECK(sup <= ball.radius);

        // contraction between probe pairs
        SampledPath dY, dG;
        dY.times = Y.times;
        dG.times = Y.times;
        dY.scale = dG.scale = ScaleIndex{cfg.conv.delta};
        for (std::size_t i = 0; i < Y.size(); ++i) {
            dY.values.push_back(Y.values[i] - Yp.values[i]);
            dG.values.push_back(GY.values[i] - GYp.values[i]);
        }
        const double denom = window_norm(dY, cfg.conv.kappa, {cfg.conv.delta});
        if (denom > 1e-12)
            CHECK(window_norm(dG, cfg.conv.kappa, {cfg.conv.delta}) / denom < 1.0);
    }
}

TEST_CASE("explosion: hopeless coupling exhausts the retries") {
    auto cfg = test_config();
    cfg.max_tau_retries = 4;
    cfg.max_picard_iters = 8;
    const auto X = scaled_noise(41, 1 << 10, 2, 1.0, cfg.conv.alpha);
    // state-proportional coupling with an enormous gain: every window fails
    // its contraction measurement
    RoughOperator B;
    B.noise_scale = ScaleIndex{-cfg.conv.alpha};
    B.output_scale = ScaleIndex{-cfg.conv.alpha};
    B.epsilon = 1.0;
    const double gain = 1e7;
    B.apply = [gain](const SpectralElement& u) -> LinearOp {
        const double c = gain * u.coeffs[0];
        return [c](const SpectralElement& x) { return c * x; };
    };
    B.derivative = [gain](const SpectralElement&, const SpectralElement& z,
                          const SpectralElement& x) {
        return (gain * z.coeffs[0]) * x;
    };
    B.bound_M_B = [gain](double) { return gain; };
    B.bound_M_C = [](double) { return 0.0; };

    const auto rep = picard_solve(SpectralElement::basis(2, 1), X, B, 1.0,
                                  std::nullopt, cfg);
    CHECK(rep.exploded);
    CHECK(rep.final_time == 0.0);
    CHECK(rep.windows.empty());
}

TEST_CASE("global Lipschitz coupling runs to an arbitrary horizon") {
    auto cfg = test_config();
    cfg.conv.fixed_level = 5;
    cfg.picard_tol = 1e-6;

    NoiseSpec spec;
    spec.hurst = 0.75;
    spec.n_modes = 2;
    spec.time_steps = 1 << 12;
    spec.seed = 43;
    spec.mu = 0.1;
    spec.horizon = 2.0;
    spec.q_rule = QRule::power(0.2);
    auto X = noise_field(spec, ScaleIndex{-cfg.conv.alpha});
    for (auto& v : X.values) v *= 0.1;

    const auto B = rank_one_operator(sigma_tanh(), SpectralElement::basis(2, 1),
                                     cfg.conv.delta, cfg.conv.alpha);
    REQUIRE(B.global_M_B.has_value());
    const auto rep = picard_solve(0.2 * SpectralElement::basis(2, 1), X, B, 2.0,
                                  std::nullopt, cfg);
    CHECK_FALSE(rep.exploded);
    CHECK(rep.final_time == doctest::Approx(2.0));
    CHECK(rep.windows.size() >= 2);  // tau <= 1 forces at least two windows
    for (const auto& w : rep.windows) CHECK(w.contraction_factor < 1.0);
}

TEST_CASE("ito map probe") {
    auto cfg = test_config();
    const auto X1 = scaled_noise(37, 1 << 10, 2, 1.0, cfg.conv.alpha);
    const auto B = identity_operator(cfg.conv.alpha);
    const auto y0 = SpectralElement::zero(2);

    SUBCASE("identical drivers are degenerate") {
        const auto probe = ito_map_probe(X1, X1, y0, B, cfg);
        CHECK(probe.degenerate);
        CHECK(probe.ratio == 0.0);
    }
    SUBCASE("additive ratios are eta-independent") {
        std::vector<double> ratios;
        for (double eta : {1e-1, 1e-2, 1e-3}) {
            auto X2 = X1;
            for (std::size_t i = 0; i < X2.size(); ++i)
                X2.values[i] += eta * X2.times[i] * SpectralElement::basis(2, 1);
            const auto probe = ito_map_probe(X1, X2, y0, B, cfg);
            CHECK_FALSE(probe.degenerate);
            ratios.push_back(probe.ratio);
        }
        const double lo = *std::min_element(ratios.begin(), ratios.end());
        const double hi = *std::max_element(ratios.begin(), ratios.end());
        CHECK(hi / lo < 3.0);
    }
}

TEST_CASE("drift term against the constant-forcing closed form") {
    auto cfg = test_config();
    cfg.forced_tau = 1.0;
    cfg.window_grid_depth = 5;
    const auto X = zero_path(1 << 8, 1.0, 1);
    const auto y0 = SpectralElement::basis(1, 1);
    const double c = 0.7;
    DriftTerm F;
    F.apply = [c](const SpectralElement& u) {
        return c * SpectralElement::basis(u.n_modes(), 1);
    };
    F.lipschitz_bound = 0.0;

    const auto rep = picard_solve(y0, X, zero_operator(0.15), 1.0, F, cfg);
    REQUIRE_FALSE(rep.exploded);
    const double lam = eigenvalue(1);
    for (std::size_t i = 0; i < rep.solution.size(); ++i) {
        const double t = rep.solution.times[i];
        const double want = std::exp(-lam * t) + c * (1.0 - std::exp(-lam * t)) / lam;
        CHECK(rep.solution.values[i].coeffs[0] == doctest::Approx(want).epsilon(1e-4));
    }
}

}  // TEST_SUITE
