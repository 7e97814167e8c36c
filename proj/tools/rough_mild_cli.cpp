// rough-mild: pathwise mild solutions of dY = -AY dt + B(Y) dX on the
// spectral Dirichlet Laplacian, driven by fractional-Brownian noise.
//
// Subcommands: noise-gen, convolve, solve-linear, solve-nonlinear,
// rate-study, check.  All CSV outputs use shortest round-trip decimals and
// LF line endings; identical inputs and seeds reproduce identical bytes.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "rough_mild/config.hpp"
#include "rough_mild/convolution.hpp"
#include "rough_mild/detail/numerics.hpp"
#include "rough_mild/heat.hpp"
#include "rough_mild/young.hpp"

namespace rm = rough_mild;

namespace {

std::uint64_t env_seed_or(std::uint64_t fallback) {
    if (const char* env = std::getenv("ROUGH_MILD_SEED"))
        return std::stoull(env);
    return fallback;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

rm::SampledPath load_driver_csv(const std::string& path, rm::ScaleIndex scale) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open driver file " + path);
    return rm::read_path_csv(in, scale);
}

// anchored geometric envelope for the rate tables: matches the first studied
// level with a factor-2 headroom and decays at the configured rate
std::vector<double> envelope(const std::vector<double>& increments,
                             const std::vector<int>& levels, double rate) {
    std::vector<double> rhs(increments.size(), 0.0);
    double anchor = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        if (increments[i] > 0.0) {
            anchor = 2.0 * increments[i] * std::exp2(rate * levels[i]);
            break;
        }
    }
    for (std::size_t i = 0; i < increments.size(); ++i)
        rhs[i] = anchor * std::exp2(-rate * levels[i]);
    return rhs;
}

struct LevelRangeArg {
    int lo = 4;
    int hi = 14;
};

LevelRangeArg parse_levels(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos)
        throw CLI::ValidationError("--levels", "expected LO..HI");
    LevelRangeArg r;
    r.lo = std::stoi(text.substr(0, dots));
    r.hi = std::stoi(text.substr(dots + 2));
    if (r.lo < 0 || r.hi <= r.lo)
        throw CLI::ValidationError("--levels", "need 0 <= LO < HI");
    return r;
}

int run_noise_gen(const std::string& out, double hurst, double mu, int modes,
                  int steps, double horizon, std::uint64_t seed,
                  const std::string& q_rule, const std::string& q_file) {
    rm::NoiseSpec spec;
    spec.hurst = hurst;
    spec.mu = mu;
    spec.n_modes = modes;
    spec.time_steps = steps;
    spec.horizon = horizon;
    spec.seed = env_seed_or(seed);
    spec.q_rule = q_file.empty() ? rm::QRule::parse(q_rule)
                                 : rm::QRule::parse("file:" + q_file);
    const auto path = rm::noise_field(spec);
    std::ostringstream os;
    rm::write_path_csv(os, path);
    write_file(out, os.str());
    return 0;
}

int run_convolve(const std::string& driver_file, const std::string& out,
                 const std::string& rates, rm::DyadicConvolutionConfig cfg) {
    cfg.validate();
    const auto path = load_driver_csv(driver_file, rm::ScaleIndex{-cfg.alpha});
    rm::SampledDriver driver(path);

    const std::size_t cells = path.size() - 1;
    int depth = 0;
    while ((std::size_t{1} << (depth + 1)) <= cells && depth < 6) ++depth;

    rm::SampledPath solution;
    solution.scale = rm::ScaleIndex{cfg.delta};
    std::vector<double> final_increments;
    int starved_times = 0;
    for (int i = 0; i <= (1 << depth); ++i) {
        const double t = driver.horizon() * static_cast<double>(i) / (1 << depth);
        solution.times.push_back(t);
        if (i == 0) {
            solution.values.push_back(rm::SpectralElement::zero(driver.n_modes()));
            continue;
        }
        std::vector<double>* sink = (i == (1 << depth)) ? &final_increments : nullptr;
        try {
            solution.values.push_back(rm::convolve_window(driver, 0.0, t, t, cfg, sink));
        } catch (const rm::NonConvergenceError&) {
            // the level budget (or the driver resolution at this output time)
            // ran out before tol; keep the deepest resolvable level
            auto fallback = cfg;
            fallback.fixed_level = std::min(cfg.max_level, driver.max_level_at(t));
            if (sink) sink->clear();
            solution.values.push_back(
                rm::convolve_window(driver, 0.0, t, t, fallback, sink));
            ++starved_times;
        }
    }
    if (starved_times > 0)
        std::cerr << "rough-mild: tolerance not reached at " << starved_times
                  << " output time(s); kept the deepest resolvable level\n";

    std::ostringstream os;
    rm::write_path_csv(os, solution);
    write_file(out, os.str());

    if (!rates.empty()) {
        std::vector<int> levels(final_increments.size());
        for (std::size_t i = 0; i < levels.size(); ++i)
            levels[i] = static_cast<int>(i) + 1;
        const double rate = cfg.beta_value() + cfg.gamma - 1.0;
        const auto rhs = envelope(final_increments, levels, rate);
        std::ostringstream ros;
        rm::write_rate_csv(ros, levels, final_increments, rhs);
        write_file(rates, ros.str());
    }
    return 0;
}

int run_solve_linear(const std::string& spec_file, const std::string& out) {
    auto cfg = rm::load_run_config(spec_file);
    rm::apply_env_seed_override(cfg);
    const auto report =
        rm::solve_linear_heat(cfg.noise, cfg.budget, cfg.solver.conv, cfg.output_depth);
    std::ostringstream os;
    rm::write_path_csv(os, report.solution);
    write_file(out, os.str());
    return 0;
}

int run_solve_nonlinear(const std::string& spec_file, const std::string& sigma_name,
                        double horizon, const std::string& out,
                        const std::string& meta) {
    auto cfg = rm::load_run_config(spec_file);
    rm::apply_env_seed_override(cfg);
    const auto sigma = rm::parse_sigma(sigma_name);
    const auto report =
        rm::solve_nonlinear_heat(cfg.noise, sigma, cfg.budget, cfg.solver, horizon);
    std::ostringstream os;
    if (report.solution.size() >= 2) {
        rm::write_path_csv(os, report.solution);
    } else {
        // exploded before the first window: emit the degenerate initial row
        std::string line = "t";
        for (int n = 1; n <= cfg.noise.n_modes; ++n) line += ",c" + std::to_string(n);
        line += "\n0";
        for (int n = 1; n <= cfg.noise.n_modes; ++n) line += ",0";
        line += '\n';
        os << line;
    }
    write_file(out, os.str());
    if (!meta.empty()) {
        std::ostringstream ms;
        rm::write_run_meta(ms, report, cfg.budget);
        write_file(meta, ms.str());
    }
    if (report.exploded)
        std::cerr << "solve stopped at t = " << report.final_time
                  << " (no admissible window remained)\n";
    return 0;
}

int run_rate_study(const std::string& which, const LevelRangeArg& levels,
                   const std::string& out) {
    std::vector<int> level_col;
    std::vector<double> increments;
    double rate = 0.0;

    if (which == "dyadic") {
        // the canonical level-decay study on X(t) = t^{0.9} (e_1 + e_3)
        rm::AnalyticDriver X(
            [](double u) {
                return std::pow(u, 0.9) * (rm::SpectralElement::basis(3, 1) +
                                           rm::SpectralElement::basis(3, 3));
            },
            1.0, 3);
        const double beta = 0.45, gamma = 0.9, delta = 0.2;
        rate = beta + gamma - 1.0;
        rm::SpectralElement prev = rm::dyadic_level(X, 0.0, 1.0, 1.0, levels.lo - 1);
        for (int n = levels.lo; n <= levels.hi; ++n) {
            const rm::SpectralElement cur = rm::dyadic_level(X, 0.0, 1.0, 1.0, n);
            level_col.push_back(n);
            increments.push_back(rm::norm_alpha({delta}, cur - prev));
            prev = cur;
        }
    } else if (which == "young") {
        // left-endpoint refinement study of int_0^1 s ds
        rate = 1.0;  // alpha + gamma - 1 with alpha = gamma = 1
        double prev_value = 0.0;
        bool have_prev = false;
        for (int n = levels.lo; n <= levels.hi; ++n) {
            const int m = 1 << n;
            std::vector<double> times(static_cast<std::size_t>(m) + 1);
            for (int i = 0; i <= m; ++i) times[static_cast<std::size_t>(i)] =
                static_cast<double>(i) / m;
            rm::SampledPath Xp;
            Xp.times = times;
            for (double t : times)
                Xp.values.push_back(t * rm::SpectralElement::basis(1, 1));
            rm::OperatorPath H;
            H.times = times;
            for (double s : times)
                H.ops.push_back([s](const rm::SpectralElement& x) { return s * x; });
            const auto res = rm::young_integral(H, Xp, 1.0, 1.0);
            const double value = res.path.values.back().coeffs[0];
            if (have_prev) {
                level_col.push_back(n);
                increments.push_back(std::abs(value - prev_value));
            }
            prev_value = value;
            have_prev = true;
        }
    } else {
        throw CLI::ValidationError("--which", "expected dyadic | young");
    }

    const auto rhs = envelope(increments, level_col, rate);
    std::ostringstream os;
    rm::write_rate_csv(os, level_col, increments, rhs);
    write_file(out, os.str());
    return 0;
}

int run_check(const std::string& spec_file) {
    auto cfg = rm::load_run_config(spec_file);
    const auto report = rm::check_conditions(cfg.budget);
    rm::print_condition_report(std::cout, report);
    return report.nonlinear_solvable ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathwise mild solutions of dY = -AY dt + B(Y) dX"};
    app.require_subcommand(1);

    // noise-gen
    auto* noise = app.add_subcommand("noise-gen", "sample a cylindrical fBm field");
    double hurst = 0.5, mu = 0.5, horizon = 1.0;
    int modes = 1, steps = 256;
    std::uint64_t seed = 0;
    std::string q_rule = "const", q_file, out_file, rates_file;
    noise->add_option("--hurst", hurst, "Hurst index in (0,1)")->required();
    noise->add_option("--mu", mu, "decay index")->required();
    noise->add_option("--modes", modes, "number of spatial modes")->required();
    noise->add_option("--steps", steps, "dyadic time steps (power of two)")->required();
    noise->add_option("--horizon", horizon, "time horizon")->required();
    noise->add_option("--seed", seed, "64-bit master seed")->required();
    noise->add_option("--q-rule", q_rule, "const | pow:a");
    noise->add_option("--q-file", q_file, "one q_n per line");
    noise->add_option("--out", out_file, "output CSV")->required();

    // convolve
    auto* conv = app.add_subcommand("convolve", "mild convolution of a sampled driver");
    rm::DyadicConvolutionConfig ccfg;
    double beta_arg = -1.0;
    std::string driver_file;
    conv->add_option("--driver", driver_file, "driver CSV (t,c1..cN)")->required();
    conv->add_option("--alpha", ccfg.alpha, "driver scale deficit")->required();
    conv->add_option("--gamma", ccfg.gamma, "driver Holder exponent")->required();
    conv->add_option("--delta", ccfg.delta, "output scale")->required();
    conv->add_option("--kappa", ccfg.kappa, "output Holder exponent")->required();
    conv->add_option("--beta", beta_arg, "proof exponent (default: admissible midpoint)");
    conv->add_option("--max-level", ccfg.max_level, "dyadic level budget")->required();
    conv->add_option("--tol", ccfg.tol, "level-increment stopping tolerance")->required();
    conv->add_option("--out", out_file, "solution CSV")->required();
    conv->add_option("--rates", rates_file, "level,increment_norm,bound_rhs CSV");

    // solve-linear
    auto* lin = app.add_subcommand("solve-linear", "additive linear solve Y = S(X)");
    std::string spec_file;
    lin->add_option("--spec", spec_file, "run.cfg")->required();
    lin->add_option("--out", out_file, "solution CSV")->required();

    // solve-nonlinear
    auto* nonlin = app.add_subcommand("solve-nonlinear", "Picard solve with a Nemytskii coefficient");
    std::string sigma_name = "sin", meta_file;
    double nl_horizon = 1.0;
    nonlin->add_option("--spec", spec_file, "run.cfg")->required();
    nonlin->add_option("--sigma", sigma_name, "sin | tanh | poly:c0,c1,c2")->required();
    nonlin->add_option("--horizon", nl_horizon, "solve horizon")->required();
    nonlin->add_option("--out", out_file, "solution CSV")->required();
    nonlin->add_option("--meta", meta_file, "run_meta sidecar");

    // rate-study
    auto* rates = app.add_subcommand("rate-study", "refinement-rate tables");
    std::string which = "dyadic", levels_text = "4..14";
    rates->add_option("--which", which, "dyadic | young")->required();
    rates->add_option("--levels", levels_text, "LO..HI");
    rates->add_option("--out", out_file, "rates CSV")->required();

    // check
    auto* check = app.add_subcommand("check", "admissibility verdicts for a run.cfg");
    check->add_option("--spec", spec_file, "run.cfg")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(noise))
            return run_noise_gen(out_file, hurst, mu, modes, steps, horizon, seed,
                                 q_rule, q_file);
        if (app.got_subcommand(conv)) {
            if (beta_arg > 0.0) ccfg.beta = beta_arg;
            return run_convolve(driver_file, out_file, rates_file, ccfg);
        }
        if (app.got_subcommand(lin)) return run_solve_linear(spec_file, out_file);
        if (app.got_subcommand(nonlin))
            return run_solve_nonlinear(spec_file, sigma_name, nl_horizon, out_file,
                                       meta_file);
        if (app.got_subcommand(rates))
            return run_rate_study(which, parse_levels(levels_text), out_file);
        if (app.got_subcommand(check)) return run_check(spec_file);
    } catch (const std::exception& e) {
        std::cerr << "rough-mild: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
