#include "rough_mild/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rough_mild {

void RunConfig::sync() {
    solver.conv.alpha = budget.alpha;
    solver.conv.gamma = budget.gamma;
    solver.conv.delta = budget.delta;
    solver.conv.kappa = budget.kappa;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("run config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "hurst") cfg.noise.hurst = std::stod(value);
        else if (key == "q_rule") cfg.noise.q_rule = QRule::parse(value);
        else if (key == "mu") { cfg.noise.mu = std::stod(value); cfg.budget.mu = cfg.noise.mu; }
        else if (key == "n_modes") cfg.noise.n_modes = std::stoi(value);
        else if (key == "time_steps") cfg.noise.time_steps = std::stoi(value);
        else if (key == "horizon") cfg.noise.horizon = std::stod(value);
        else if (key == "seed") cfg.noise.seed = std::stoull(value);
        else if (key == "H") cfg.budget.H = std::stod(value);
        else if (key == "gamma") cfg.budget.gamma = std::stod(value);
        else if (key == "alpha") cfg.budget.alpha = std::stod(value);
        else if (key == "delta") cfg.budget.delta = std::stod(value);
        else if (key == "kappa") cfg.budget.kappa = std::stod(value);
        else if (key == "rho") cfg.budget.rho = std::stod(value);
        else if (key == "p") cfg.budget.p = std::stod(value);
        else if (key == "p_hat") cfg.budget.p_hat = std::stod(value);
        else if (key == "tol") cfg.solver.conv.tol = std::stod(value);
        else if (key == "max_level") cfg.solver.conv.max_level = std::stoi(value);
        else if (key == "beta") cfg.solver.conv.beta = std::stod(value);
        else if (key == "theta") cfg.solver.theta = std::stod(value);
        else if (key == "picard_tol") cfg.solver.picard_tol = std::stod(value);
        else if (key == "max_picard_iters") cfg.solver.max_picard_iters = std::stoi(value);
        else if (key == "window_grid_depth") cfg.solver.window_grid_depth = std::stoi(value);
        else if (key == "output_depth") cfg.output_depth = std::stoi(value);
        else
            throw std::invalid_argument("run config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    cfg.sync();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("run config: cannot open " + path);
    return parse_run_config(in);
}

void apply_env_seed_override(RunConfig& cfg) {
    if (const char* env = std::getenv("ROUGH_MILD_SEED"))
        cfg.noise.seed = std::stoull(env);
}

}  // namespace rough_mild
