#include "mlmcjd/config.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "mlmcjd/experiment.hpp"

namespace mlmcjd {

namespace {

[[noreturn]] void reject(const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); }

template <class T>
std::string str(T v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

void check_eps(const std::string& key, double eps, double delta_one) {
    if (!(eps > 0.0) || !(eps <= delta_one)) {
        reject(key, "must lie in (0, delta(1) = " + str(delta_one) + "], got " + str(eps));
    }
}

std::uint64_t entropy_seed() {
    std::random_device rd;
    std::uint64_t seed = 0;
    while (seed == 0) seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    return seed;
}

}  // namespace

std::string to_string(Command command) {
    switch (command) {
    case Command::reference: return "reference";
    case Command::mc: return "mc";
    case Command::mlmc: return "mlmc";
    case Command::sweep: return "sweep";
    }
    return "?";
}

RunConfig parse_config(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"mlmcjd"};
    argv.reserve(args.size() + 1);
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_config(static_cast<int>(argv.size()), argv.data());
}

RunConfig parse_config(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Multilevel Monte Carlo for jump-diffusions driven by countably many Wiener processes", "mlmcjd"};
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    app.set_config("--config", "", "INI-style key = value file; flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(0, 1);

    std::string problem = "merton";
    app.add_option("--problem", problem, "merton | affine")->check(CLI::IsMember({"merton", "affine"}));
    app.add_option("--eps", cfg.eps, "target accuracy for mc / mlmc");
    app.add_option("--eps-grid", cfg.eps_grid, "comma-separated accuracies for sweep")->delimiter(',');
    app.add_option("--beta", cfg.beta, "level refinement factor (> 1)");
    app.add_option("--seed", cfg.seed, "master seed; 0 draws one from system entropy");
    app.add_option("--workers", cfg.workers, "parallel workers (0: OpenMP default)");
    std::uint64_t reps = 0;
    app.add_option("--reps", reps, "repetitions per sweep row (both estimators)");
    app.add_option("--mc-reps", cfg.mc_repetitions, "MC repetitions per sweep row");
    app.add_option("--mlmc-reps", cfg.mlmc_repetitions, "MLMC repetitions per sweep row");
    app.add_option("--ref-truncation", cfg.reference_truncation, "Wiener coordinates of the reference solution");
    app.add_option("--ref-samples", cfg.reference_samples, "samples of the reference solution");
    app.add_option("--out", cfg.out, "CSV output path");
    app.add_option("--max-level", cfg.caps.max_level, "MLMC level cap");
    app.add_option("--max-samples", cfg.caps.max_samples, "MLMC per-level sample cap");

    app.add_option("--mu", cfg.merton.mu, "Merton drift");
    app.add_option("--sigma", cfg.merton.sigma, "Merton volatility scale");
    app.add_option("--alpha-series", cfg.merton.alpha_series, "decay exponent of sigma / j^alpha");
    app.add_option("--lambda", cfg.merton.lambda, "jump intensity");
    app.add_option("--eta0", cfg.merton.eta0, "initial value");
    double horizon = cfg.merton.horizon;
    app.add_option("--T,--horizon", horizon, "time horizon");
    app.add_option("--strike", cfg.strike, "call strike");

    app.add_option("--drift-const", cfg.affine.drift_const, "affine: constant drift");
    app.add_option("--drift-lin", cfg.affine.drift_lin, "affine: linear drift");
    app.add_option("--diff-const", cfg.affine.diff_const, "affine: constant diffusion");
    app.add_option("--diff-lin", cfg.affine.diff_lin, "affine: linear diffusion");
    app.add_option("--jump-const", cfg.affine.jump_const, "affine: constant jump factor");
    app.add_option("--jump-lin", cfg.affine.jump_lin, "affine: linear jump factor");

    struct Sub {
        const char* name;
        const char* help;
        Command command;
    };
    const Sub subs[] = {
        {"reference", "exact-solution reference value with a 99% CI", Command::reference},
        {"mc", "standard Monte Carlo estimate", Command::mc},
        {"mlmc", "adaptive multilevel Monte Carlo estimate", Command::mlmc},
        {"sweep", "MC vs MLMC error/cost sweep over --eps-grid", Command::sweep},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw ConfigError(app.help(), 0);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    for (const auto& s : subs) {
        if (app.got_subcommand(s.name)) cfg.command = s.command;
    }
    cfg.problem = problem == "affine" ? ProblemKind::affine : ProblemKind::merton;
    cfg.merton.horizon = horizon;
    cfg.affine.horizon = horizon;
    cfg.affine.alpha_series = cfg.merton.alpha_series;
    cfg.affine.lambda = cfg.merton.lambda;
    cfg.affine.eta0 = cfg.merton.eta0;
    if (app.count("--reps") > 0) {
        cfg.mc_repetitions = app.count("--mc-reps") > 0 ? cfg.mc_repetitions : reps;
        cfg.mlmc_repetitions = app.count("--mlmc-reps") > 0 ? cfg.mlmc_repetitions : reps;
    }
    if (auto* opt = app.get_config_ptr(); opt != nullptr && opt->count() > 0) cfg.config_file = opt->as<std::string>();

    validate(cfg);
    if (cfg.seed == 0) {
        cfg.seed = entropy_seed();
        cfg.seed_from_entropy = true;
    }
    return cfg;
}

void validate(const RunConfig& cfg) {
    if (!(cfg.beta > 1.0) || !std::isfinite(cfg.beta)) reject("beta", "must be > 1, got " + str(cfg.beta));
    if (cfg.workers < 0) reject("workers", "must be >= 0, got " + str(cfg.workers));
    if (cfg.mc_repetitions == 0) reject("mc-reps", "must be >= 1");
    if (cfg.mlmc_repetitions == 0) reject("mlmc-reps", "must be >= 1");
    if (cfg.reference_truncation == 0) reject("ref-truncation", "must be >= 1");
    if (cfg.reference_samples < 1000) reject("ref-samples", "must be >= 1000, got " + str(cfg.reference_samples));
    if (cfg.caps.max_level == 0 || cfg.caps.max_level > 255) {
        reject("max-level", "must lie in [1, 255], got " + str(cfg.caps.max_level));
    }
    if (cfg.caps.max_samples == 0) reject("max-samples", "must be >= 1");
    if (!std::isfinite(cfg.strike)) reject("strike", "must be finite");
    if (cfg.eps_grid.empty()) reject("eps-grid", "must not be empty");

    const MertonSpec& m = cfg.merton;
    if (!std::isfinite(m.mu)) reject("mu", "must be finite");
    if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma)) reject("sigma", "must be >= 0, got " + str(m.sigma));
    if (!(m.alpha_series >= 1.0) || !std::isfinite(m.alpha_series)) {
        reject("alpha-series", "must be >= 1, got " + str(m.alpha_series));
    }
    if (!(m.lambda >= 0.0) || !std::isfinite(m.lambda)) reject("lambda", "must be >= 0, got " + str(m.lambda));
    if (!(m.eta0 > 0.0) || !std::isfinite(m.eta0)) reject("eta0", "must be > 0, got " + str(m.eta0));
    if (!(m.horizon > 0.0) || !std::isfinite(m.horizon)) reject("T", "must be > 0, got " + str(m.horizon));

    if (cfg.problem == ProblemKind::affine) {
        try {
            cfg.affine.validate();
        } catch (const std::invalid_argument& e) {
            reject("problem", e.what());
        }
        if (cfg.command == Command::reference || cfg.command == Command::sweep) {
            reject("problem", "the " + to_string(cfg.command) + " subcommand needs the merton problem (exact solution)");
        }
    }

    const bool needs_delta = cfg.command != Command::reference;
    if (needs_delta && cfg.problem == ProblemKind::merton && !(m.sigma > 0.0)) {
        reject("sigma", "must be > 0 for " + to_string(cfg.command));
    }
    const double delta_one = needs_delta ? make_delta(cfg).at_one() : std::numeric_limits<double>::infinity();
    if (!(cfg.eps > 0.0)) reject("eps", "must be > 0, got " + str(cfg.eps));
    if (cfg.command == Command::mlmc) check_eps("eps", cfg.eps, delta_one);
    for (double e : cfg.eps_grid) {
        if (!(e > 0.0)) reject("eps-grid", "entries must be > 0, got " + str(e));
        if (cfg.command == Command::sweep) check_eps("eps-grid", e, delta_one);
    }
}

SdeProblem make_problem(const RunConfig& cfg) {
    return cfg.problem == ProblemKind::affine ? affine_problem(cfg.affine) : merton_problem(cfg.merton);
}

DeltaFunction make_delta(const RunConfig& cfg) {
    return cfg.problem == ProblemKind::affine ? affine_delta(cfg.affine) : merton_delta(cfg.merton);
}

std::string describe(const RunConfig& cfg) {
    std::ostringstream out;
    auto line = [&](const char* key, const auto& value) { out << key << " = " << value << '\n'; };
    auto num = [](double v) { return format_double(v); };
    line("command", to_string(cfg.command));
    line("problem", cfg.problem == ProblemKind::affine ? "affine" : "merton");
    line("mu", num(cfg.merton.mu));
    line("sigma", num(cfg.merton.sigma));
    line("alpha-series", num(cfg.merton.alpha_series));
    line("lambda", num(cfg.merton.lambda));
    line("eta0", num(cfg.merton.eta0));
    line("T", num(cfg.merton.horizon));
    line("strike", num(cfg.strike));
    if (cfg.problem == ProblemKind::affine) {
        line("drift-const", num(cfg.affine.drift_const));
        line("drift-lin", num(cfg.affine.drift_lin));
        line("diff-const", num(cfg.affine.diff_const));
        line("diff-lin", num(cfg.affine.diff_lin));
        line("jump-const", num(cfg.affine.jump_const));
        line("jump-lin", num(cfg.affine.jump_lin));
    }
    line("eps", num(cfg.eps));
    std::string grid;
    for (double e : cfg.eps_grid) grid += (grid.empty() ? "" : ",") + num(e);
    line("eps-grid", grid);
    line("beta", num(cfg.beta));
    line("alpha", num(cfg.alpha));
    line("max-level", cfg.caps.max_level);
    line("max-samples", cfg.caps.max_samples);
    line("mc-reps", cfg.mc_repetitions);
    line("mlmc-reps", cfg.mlmc_repetitions);
    line("ref-truncation", cfg.reference_truncation);
    line("ref-samples", cfg.reference_samples);
    line("seed", std::to_string(cfg.seed) + (cfg.seed_from_entropy ? " (from entropy)" : ""));
    line("workers", cfg.workers);
    line("out", cfg.out.empty() ? "-" : cfg.out);
    if (!cfg.config_file.empty()) line("config", cfg.config_file);
    return out.str();
}

}  // namespace mlmcjd
