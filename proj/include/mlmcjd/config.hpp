#pragma once

// Command-line and config-file handling for the mlmcjd tool. Precedence is
// flags over config-file entries over built-in defaults.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcjd/estimators.hpp"
#include "mlmcjd/problem.hpp"

namespace mlmcjd {

enum class Command { reference, mc, mlmc, sweep };
enum class ProblemKind { merton, affine };

struct RunConfig {
    Command command = Command::mc;
    ProblemKind problem = ProblemKind::merton;
    MertonSpec merton;
    AffineSpec affine;
    double strike = 1.0;

    double eps = 0.1;
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.02};
    double beta = 2.0;
    double alpha = 0.5;
    MlmcCaps caps;
    std::uint64_t mc_repetitions = 1000;
    std::uint64_t mlmc_repetitions = 100;
    std::size_t reference_truncation = 2000;
    std::uint64_t reference_samples = 100'000;

    std::uint64_t seed = 1;
    bool seed_from_entropy = false;
    int workers = 0;
    std::string out;
    std::string config_file;
};

/// Invalid flag, config key or value. `exit_code()` is 0 for --help.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int exit_code = 1) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Parses argv (argv[0] is the program name). A `--seed 0` is resolved to
/// a fresh value from system entropy and flagged in `seed_from_entropy`.
RunConfig parse_config(int argc, const char* const* argv);
/// Same, with `args` excluding the program name.
RunConfig parse_config(const std::vector<std::string>& args);

/// Checks every numeric field against the estimator preconditions.
void validate(const RunConfig& config);

/// key=value lines with every default materialized.
std::string describe(const RunConfig& config);

std::string to_string(Command command);

SdeProblem make_problem(const RunConfig& config);
DeltaFunction make_delta(const RunConfig& config);

}  // namespace mlmcjd
