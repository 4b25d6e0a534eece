#pragma once

// Cost/error study on the Merton example: reference values from the exact
// solution, root-mean-square error over independent estimator runs, eps
// sweeps comparing MC and MLMC, and log-log slope fits.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlmcjd/estimators.hpp"
#include "mlmcjd/problem.hpp"

namespace mlmcjd {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct ReferenceValue {
    double value = 0.0;
    double ci_halfwidth = 0.0;  // 99%
    double std_dev = 0.0;
    std::uint64_t samples = 0;
    std::size_t truncation = 0;
};

/// Mean of `samples` call payoffs of the exact solution truncated to
/// `truncation` Wiener coordinates.
ReferenceValue reference_value(const MertonSpec& spec, double strike, std::size_t truncation, std::uint64_t samples,
                               std::uint64_t master_seed, int workers = 0);

/// sqrt(mean_i (runner(i) - reference)^2) over i = 0..repetitions-1.
double empirical_error(const std::function<double(std::uint64_t)>& runner, std::uint64_t repetitions,
                       double reference);

struct LoglogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least squares of log y on log x; needs >= 3 points with x, y > 0.
LoglogFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

enum class EstimatorKind { mc, mlmc };
std::string to_string(EstimatorKind kind);

struct SweepRow {
    double eps = 0.0;
    EstimatorKind estimator = EstimatorKind::mc;
    double empirical_error = 0.0;
    double mean_cost = 0.0;
    std::uint64_t repetitions = 0;
    double reference_value = 0.0;
    double reference_ci = 0.0;
    std::vector<double> estimates;  // one per repetition
    bool failed = false;
    std::string error;
};

struct SweepConfig {
    MertonSpec spec;
    double strike = 1.0;
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.02};
    std::uint64_t mc_repetitions = 1000;
    std::uint64_t mlmc_repetitions = 100;
    std::uint64_t master_seed = 1;
    double beta = 2.0;
    double alpha = 0.5;
    MlmcCaps caps;
    int workers = 0;
    ReferenceValue reference;
};

/// Seed of repetition `repetition` of sweep row `row`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t row, std::uint64_t repetition);

/// One MC row and one MLMC row per eps, in grid order. A failing row is
/// marked and the sweep continues.
std::vector<SweepRow> sweep(const SweepConfig& config,
                            const std::function<void(const SweepRow&)>& on_row = nullptr);

inline constexpr const char* kSweepCsvHeader =
    "eps,estimator,empirical_error,mean_cost,repetitions,reference_value,reference_ci";

/// printf "%.17g".
std::string format_double(double v);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_row(std::ostream& out, const SweepRow& row);

}  // namespace mlmcjd
