#include "mlmcjd/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mlmcjd/kernels.hpp"

namespace mlmcjd {

ReferenceValue reference_value(const MertonSpec& spec, double strike, std::size_t truncation, std::uint64_t samples,
                               std::uint64_t master_seed, int workers) {
    spec.validate();
    if (truncation == 0) throw std::invalid_argument("reference_value: truncation must be >= 1");
    if (samples < 1000) throw std::invalid_argument("reference_value: need at least 1000 samples");

    const SampleBatch batch =
        omp::sample_merton_exact(spec, call_payoff(strike), truncation, master_seed, {0, samples}, workers);

    // Shifted sums: exact zero spread for constant samples.
    const double shift = batch.values.front();
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : batch.values) {
        sum += v - shift;
        sum_sq += (v - shift) * (v - shift);
    }
    const double n = static_cast<double>(samples);
    const double variance = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));

    ReferenceValue ref;
    ref.value = shift + sum / n;
    ref.std_dev = std::sqrt(variance);
    ref.ci_halfwidth = kZ99 * ref.std_dev / std::sqrt(n);
    ref.samples = samples;
    ref.truncation = truncation;
    return ref;
}

double empirical_error(const std::function<double(std::uint64_t)>& runner, std::uint64_t repetitions,
                       double reference) {
    if (repetitions == 0) throw std::invalid_argument("empirical_error: need at least one repetition");
    double sq = 0.0;
    for (std::uint64_t i = 0; i < repetitions; ++i) {
        const double e = runner(i) - reference;
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(repetitions));
}

LoglogFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("fit_loglog_slope: coordinates must be positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: x values must not all coincide");
    LoglogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

std::string to_string(EstimatorKind kind) { return kind == EstimatorKind::mc ? "mc" : "mlmc"; }

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t row, std::uint64_t repetition) {
    auto mix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    };
    return mix(mix(mix(master_seed) ^ row) ^ (repetition * 0xD6E8FEB86659FD93ull));
}

std::vector<SweepRow> sweep(const SweepConfig& config, const std::function<void(const SweepRow&)>& on_row) {
    const SdeProblem problem = merton_problem(config.spec);
    const DeltaFunction delta = merton_delta(config.spec);
    const Payoff payoff = call_payoff(config.strike);
    const LevelSchedule schedule(config.beta, config.alpha, delta, config.spec.horizon);
    for (double eps : config.eps_grid) {
        if (!(eps > 0.0) || eps > delta.at_one()) {
            throw std::invalid_argument("sweep: eps " + format_double(eps) + " outside (0, delta(1)]");
        }
    }

    std::vector<SweepRow> rows;
    std::uint64_t row_index = 0;
    for (double eps : config.eps_grid) {
        for (EstimatorKind kind : {EstimatorKind::mc, EstimatorKind::mlmc}) {
            SweepRow row;
            row.eps = eps;
            row.estimator = kind;
            row.repetitions = kind == EstimatorKind::mc ? config.mc_repetitions : config.mlmc_repetitions;
            row.reference_value = config.reference.value;
            row.reference_ci = config.reference.ci_halfwidth;
            double cost_sum = 0.0;
            try {
                row.empirical_error = empirical_error(
                    [&](std::uint64_t rep) {
                        const std::uint64_t seed = derive_seed(config.master_seed, row_index, rep);
                        const EstimateReport report =
                            kind == EstimatorKind::mc
                                ? run_mc(problem, payoff, eps, delta, seed, {config.alpha, config.workers})
                                : run_mlmc(problem, payoff, eps, schedule, seed, {config.caps, 1000, config.workers});
                        cost_sum += static_cast<double>(report.total_cost);
                        row.estimates.push_back(report.value);
                        return report.value;
                    },
                    row.repetitions, config.reference.value);
                row.mean_cost = cost_sum / static_cast<double>(row.repetitions);
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
                row.empirical_error = std::numeric_limits<double>::quiet_NaN();
                row.mean_cost = std::numeric_limits<double>::quiet_NaN();
            }
            if (on_row) on_row(row);
            rows.push_back(std::move(row));
            ++row_index;
        }
    }
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_sweep_row(std::ostream& out, const SweepRow& row) {
    out << format_double(row.eps) << ',' << to_string(row.estimator) << ',' << format_double(row.empirical_error)
        << ',' << format_double(row.mean_cost) << ',' << row.repetitions << ',' << format_double(row.reference_value)
        << ',' << format_double(row.reference_ci) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSweepCsvHeader << '\n';
    for (const auto& row : rows) write_sweep_row(out, row);
}

}  // namespace mlmcjd
