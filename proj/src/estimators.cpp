#include "mlmcjd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <sstream>

#include "mlmcjd/kernels.hpp"
#include "mlmcjd/numeric.hpp"

namespace mlmcjd {

namespace {

void check_eps(double eps, const DeltaFunction& delta, const char* who) {
    if (!(eps > 0.0) || eps > delta.at_one()) {
        std::ostringstream msg;
        msg << who << ": eps = " << eps << " outside (0, delta(1) = " << delta.at_one() << "]";
        throw std::invalid_argument(msg.str());
    }
}

// Draws samples [stats.samples_used, target) of one level into stats.
void extend_level(LevelStats& stats, std::uint64_t target, const SdeProblem& problem, const Payoff& payoff,
                  const LevelSchedule& schedule, std::uint64_t seed, int workers) {
    if (target <= stats.samples_used) return;
    const IndexRange range{stats.samples_used, target - stats.samples_used};
    const std::uint32_t l = stats.level;
    const SampleBatch batch =
        l == 0 ? omp::sample_payoffs(problem, payoff, schedule.at(0), seed, 0, range, workers)
               : omp::sample_differences(problem, payoff, schedule.at(l), schedule.at(l - 1), seed, l, range, workers);
    stats.add(batch.values);
    stats.evaluations += batch.cost;
}

LevelStats empty_level(const LevelSchedule& schedule, std::uint32_t level) {
    LevelStats stats;
    stats.level = level;
    stats.truncation = schedule.truncation(level);
    stats.density = schedule.density(level);
    return stats;
}

std::uint64_t level_total_cost(const std::vector<LevelStats>& levels) {
    std::uint64_t total = 0;
    for (const auto& s : levels) total += s.samples_used * s.truncation * s.density;
    return total;
}

}  // namespace

McParams mc_params(double eps, double alpha, const DeltaFunction& delta) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("mc_params: eps must be finite and > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("mc_params: alpha must be > 0");
    McParams p;
    p.samples = snapped_ceil(std::pow(eps, -2.0));
    p.density = snapped_ceil(std::pow(eps, -1.0 / alpha));
    // one Wiener component already meets the truncation target once eps >= delta(1)
    p.truncation = eps >= delta.at_one() ? 1 : snapped_ceil(delta.inverse(eps));
    return p;
}

LevelSchedule::LevelSchedule(double beta, double alpha, DeltaFunction delta, double horizon)
    : beta_(beta), alpha_(alpha), delta_(std::move(delta)), horizon_(horizon) {
    if (!(beta > 1.0) || !std::isfinite(beta)) throw std::invalid_argument("LevelSchedule: beta must be > 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("LevelSchedule: alpha must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("LevelSchedule: horizon must be > 0");
}

std::size_t LevelSchedule::density(std::uint32_t level) const {
    return snapped_ceil(std::pow(beta_, static_cast<double>(level)));
}

std::size_t LevelSchedule::truncation(std::uint32_t level) const {
    const double target = std::pow(beta_, -alpha_ * static_cast<double>(level + 1));
    if (target >= delta_.at_one()) return 1;
    const double m = delta_.inverse(target);
    if (!(m < 0x1p53)) {
        throw std::overflow_error("LevelSchedule: truncation of level " + std::to_string(level) + " is not representable");
    }
    return snapped_ceil(m);
}

double LevelSchedule::step(std::uint32_t level) const {
    return horizon_ * std::pow(beta_, -static_cast<double>(level));
}

double LevelSchedule::level_cost(std::uint32_t level) const {
    return static_cast<double>(truncation(level)) * static_cast<double>(density(level));
}

void LevelStats::add(std::span<const double> values) {
    for (double v : values) {
        sum += v;
        sum_sq += v * v;
    }
    samples_used += values.size();
}

double LevelStats::mean() const noexcept {
    return samples_used == 0 ? 0.0 : sum / static_cast<double>(samples_used);
}

double LevelStats::variance() const noexcept {
    if (samples_used < 2) return 0.0;
    const double n = static_cast<double>(samples_used);
    return std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
}

SampleAllocation optimal_sample_counts(double eps, std::span<const double> variances,
                                       std::span<const double> level_costs) {
    if (!(eps > 0.0)) throw std::invalid_argument("optimal_sample_counts: eps must be > 0");
    if (variances.empty() || variances.size() != level_costs.size()) {
        throw std::invalid_argument("optimal_sample_counts: need one variance and one cost per level");
    }
    double spread = 0.0;
    for (std::size_t l = 0; l < variances.size(); ++l) {
        if (!(variances[l] >= 0.0) || !(level_costs[l] > 0.0)) {
            throw std::invalid_argument("optimal_sample_counts: variances must be >= 0 and costs > 0");
        }
        spread += std::sqrt(variances[l] * level_costs[l]);
    }
    SampleAllocation out;
    out.counts.assign(variances.size(), 1);
    if (spread == 0.0) {
        out.all_variances_zero = true;
        return out;
    }
    const double scale = 2.0 / (eps * eps) * spread;
    for (std::size_t l = 0; l < variances.size(); ++l) {
        if (variances[l] == 0.0) continue;
        out.counts[l] = std::max<std::uint64_t>(1, snapped_ceil(scale * std::sqrt(variances[l] / level_costs[l])));
    }
    return out;
}

SampleAllocation optimal_sample_counts(double eps, std::span<const double> variances, const LevelSchedule& schedule) {
    std::vector<double> costs(variances.size());
    for (std::size_t l = 0; l < costs.size(); ++l) costs[l] = schedule.level_cost(static_cast<std::uint32_t>(l));
    return optimal_sample_counts(eps, variances, costs);
}

double convergence_error(double previous_abs, double top_abs, double eps) {
    return std::max(0.5 * previous_abs, top_abs) - (std::sqrt(2.0) - 1.0) * eps / std::sqrt(2.0);
}

EstimateReport run_mc(const SdeProblem& problem, const Payoff& payoff, double eps, const DeltaFunction& delta,
                      std::uint64_t master_seed, const McOptions& options) {
    const McParams p = mc_params(eps, options.alpha, delta);
    const Discretization disc{p.truncation, p.density};
    const SampleBatch batch = omp::sample_payoffs(problem, payoff, disc, master_seed, 0, {0, p.samples}, options.workers);

    LevelStats stats;
    stats.truncation = p.truncation;
    stats.density = p.density;
    stats.target = p.samples;
    stats.add(batch.values);
    stats.evaluations = batch.cost;

    EstimateReport report;
    report.estimator = "mc";
    report.value = stats.mean();
    report.target_eps = eps;
    report.total_cost = p.cost();
    report.per_level.push_back(stats);
    report.iterations = 1;
    report.converged = true;
    return report;
}

LevelStats sample_level(const SdeProblem& problem, const Payoff& payoff, const LevelSchedule& schedule,
                        std::uint32_t level, std::uint64_t master_seed, std::uint64_t samples, int workers) {
    LevelStats stats = empty_level(schedule, level);
    extend_level(stats, samples, problem, payoff, schedule, master_seed, workers);
    stats.target = samples;
    return stats;
}

EstimateReport run_mlmc(const SdeProblem& problem, const Payoff& payoff, double eps, const LevelSchedule& schedule,
                        std::uint64_t master_seed, const MlmcOptions& options) {
    check_eps(eps, schedule.delta(), "run_mlmc");
    if (options.caps.max_samples == 0) throw std::invalid_argument("run_mlmc: max_samples must be >= 1");
    if (options.probe_samples < 2) throw std::invalid_argument("run_mlmc: probe needs at least 2 samples");

    EstimateReport report;
    report.estimator = "mlmc";
    report.target_eps = eps;
    auto& levels = report.per_level;

    auto finish = [&] {
        report.value = 0.0;
        for (const auto& s : levels) report.value += s.mean();
        report.total_cost = level_total_cost(levels);
    };

    std::uint32_t top = 0;
    for (std::uint32_t iteration = 1;; ++iteration) {
        report.iterations = iteration;
        if (top > options.caps.max_level) {
            finish();
            throw EstimatorError("run_mlmc: level cap " + std::to_string(options.caps.max_level) + " exceeded",
                                 report);
        }

        levels.push_back(empty_level(schedule, top));
        extend_level(levels.back(), options.probe_samples, problem, payoff, schedule, master_seed, options.workers);

        std::vector<double> variances;
        for (const auto& s : levels) variances.push_back(s.variance());
        const SampleAllocation alloc = optimal_sample_counts(eps, variances, schedule);
        if (alloc.all_variances_zero) {
            report.warnings.push_back("iteration " + std::to_string(iteration) +
                                      ": all level variances are zero; using one sample per level");
        }
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (alloc.counts[l] > options.caps.max_samples) {
                levels[l].target = alloc.counts[l];
                finish();
                throw EstimatorError("run_mlmc: level " + std::to_string(l) + " needs " +
                                         std::to_string(alloc.counts[l]) + " samples, above the cap of " +
                                         std::to_string(options.caps.max_samples),
                                     report);
            }
            levels[l].target = alloc.counts[l];
            extend_level(levels[l], alloc.counts[l], problem, payoff, schedule, master_seed, options.workers);
        }

        if (iteration > 2 &&
            convergence_error(std::abs(levels[top - 1].mean()), std::abs(levels[top].mean()), eps) < 0.0) {
            report.converged = true;
            break;
        }
        ++top;
    }
    finish();
    return report;
}

}  // namespace mlmcjd
