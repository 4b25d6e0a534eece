#pragma once

// Standard Monte Carlo with accuracy-driven sizing and the adaptive
// multilevel Monte Carlo driver whose levels refine both the time grid and
// the Wiener truncation dimension.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcjd/euler.hpp"
#include "mlmcjd/problem.hpp"

namespace mlmcjd {

struct McParams {
    std::uint64_t samples = 0;   // K = ceil(eps^-2)
    std::size_t density = 0;     // n = ceil(eps^-1/alpha)
    std::size_t truncation = 0;  // M = ceil(delta^-1(eps))

    std::uint64_t cost() const noexcept { return samples * density * truncation; }
};

/// Requires eps > 0 and alpha > 0; M = 1 once eps >= delta(1).
McParams mc_params(double eps, double alpha, const DeltaFunction& delta);

/// Level l uses n_l = ceil(beta^l) and M_l = ceil(delta^-1(beta^-alpha(l+1))),
/// with M_l = 1 whenever the target already exceeds delta(1).
class LevelSchedule {
public:
    LevelSchedule(double beta, double alpha, DeltaFunction delta, double horizon = 1.0);

    std::size_t density(std::uint32_t level) const;
    std::size_t truncation(std::uint32_t level) const;
    /// h_l = T beta^-l.
    double step(std::uint32_t level) const;
    Discretization at(std::uint32_t level) const { return {truncation(level), density(level)}; }
    /// M_l n_l.
    double level_cost(std::uint32_t level) const;

    double beta() const noexcept { return beta_; }
    double alpha() const noexcept { return alpha_; }
    double horizon() const noexcept { return horizon_; }
    const DeltaFunction& delta() const noexcept { return delta_; }

private:
    double beta_;
    double alpha_;
    DeltaFunction delta_;
    double horizon_;
};

struct LevelStats {
    std::uint32_t level = 0;
    std::size_t truncation = 0;
    std::size_t density = 0;
    std::uint64_t samples_used = 0;
    std::uint64_t target = 0;  // latest K_l
    double sum = 0.0;
    double sum_sq = 0.0;
    CostCounter evaluations;  // exact informational cost of all drawn samples

    void add(std::span<const double> values);
    double mean() const noexcept;
    /// Unbiased sample variance, clamped at zero.
    double variance() const noexcept;
};

struct EstimateReport {
    std::string estimator;
    double value = 0.0;
    double target_eps = 0.0;
    std::uint64_t total_cost = 0;  // sum of samples_used * M_l * n_l
    std::vector<LevelStats> per_level;
    std::uint32_t iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// Carries whatever the estimator had computed when it gave up.
class EstimatorError : public std::runtime_error {
public:
    EstimatorError(const std::string& what, EstimateReport partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const EstimateReport& partial() const noexcept { return partial_; }

private:
    EstimateReport partial_;
};

struct SampleAllocation {
    std::vector<std::uint64_t> counts;
    bool all_variances_zero = false;
};

/// K_l = ceil(2 eps^-2 sqrt(v_l / C_l) sum_k sqrt(v_k C_k)), C_l = M_l n_l,
/// and K_l = 1 where v_l = 0.
SampleAllocation optimal_sample_counts(double eps, std::span<const double> variances,
                                       std::span<const double> level_costs);
SampleAllocation optimal_sample_counts(double eps, std::span<const double> variances, const LevelSchedule& schedule);

/// max(|Y_{L-1}| / 2, |Y_L|) - (sqrt 2 - 1) eps / sqrt 2. Negative means the
/// bias test passes.
double convergence_error(double previous_abs, double top_abs, double eps);

struct McOptions {
    double alpha = 0.5;
    int workers = 0;  // 0: OpenMP default
};

EstimateReport run_mc(const SdeProblem& problem, const Payoff& payoff, double eps, const DeltaFunction& delta,
                      std::uint64_t master_seed, const McOptions& options = {});

struct MlmcCaps {
    std::uint32_t max_level = 24;
    std::uint64_t max_samples = 100'000'000;
};

struct MlmcOptions {
    MlmcCaps caps;
    std::uint64_t probe_samples = 1000;
    int workers = 0;
};

/// Adaptive MLMC. Starts from a single level; each iteration probes a new
/// top level with `probe_samples` coupled samples, reallocates K_l for all
/// levels, tops every level up to K_l (previous samples are kept), and from
/// the third iteration on stops once the convergence error is negative.
EstimateReport run_mlmc(const SdeProblem& problem, const Payoff& payoff, double eps, const LevelSchedule& schedule,
                        std::uint64_t master_seed, const MlmcOptions& options = {});

/// Samples f(X_fine) - f(X_coarse) (or f(X_0) at level 0) of one level with
/// the same stream keys run_mlmc uses.
LevelStats sample_level(const SdeProblem& problem, const Payoff& payoff, const LevelSchedule& schedule,
                        std::uint32_t level, std::uint64_t master_seed, std::uint64_t samples, int workers = 0);

}  // namespace mlmcjd
