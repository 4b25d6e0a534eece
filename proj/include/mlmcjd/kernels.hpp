#pragma once

// Batch sampling kernels. Each sample i in [first, first + count) is a pure
// function of (master_seed, level, i), so the OpenMP kernels return
// bitwise the same values as the serial reference for any worker count.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mlmcjd/euler.hpp"
#include "mlmcjd/problem.hpp"

namespace mlmcjd {

struct SampleBatch {
    std::vector<double> values;  // indexed by sample - first
    CostCounter cost;
};

struct IndexRange {
    std::uint64_t first = 0;
    std::uint64_t count = 0;
};

namespace serial {

/// f(X_{M,n}) for each sample.
SampleBatch sample_payoffs(const SdeProblem& problem, const Payoff& payoff, Discretization disc,
                           std::uint64_t master_seed, std::uint32_t level, IndexRange range);

/// f(X_fine) - f(X_coarse) for each coupled sample of `level`.
SampleBatch sample_differences(const SdeProblem& problem, const Payoff& payoff, Discretization fine,
                               Discretization coarse, std::uint64_t master_seed, std::uint32_t level,
                               IndexRange range);

/// f(X_M(T)) of the exact Merton solution with `truncation` Wiener
/// coordinates, W_j(T) drawn directly as sqrt(T) Z_j.
SampleBatch sample_merton_exact(const MertonSpec& spec, const Payoff& payoff, std::size_t truncation,
                                std::uint64_t master_seed, IndexRange range);

}  // namespace serial

namespace omp {

SampleBatch sample_payoffs(const SdeProblem& problem, const Payoff& payoff, Discretization disc,
                           std::uint64_t master_seed, std::uint32_t level, IndexRange range, int workers);

SampleBatch sample_differences(const SdeProblem& problem, const Payoff& payoff, Discretization fine,
                               Discretization coarse, std::uint64_t master_seed, std::uint32_t level,
                               IndexRange range, int workers);

SampleBatch sample_merton_exact(const MertonSpec& spec, const Payoff& payoff, std::size_t truncation,
                                std::uint64_t master_seed, IndexRange range, int workers);

}  // namespace omp

/// Worker count used when the caller passes 0.
int default_workers();

}  // namespace mlmcjd
