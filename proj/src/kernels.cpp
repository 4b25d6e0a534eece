#include "mlmcjd/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlmcjd {

namespace {

double payoff_sample(const SdeProblem& problem, const Payoff& payoff, Discretization disc, std::uint64_t seed,
                     std::uint32_t level, std::uint64_t index, CostCounter& cost) {
    const NoiseRealization noise = make_path_noise(problem, disc, seed, index, level);
    const PathResult path = simulate_path(problem, disc, noise);
    cost += path.cost;
    return payoff(path.terminal_state);
}

double difference_sample(const SdeProblem& problem, const Payoff& payoff, Discretization fine,
                         Discretization coarse, std::uint64_t seed, std::uint32_t level, std::uint64_t index,
                         CostCounter& cost) {
    const CoupledNoise noise = make_coupled_noise(problem, fine, coarse, seed, index, level);
    const CoupledResult r = simulate_coupled(problem, fine, coarse, noise, payoff);
    cost += r.cost;
    return r.fine_payoff - r.coarse_payoff;
}

double exact_sample(const MertonSpec& spec, const Payoff& payoff, std::size_t truncation, std::uint64_t seed,
                    std::uint64_t index, std::vector<double>& wiener, std::vector<double>& marks) {
    auto w = derive_stream(seed, {index, 0, StreamRole::wiener});
    auto times = derive_stream(seed, {index, 0, StreamRole::jumps});
    auto mark_stream = derive_stream(seed, {index, 0, StreamRole::marks});
    const double scale = std::sqrt(spec.horizon);
    wiener.resize(truncation);
    for (double& v : wiener) v = scale * w.normal();
    const std::uint64_t count = sample_poisson(times, spec.lambda * spec.horizon);
    marks.resize(count);
    for (double& xi : marks) xi = merton_mark(mark_stream);
    const double x = merton_exact_terminal(spec, wiener, marks);
    return payoff(std::span<const double>(&x, 1));
}

// Runs body(i, cost) for every index; the values land at their index so the
// result does not depend on the schedule. The exception of the lowest
// failing index is rethrown.
template <class Body>
SampleBatch run_parallel(IndexRange range, int workers, Body&& body) {
    SampleBatch batch;
    batch.values.assign(range.count, 0.0);
    const auto count = static_cast<std::int64_t>(range.count);
    std::exception_ptr failure;
    std::int64_t failure_index = std::numeric_limits<std::int64_t>::max();
    const int threads = workers > 0 ? workers : default_workers();

#pragma omp parallel num_threads(threads)
    {
        CostCounter local;
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < count; ++i) {
            try {
                batch.values[static_cast<std::size_t>(i)] = body(range.first + static_cast<std::uint64_t>(i), local);
            } catch (...) {
#pragma omp critical(mlmcjd_kernel_failure)
                if (i < failure_index) {
                    failure_index = i;
                    failure = std::current_exception();
                }
            }
        }
#pragma omp critical(mlmcjd_kernel_cost)
        batch.cost += local;
    }
    if (failure) std::rethrow_exception(failure);
    return batch;
}

template <class Body>
SampleBatch run_serial(IndexRange range, Body&& body) {
    SampleBatch batch;
    batch.values.reserve(range.count);
    for (std::uint64_t i = 0; i < range.count; ++i) batch.values.push_back(body(range.first + i, batch.cost));
    return batch;
}

}  // namespace

int default_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace serial {

SampleBatch sample_payoffs(const SdeProblem& problem, const Payoff& payoff, Discretization disc,
                           std::uint64_t master_seed, std::uint32_t level, IndexRange range) {
    return run_serial(range, [&](std::uint64_t i, CostCounter& cost) {
        return payoff_sample(problem, payoff, disc, master_seed, level, i, cost);
    });
}

SampleBatch sample_differences(const SdeProblem& problem, const Payoff& payoff, Discretization fine,
                               Discretization coarse, std::uint64_t master_seed, std::uint32_t level,
                               IndexRange range) {
    return run_serial(range, [&](std::uint64_t i, CostCounter& cost) {
        return difference_sample(problem, payoff, fine, coarse, master_seed, level, i, cost);
    });
}

SampleBatch sample_merton_exact(const MertonSpec& spec, const Payoff& payoff, std::size_t truncation,
                                std::uint64_t master_seed, IndexRange range) {
    std::vector<double> wiener, marks;
    return run_serial(range, [&](std::uint64_t i, CostCounter&) {
        return exact_sample(spec, payoff, truncation, master_seed, i, wiener, marks);
    });
}

}  // namespace serial

namespace omp {

SampleBatch sample_payoffs(const SdeProblem& problem, const Payoff& payoff, Discretization disc,
                           std::uint64_t master_seed, std::uint32_t level, IndexRange range, int workers) {
    return run_parallel(range, workers, [&](std::uint64_t i, CostCounter& cost) {
        return payoff_sample(problem, payoff, disc, master_seed, level, i, cost);
    });
}

SampleBatch sample_differences(const SdeProblem& problem, const Payoff& payoff, Discretization fine,
                               Discretization coarse, std::uint64_t master_seed, std::uint32_t level,
                               IndexRange range, int workers) {
    return run_parallel(range, workers, [&](std::uint64_t i, CostCounter& cost) {
        return difference_sample(problem, payoff, fine, coarse, master_seed, level, i, cost);
    });
}

SampleBatch sample_merton_exact(const MertonSpec& spec, const Payoff& payoff, std::size_t truncation,
                                std::uint64_t master_seed, IndexRange range, int workers) {
    return run_parallel(range, workers, [&](std::uint64_t i, CostCounter&) {
        thread_local std::vector<double> wiener, marks;
        return exact_sample(spec, payoff, truncation, master_seed, i, wiener, marks);
    });
}

}  // namespace omp

}  // namespace mlmcjd
