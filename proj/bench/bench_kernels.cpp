// Serial reference kernels against their OpenMP counterparts on the default
// Merton problem. Arguments: batch size, and for the OpenMP variants the
// worker count.

#include <benchmark/benchmark.h>

#include "mlmcjd/estimators.hpp"
#include "mlmcjd/kernels.hpp"

namespace {

using namespace mlmcjd;

const SdeProblem& problem() {
    static const SdeProblem p = merton_problem({});
    return p;
}

const Payoff& payoff() {
    static const Payoff f = call_payoff(1.0);
    return f;
}

constexpr std::uint32_t kLevel = 5;

Discretization fine() { return LevelSchedule(2.0, 0.5, merton_delta({})).at(kLevel); }
Discretization coarse() { return LevelSchedule(2.0, 0.5, merton_delta({})).at(kLevel - 1); }

void report(benchmark::State& state, std::uint64_t samples) {
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * samples));
}

void BM_PayoffsSerial(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::sample_payoffs(problem(), payoff(), fine(), 1, kLevel, {0, n}));
    report(state, n);
}

void BM_PayoffsOmp(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(omp::sample_payoffs(problem(), payoff(), fine(), 1, kLevel, {0, n}, workers));
    }
    report(state, n);
}

void BM_DifferencesSerial(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(serial::sample_differences(problem(), payoff(), fine(), coarse(), 1, kLevel, {0, n}));
    }
    report(state, n);
}

void BM_DifferencesOmp(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            omp::sample_differences(problem(), payoff(), fine(), coarse(), 1, kLevel, {0, n}, workers));
    }
    report(state, n);
}

void BM_ExactSerial(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(serial::sample_merton_exact({}, payoff(), 2000, 1, {0, n}));
    report(state, n);
}

void BM_ExactOmp(benchmark::State& state) {
    const auto n = static_cast<std::uint64_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(omp::sample_merton_exact({}, payoff(), 2000, 1, {0, n}, workers));
    report(state, n);
}

}  // namespace

BENCHMARK(BM_PayoffsSerial)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PayoffsOmp)->ArgsProduct({{4096}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DifferencesSerial)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DifferencesOmp)->ArgsProduct({{4096}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExactSerial)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactOmp)->ArgsProduct({{2048}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
