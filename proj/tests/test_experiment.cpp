#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "mlmcjd/experiment.hpp"

using namespace mlmcjd;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Estimate {
    double mean, se;
};

// Conditional on the jumps the truncated solution is lognormal, so the call
// price given the jump product is closed form; average that over jumps drawn
// with an unrelated generator.
Estimate conditional_call_price(const MertonSpec& s, double strike, std::size_t truncation, std::uint64_t draws) {
    double s2 = 0.0;
    for (std::size_t j = 1; j <= truncation; ++j) s2 += s.sigma * s.sigma * std::pow(double(j), -2.0 * s.alpha_series);
    s2 *= s.horizon;
    const double vol = std::sqrt(s2);
    std::mt19937_64 gen(424242);
    std::poisson_distribution<int> count(s.lambda * s.horizon);
    std::normal_distribution<double> z;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < draws; ++i) {
        double product = 1.0;
        for (int k = count(gen); k > 0; --k) {
            const double y = z(gen);
            product *= y <= 0.0 ? 0.5 : 1.5 + y;
        }
        const double forward = s.eta0 * product * std::exp(s.mu * s.horizon);
        const double d1 = (std::log(forward / strike) + 0.5 * s2) / vol;
        const double price = forward * normal_cdf(d1) - strike * normal_cdf(d1 - vol);
        sum += price;
        sum_sq += price * price;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    return {mean, std::sqrt((sum_sq / n - mean * mean) / (n - 1.0))};
}

}  // namespace

TEST_CASE("reference of the deterministic case") {
    MertonSpec s;
    s.sigma = 0.0;
    s.lambda = 0.0;
    const auto r = reference_value(s, 1.0, 5, 1000, 1);
    CHECK(r.value == doctest::Approx(std::exp(0.08) - 1.0).epsilon(1e-15));
    CHECK(r.ci_halfwidth == 0.0);
    CHECK(r.samples == 1000);
}

TEST_CASE("reference CI shrinks like 1/sqrt(K)") {
    const MertonSpec s;
    const auto a = reference_value(s, 1.0, 100, 20000, 3);
    const auto b = reference_value(s, 1.0, 100, 40000, 4);
    CHECK(b.ci_halfwidth / a.ci_halfwidth == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
    CHECK(a.ci_halfwidth == doctest::Approx(kZ99 * a.std_dev / std::sqrt(20000.0)));
}

TEST_CASE("reference preconditions") {
    CHECK_THROWS_AS(reference_value({}, 1.0, 0, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(reference_value({}, 1.0, 10, 999, 1), std::invalid_argument);
}

TEST_CASE("frozen reference is reproduced bitwise") {
    const auto r = reference_value({}, 1.0, fixtures::kReferenceTruncation, fixtures::kReferenceSamples,
                                   fixtures::kReferenceSeed);
    CHECK(r.value == fixtures::kReferenceValue);
    CHECK(r.ci_halfwidth == fixtures::kReferenceCi);
}

TEST_CASE("frozen reference agrees with the conditional closed form") {
    const auto oracle = conditional_call_price({}, 1.0, fixtures::kReferenceTruncation, 2'000'000);
    const double ref_se = fixtures::kReferenceCi / kZ99;
    CAPTURE(oracle.mean);
    CAPTURE(oracle.se);
    CHECK(std::abs(fixtures::kReferenceValue - oracle.mean) <= 3.0 * std::hypot(ref_se, oracle.se));
    // the truncation at 2000 coordinates moves the price far less than the smallest tested eps
    const auto wide = conditional_call_price({}, 1.0, 1'000'000, 2'000'000);
    CHECK(std::abs(wide.mean - oracle.mean) <= 1e-3);
}

TEST_CASE("empirical_error") {
    CHECK(empirical_error([](std::uint64_t) { return 0.7; }, 50, 0.7) == 0.0);
    CHECK(empirical_error([](std::uint64_t) { return 0.8; }, 50, 0.7) == doctest::Approx(0.1).epsilon(1e-12));
    std::mt19937_64 gen(8);
    std::bernoulli_distribution coin;
    const double e = empirical_error([&](std::uint64_t) { return 0.7 + (coin(gen) ? 0.1 : -0.1); }, 10000, 0.7);
    CHECK(std::abs(e - 0.1) <= 0.005);
    CHECK_THROWS_AS(empirical_error([](std::uint64_t) { return 0.0; }, 0, 0.0), std::invalid_argument);
}

TEST_CASE("fit_loglog_slope") {
    using P = std::pair<double, double>;
    const std::vector<P> quad{{1, 1}, {2, 4}, {4, 16}};
    auto f = fit_loglog_slope(quad);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.r_squared == doctest::Approx(1.0));
    const std::vector<P> flat{{1, 3}, {10, 3}, {100, 3}};
    CHECK(fit_loglog_slope(flat).slope == doctest::Approx(0.0));
    const std::vector<P> recip{{1, 1}, {2, 0.5}, {4, 0.25}};
    f = fit_loglog_slope(recip);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(f.intercept == doctest::Approx(0.0));
    const std::vector<P> two{{1, 1}, {2, 2}};
    CHECK_THROWS_AS(fit_loglog_slope(two), std::invalid_argument);
    const std::vector<P> neg{{1, 1}, {2, -2}, {3, 1}};
    CHECK_THROWS_AS(fit_loglog_slope(neg), std::invalid_argument);
}

TEST_CASE("derive_seed separates rows and repetitions") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t row = 0; row < 8; ++row) {
        for (std::uint64_t rep = 0; rep < 1000; ++rep) seen.insert(derive_seed(1, row, rep));
    }
    CHECK(seen.size() == 8000);
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("format_double keeps 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(160000) == "160000");
    CHECK(std::stod(format_double(fixtures::kReferenceValue)) == fixtures::kReferenceValue);
}

TEST_CASE("sweep plumbing") {
    SweepConfig c;
    c.eps_grid = {0.2};
    c.mc_repetitions = 1;
    c.mlmc_repetitions = 1;
    c.reference = {0.8, 0.01, 1.0, 1000, 10};
    int streamed = 0;
    const auto rows = sweep(c, [&](const SweepRow&) { ++streamed; });
    REQUIRE(rows.size() == 2);
    CHECK(streamed == 2);
    CHECK(rows[0].estimator == EstimatorKind::mc);
    CHECK(rows[1].estimator == EstimatorKind::mlmc);
    CHECK(rows[0].mean_cost == 25.0 * 25.0 * 4.0);

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == kSweepCsvHeader);
    std::getline(lines, line);
    CHECK(line.rfind("0.20000000000000001,mc,", 0) == 0);

    c.eps_grid = {0.5};
    CHECK_THROWS_AS(sweep(c), std::invalid_argument);
}

TEST_CASE("sweep is deterministic and MC cost grows as eps shrinks") {
    SweepConfig c;
    c.eps_grid = {0.2, 0.1, 0.05};
    c.mc_repetitions = 1;
    c.mlmc_repetitions = 3;
    c.reference = {fixtures::kReferenceValue, fixtures::kReferenceCi, 1.0, 100000, 2000};
    std::ostringstream a, b;
    write_sweep_csv(a, sweep(c));
    c.workers = 3;
    const auto rows = sweep(c);
    write_sweep_csv(b, rows);
    CHECK(a.str() == b.str());
    CHECK(rows[0].mean_cost < rows[2].mean_cost);
    CHECK(rows[2].mean_cost < rows[4].mean_cost);
}

TEST_CASE("a failing row is marked and the sweep continues") {
    SweepConfig c;
    c.eps_grid = {0.05, 0.2};
    c.mc_repetitions = 1;
    c.mlmc_repetitions = 1;
    c.caps.max_level = 1;
    const auto rows = sweep(c);
    REQUIRE(rows.size() == 4);
    CHECK_FALSE(rows[0].failed);
    CHECK(rows[1].failed);
    CHECK(std::isnan(rows[1].empirical_error));
    CHECK_FALSE(rows[1].error.empty());
    CHECK_FALSE(rows[2].failed);
}

static void check_error_targets(EstimatorKind kind) {
    SweepConfig c;
    c.eps_grid = {0.2, 0.1};
    c.reference = {fixtures::kReferenceValue, fixtures::kReferenceCi, 1.0, 100000, 2000};
    if (kind == EstimatorKind::mc) c.mlmc_repetitions = 1;
    if (kind == EstimatorKind::mlmc) c.mc_repetitions = 1;
    for (const auto& row : sweep(c)) {
        if (row.estimator != kind) continue;
        CAPTURE(row.eps);
        CAPTURE(row.empirical_error);
        CHECK(row.repetitions == (kind == EstimatorKind::mc ? 1000u : 100u));
        CHECK(row.empirical_error <= 1.5 * row.eps);
    }
}

TEST_CASE("MLMC meets the error target at coarse accuracies") { check_error_targets(EstimatorKind::mlmc); }

TEST_CASE("MC meets the error target at coarse accuracies") {
    // K = ceil(eps^-2) leaves a statistical error of sd(payoff) * eps
    MESSAGE("payoff standard deviation " << fixtures::kReferenceCi / kZ99 * std::sqrt(100000.0));
    check_error_targets(EstimatorKind::mc);
}
