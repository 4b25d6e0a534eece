#include "doctest.h"

#include <cmath>
#include <vector>

#include "mlmcjd/estimators.hpp"

using namespace mlmcjd;

namespace {

constexpr std::uint64_t kSeed = 2024;
constexpr std::uint64_t kSamples = 10000;

std::vector<LevelStats> merton_levels(std::uint32_t first, std::uint32_t last) {
    const LevelSchedule s(2.0, 0.5, merton_delta({}));
    const auto p = merton_problem({});
    std::vector<LevelStats> out;
    for (std::uint32_t l = first; l <= last; ++l) out.push_back(sample_level(p, call_payoff(1.0), s, l, kSeed, kSamples));
    return out;
}

}  // namespace

TEST_CASE("level variances decay like 2^-l") {
    const auto levels = merton_levels(1, 6);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& st : levels) {
        const double x = st.level, y = std::log2(st.variance());
        MESSAGE("l=" << st.level << " v=" << st.variance());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(levels.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CAPTURE(slope);
    CHECK(slope >= -1.4);
    CHECK(slope <= -0.6);
}

TEST_CASE("level means decrease in magnitude beyond level 2") {
    const auto levels = merton_levels(3, 6);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        CAPTURE(levels[i].level);
        CAPTURE(levels[i - 1].mean());
        CAPTURE(levels[i].mean());
        CHECK(std::abs(levels[i].mean()) < std::abs(levels[i - 1].mean()));
    }
}
