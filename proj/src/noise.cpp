#include "mlmcjd/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace mlmcjd {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Above this mean the inversion loop gets long and exp(-mean) loses
// precision; fall back to the library sampler driven by the same stream.
constexpr double kPoissonInversionLimit = 500.0;

}  // namespace

Philox4x32::counter_type Philox4x32::encrypt(counter_type ctr, key_type key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t master_seed, StreamKey key) : key_(key) {
    if (key.level > 0xFF) {
        throw std::invalid_argument("stream level " + std::to_string(key.level) + " exceeds 255");
    }
    const std::uint64_t mixed = splitmix64(master_seed);
    cipher_key_ = {static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32)};
}

void RandomStream::refill() {
    if (block_ >> 48) {
        throw std::length_error("random stream exhausted");
    }
    const Philox4x32::counter_type ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu) | (key_.level << 16) |
            (static_cast<std::uint32_t>(key_.role) << 24),
        static_cast<std::uint32_t>(key_.sample_index),
        static_cast<std::uint32_t>(key_.sample_index >> 32),
    };
    buffer_ = Philox4x32::encrypt(ctr, cipher_key_);
    buffer_pos_ = 0;
    ++block_;
}

RandomStream::result_type RandomStream::operator()() {
    if (buffer_pos_ == 4) refill();
    return buffer_[buffer_pos_++];
}

double RandomStream::uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

namespace {

// 128-layer ziggurat (Marsaglia & Tsang 2000, with Doornik's independent
// layer bits). Layer 0 is the base strip including the tail beyond kZigR.
constexpr int kZigLayers = 128;
constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

struct ZigguratTables {
    std::array<double, kZigLayers + 1> x{};
    std::array<double, kZigLayers> ratio{};

    ZigguratTables() {
        double f = std::exp(-0.5 * kZigR * kZigR);
        x[0] = kZigV / f;
        x[1] = kZigR;
        x[kZigLayers] = 0.0;
        for (int i = 2; i < kZigLayers; ++i) {
            x[i] = std::sqrt(-2.0 * std::log(kZigV / x[i - 1] + f));
            f = std::exp(-0.5 * x[i] * x[i]);
        }
        for (int i = 0; i < kZigLayers; ++i) ratio[i] = x[i + 1] / x[i];
    }
};

const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace

double RandomStream::normal() {
    const ZigguratTables& z = ziggurat();
    for (;;) {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t word = (hi << 32) | lo;
        const auto layer = static_cast<int>(word & (kZigLayers - 1));
        // 53 high bits -> u in (-1, 1)
        const double u = 2.0 * ((static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53) - 1.0;

        if (std::abs(u) < z.ratio[layer]) return u * z.x[layer];

        if (layer == 0) {
            double x, y;
            do {
                x = std::log(uniform()) / kZigR;
                y = std::log(uniform());
            } while (-2.0 * y < x * x);
            return u < 0.0 ? x - kZigR : kZigR - x;
        }

        const double candidate = u * z.x[layer];
        const double f0 = std::exp(-0.5 * (z.x[layer] * z.x[layer] - candidate * candidate));
        const double f1 = std::exp(-0.5 * (z.x[layer + 1] * z.x[layer + 1] - candidate * candidate));
        if (f1 + uniform() * (f0 - f1) < 1.0) return candidate;
    }
}

RandomStream derive_stream(std::uint64_t master_seed, StreamKey key) { return RandomStream(master_seed, key); }

IncrementMatrix::IncrementMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

IncrementMatrix IncrementMatrix::leading_columns(std::size_t cols) const {
    if (cols > cols_) {
        throw std::invalid_argument("leading_columns: requested " + std::to_string(cols) + " of " +
                                    std::to_string(cols_) + " columns");
    }
    IncrementMatrix out(rows_, cols);
    for (std::size_t r = 0; r < rows_; ++r) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_), cols,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(r * cols));
    }
    return out;
}

std::vector<double> IncrementMatrix::column_sums() const {
    std::vector<double> sums(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) sums[c] += (*this)(r, c);
    }
    return sums;
}

IncrementMatrix sample_wiener_increments(RandomStream& stream, std::size_t n, std::size_t truncation,
                                         double horizon) {
    if (n == 0) throw std::invalid_argument("sample_wiener_increments: grid density n must be >= 1");
    if (truncation == 0) throw std::invalid_argument("sample_wiener_increments: truncation M must be >= 1");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_wiener_increments: horizon T must be > 0");

    IncrementMatrix out(n, truncation);
    const double scale = std::sqrt(horizon / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (double& v : out.row(j)) v = scale * stream.normal();
    }
    return out;
}

std::uint64_t sample_poisson(RandomStream& stream, double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("sample_poisson: mean must be finite and >= 0");
    }
    if (mean == 0.0) return 0;
    if (mean > kPoissonInversionLimit) {
        std::poisson_distribution<std::uint64_t> dist(mean);
        return dist(stream);
    }
    const double u = stream.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    const double cutoff = mean + 40.0 * std::sqrt(mean) + 40.0;
    while (u > cdf && static_cast<double>(k) < cutoff) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

JumpSet sample_jumps(RandomStream& time_stream, RandomStream& mark_stream, double lambda, double horizon,
                     std::size_t mark_dim, const MarkSampler& mark_sampler) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("sample_jumps: intensity lambda must be finite and >= 0");
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_jumps: horizon T must be > 0");
    if (mark_dim == 0) throw std::invalid_argument("sample_jumps: mark dimension must be >= 1");

    JumpSet out;
    out.mark_dim = mark_dim;
    const std::uint64_t count = sample_poisson(time_stream, lambda * horizon);
    if (count == 0) return out;
    if (!mark_sampler) throw std::invalid_argument("sample_jumps: jumps present but no mark sampler");

    out.times.resize(count);
    // 1 - u maps (0,1) onto (0,1); times land in (0, T).
    for (double& t : out.times) t = horizon * (1.0 - time_stream.uniform());
    std::sort(out.times.begin(), out.times.end());

    out.marks.resize(count * mark_dim);
    for (std::size_t i = 0; i < count; ++i) {
        mark_sampler(mark_stream, std::span<double>(out.marks.data() + i * mark_dim, mark_dim));
    }
    return out;
}

std::vector<double> sample_thetas(RandomStream& stream, std::size_t n, double horizon) {
    if (n == 0) throw std::invalid_argument("sample_thetas: grid density n must be >= 1");
    std::vector<double> thetas(n);
    const double step = horizon / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        thetas[j] = (static_cast<double>(j) + stream.uniform()) * step;
    }
    return thetas;
}

IncrementMatrix coarsen_increments(const IncrementMatrix& fine, std::size_t ratio) {
    if (ratio == 0) throw std::invalid_argument("coarsen_increments: ratio must be >= 1");
    if (fine.rows() % ratio != 0) {
        throw std::invalid_argument("coarsen_increments: " + std::to_string(fine.rows()) +
                                    " rows not divisible by ratio " + std::to_string(ratio));
    }
    if (ratio == 1) return fine;
    IncrementMatrix out(fine.rows() / ratio, fine.cols());
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto dst = out.row(r);
        auto first = fine.row(r * ratio);
        std::copy(first.begin(), first.end(), dst.begin());
        for (std::size_t i = 1; i < ratio; ++i) {
            auto src = fine.row(r * ratio + i);
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
        }
    }
    return out;
}

std::size_t jump_step_index(double s, std::size_t n, double horizon) {
    const double scaled = std::ceil(s * static_cast<double>(n) / horizon);
    if (scaled <= 1.0) return 0;
    const auto idx = static_cast<std::size_t>(scaled) - 1;
    return std::min(idx, n - 1);
}

}  // namespace mlmcjd
