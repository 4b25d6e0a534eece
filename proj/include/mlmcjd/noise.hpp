#pragma once

// Reproducible random inputs for the randomized Euler scheme: keyed
// counter-based streams, Wiener increments, compound Poisson jumps and the
// randomized evaluation points inside each subinterval.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace mlmcjd {

/// Philox4x32-10 block cipher (Salmon et al., SC'11).
struct Philox4x32 {
    using counter_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static counter_type encrypt(counter_type ctr, key_type key) noexcept;
};

enum class StreamRole : std::uint8_t {
    wiener = 0,
    jumps = 1,
    marks = 2,
    theta_fine = 3,
    theta_coarse = 4,
    initial = 5,
};

struct StreamKey {
    std::uint64_t sample_index = 0;
    std::uint32_t level = 0;
    StreamRole role = StreamRole::wiener;
};

/// Stream of random numbers fully determined by (master seed, key).
///
/// The generator encrypts the counter (block, level, role, sample_index)
/// under a key derived from the master seed, so any sample can be drawn
/// independently of every other and in any order. Satisfies
/// UniformRandomBitGenerator so it can be handed to <random> distributions.
/// A stream is not thread-safe; give each worker its own.
class RandomStream {
public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t master_seed, StreamKey key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Standard normal (ziggurat).
    double normal();

    const StreamKey& key() const noexcept { return key_; }

private:
    void refill();

    Philox4x32::key_type cipher_key_{};
    StreamKey key_{};
    std::uint64_t block_ = 0;
    Philox4x32::counter_type buffer_{};
    unsigned buffer_pos_ = 4;
};

RandomStream derive_stream(std::uint64_t master_seed, StreamKey key);

/// Dense row-major matrix of Wiener increments; row j is the step
/// (t_j, t_{j+1}], column k the k-th scalar Wiener coordinate.
class IncrementMatrix {
public:
    IncrementMatrix() = default;
    IncrementMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> data() const noexcept { return data_; }

    /// Copy of the first `cols` columns.
    IncrementMatrix leading_columns(std::size_t cols) const;

    /// Column sums, i.e. W_k(T) - W_k(0) for each retained coordinate.
    std::vector<double> column_sums() const;

    friend bool operator==(const IncrementMatrix&, const IncrementMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Jump times in (0, T], strictly increasing, with one mark of dimension
/// `mark_dim` per jump stored contiguously.
struct JumpSet {
    std::vector<double> times;
    std::vector<double> marks;
    std::size_t mark_dim = 1;

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> mark(std::size_t i) const { return {marks.data() + i * mark_dim, mark_dim}; }
};

using MarkSampler = std::function<void(RandomStream&, std::span<double>)>;

/// All random inputs of one scheme path at grid density n and truncation M.
struct NoiseRealization {
    IncrementMatrix wiener_increments;  // n x M
    JumpSet jumps;
    std::vector<double> thetas;         // theta_j in [t_j, t_{j+1}]
    std::vector<double> initial_state;  // realization of eta
};

/// Inputs of one coupled (fine, coarse) sample of an MLMC level.
struct CoupledNoise {
    IncrementMatrix shared_wiener;  // lcm(n_fine, n_coarse) x M_fine
    JumpSet shared_jumps;
    std::vector<double> theta_fine;
    std::vector<double> theta_coarse;
    std::vector<double> initial_state;
};

IncrementMatrix sample_wiener_increments(RandomStream& stream, std::size_t n, std::size_t truncation,
                                         double horizon);

/// Compound Poisson inputs on (0, T]: Poisson(lambda*T) many uniform times
/// (sorted) drawn from `time_stream`, marks drawn from `mark_stream`.
JumpSet sample_jumps(RandomStream& time_stream, RandomStream& mark_stream, double lambda, double horizon,
                     std::size_t mark_dim, const MarkSampler& mark_sampler);

/// Poisson(mean) variate by sequential inversion (normal-free, exact).
std::uint64_t sample_poisson(RandomStream& stream, double mean);

std::vector<double> sample_thetas(RandomStream& stream, std::size_t n, double horizon);

/// Block sums of `ratio` consecutive rows, added in ascending row order.
IncrementMatrix coarsen_increments(const IncrementMatrix& fine, std::size_t ratio);

/// Index of the subinterval (t_j, t_{j+1}] of an n-point grid on [0, T]
/// that contains time s in (0, T].
std::size_t jump_step_index(double s, std::size_t n, double horizon);

}  // namespace mlmcjd
