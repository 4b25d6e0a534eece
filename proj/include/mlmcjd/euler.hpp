#pragma once

// Truncated-dimension randomized Euler scheme on the uniform grid
// t_j = jT/n: the drift is evaluated at a uniform random point theta_j in
// [t_j, t_{j+1}], the first M diffusion blocks at t_j, and every jump in
// (t_j, t_{j+1}] with the state at t_j.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlmcjd/noise.hpp"
#include "mlmcjd/problem.hpp"

namespace mlmcjd {

/// Scalar evaluations of a, b, c, eta, W and N spent on one path.
struct CostCounter {
    std::uint64_t evals_a = 0;
    std::uint64_t evals_b_scalar = 0;
    std::uint64_t evals_c = 0;
    std::uint64_t evals_eta = 0;
    std::uint64_t evals_wiener = 0;
    std::uint64_t evals_jumps = 0;
    std::uint64_t simplified_cost = 0;  // M * n

    /// d(n + Mn + N(T) + 1) + Mn + n when produced by simulate_path.
    std::uint64_t sample_cost() const noexcept {
        return evals_a + evals_b_scalar + evals_c + evals_eta + evals_wiener + evals_jumps;
    }

    CostCounter& operator+=(const CostCounter& rhs) noexcept;
    friend CostCounter operator+(CostCounter lhs, const CostCounter& rhs) noexcept { return lhs += rhs; }
    friend bool operator==(const CostCounter&, const CostCounter&) = default;
};

struct PathResult {
    std::vector<double> terminal_state;
    CostCounter cost;
};

struct CoupledResult {
    double fine_payoff = 0.0;
    double coarse_payoff = 0.0;
    CostCounter cost;
};

/// Grid density and truncation dimension of one path.
struct Discretization {
    std::size_t truncation = 1;  // M
    std::size_t density = 1;     // n
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

PathResult simulate_path(const SdeProblem& problem, Discretization disc, const NoiseRealization& noise);

/// Fine path on (M_l, n_l) with theta_fine and coarse path on
/// (M_{l-1}, n_{l-1}) with theta_coarse; both driven by aggregations of the
/// shared increments and by the same jumps and initial value.
CoupledResult simulate_coupled(const SdeProblem& problem, Discretization fine, Discretization coarse,
                               const CoupledNoise& noise, const Payoff& payoff);

/// d(n + Mn + lambda T + 1) + Mn + n.
double expected_cost(const SdeProblem& problem, std::size_t truncation, std::size_t density);
double expected_cost(std::size_t state_dim, std::size_t truncation, std::size_t density, double jumps_mean);

/// Noise of sample `sample_index` for a single uncoupled path; streams are
/// keyed by (sample_index, level).
NoiseRealization make_path_noise(const SdeProblem& problem, Discretization disc, std::uint64_t master_seed,
                                 std::uint64_t sample_index, std::uint32_t level);

/// Noise of sample `sample_index` of MLMC level `level`, generated on the
/// lcm(n_fine, n_coarse) grid with M_fine columns.
CoupledNoise make_coupled_noise(const SdeProblem& problem, Discretization fine, Discretization coarse,
                                std::uint64_t master_seed, std::uint64_t sample_index, std::uint32_t level);

}  // namespace mlmcjd
