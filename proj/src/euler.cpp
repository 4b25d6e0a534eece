#include "mlmcjd/euler.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace mlmcjd {

CostCounter& CostCounter::operator+=(const CostCounter& rhs) noexcept {
    evals_a += rhs.evals_a;
    evals_b_scalar += rhs.evals_b_scalar;
    evals_c += rhs.evals_c;
    evals_eta += rhs.evals_eta;
    evals_wiener += rhs.evals_wiener;
    evals_jumps += rhs.evals_jumps;
    simplified_cost += rhs.simplified_cost;
    return *this;
}

namespace {

void check_shapes(const SdeProblem& problem, Discretization disc, const NoiseRealization& noise) {
    std::ostringstream msg;
    if (disc.density == 0 || disc.truncation == 0) {
        msg << "simulate_path: grid density and truncation must be >= 1";
    } else if (noise.wiener_increments.rows() != disc.density || noise.wiener_increments.cols() != disc.truncation) {
        msg << "simulate_path: increments are " << noise.wiener_increments.rows() << "x"
            << noise.wiener_increments.cols() << ", expected " << disc.density << "x" << disc.truncation;
    } else if (noise.thetas.size() != disc.density) {
        msg << "simulate_path: " << noise.thetas.size() << " thetas for " << disc.density << " steps";
    } else if (noise.initial_state.size() != problem.state_dim()) {
        msg << "simulate_path: initial state has dimension " << noise.initial_state.size() << ", expected "
            << problem.state_dim();
    } else if (noise.jumps.marks.size() != noise.jumps.size() * problem.mark_dim()) {
        msg << "simulate_path: jump marks do not match mark dimension " << problem.mark_dim();
    } else {
        for (double s : noise.jumps.times) {
            if (!(s > 0.0 && s <= problem.horizon())) {
                msg << "simulate_path: jump time " << s << " outside (0, T]";
                break;
            }
        }
    }
    const std::string err = msg.str();
    if (!err.empty()) throw std::invalid_argument(err);
}

}  // namespace

PathResult simulate_path(const SdeProblem& problem, Discretization disc, const NoiseRealization& noise) {
    check_shapes(problem, disc, noise);

    const std::size_t d = problem.state_dim();
    const std::size_t n = disc.density;
    const std::size_t m = disc.truncation;
    const double horizon = problem.horizon();
    const double step = horizon / static_cast<double>(n);

    std::vector<double> x = noise.initial_state;
    std::vector<double> next(d);
    std::vector<double> drift(d);
    std::vector<double> blocks(m * d);
    std::vector<double> jump(d);

    const JumpSet& jumps = noise.jumps;
    std::size_t next_jump = 0;
    std::uint64_t jumps_applied = 0;

    for (std::size_t j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) * horizon / static_cast<double>(n);
        problem.drift(noise.thetas[j], x, drift);
        problem.diffusion_blocks(t, x, m, blocks);
        const auto dw = noise.wiener_increments.row(j);

        for (std::size_t i = 0; i < d; ++i) {
            double diffusion = 0.0;
            for (std::size_t k = 0; k < m; ++k) diffusion += blocks[k * d + i] * dw[k];
            next[i] = x[i] + drift[i] * step + diffusion;
        }
        while (next_jump < jumps.size() && jump_step_index(jumps.times[next_jump], n, horizon) == j) {
            problem.jump(t, x, jumps.mark(next_jump), jump);
            for (std::size_t i = 0; i < d; ++i) next[i] += jump[i];
            ++next_jump;
            ++jumps_applied;
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (!std::isfinite(next[i])) {
                std::ostringstream msg;
                msg << "simulate_path: non-finite state component " << i << " after step " << j << " of " << n;
                throw SimulationError(msg.str());
            }
        }
        x.swap(next);
    }

    PathResult result;
    result.terminal_state = std::move(x);
    auto& cost = result.cost;
    cost.evals_eta = d;
    cost.evals_a = d * n;
    cost.evals_b_scalar = d * m * n;
    cost.evals_c = d * jumps_applied;
    cost.evals_wiener = m * n;
    cost.evals_jumps = n;
    cost.simplified_cost = m * n;
    return result;
}

CoupledResult simulate_coupled(const SdeProblem& problem, Discretization fine, Discretization coarse,
                               const CoupledNoise& noise, const Payoff& payoff) {
    if (coarse.truncation > fine.truncation || coarse.density > fine.density) {
        throw std::invalid_argument("simulate_coupled: coarse level must not exceed the fine level");
    }
    const std::size_t refined = noise.shared_wiener.rows();
    if (refined == 0 || refined % fine.density != 0 || refined % coarse.density != 0) {
        throw std::invalid_argument("simulate_coupled: shared grid is not a common refinement of both levels");
    }
    if (noise.shared_wiener.cols() != fine.truncation) {
        throw std::invalid_argument("simulate_coupled: shared increments must have M_fine columns");
    }

    NoiseRealization fine_noise{coarsen_increments(noise.shared_wiener, refined / fine.density), noise.shared_jumps,
                                noise.theta_fine, noise.initial_state};
    IncrementMatrix coarse_increments = coarsen_increments(noise.shared_wiener, refined / coarse.density);
    if (coarse.truncation < fine.truncation) coarse_increments = coarse_increments.leading_columns(coarse.truncation);
    NoiseRealization coarse_noise{std::move(coarse_increments), noise.shared_jumps, noise.theta_coarse,
                                  noise.initial_state};

    const PathResult f = simulate_path(problem, fine, fine_noise);
    const PathResult c = simulate_path(problem, coarse, coarse_noise);
    return CoupledResult{payoff(f.terminal_state), payoff(c.terminal_state), f.cost + c.cost};
}

double expected_cost(std::size_t state_dim, std::size_t truncation, std::size_t density, double jumps_mean) {
    if (truncation == 0 || density == 0) throw std::invalid_argument("expected_cost: M and n must be >= 1");
    const double d = static_cast<double>(state_dim);
    const double mn = static_cast<double>(truncation) * static_cast<double>(density);
    const double n = static_cast<double>(density);
    return d * (n + mn + jumps_mean + 1.0) + mn + n;
}

double expected_cost(const SdeProblem& problem, std::size_t truncation, std::size_t density) {
    return expected_cost(problem.state_dim(), truncation, density, problem.jump_intensity() * problem.horizon());
}

NoiseRealization make_path_noise(const SdeProblem& problem, Discretization disc, std::uint64_t master_seed,
                                 std::uint64_t sample_index, std::uint32_t level) {
    auto stream = [&](StreamRole role) { return derive_stream(master_seed, {sample_index, level, role}); };
    auto wiener = stream(StreamRole::wiener);
    auto times = stream(StreamRole::jumps);
    auto marks = stream(StreamRole::marks);
    auto theta = stream(StreamRole::theta_fine);
    auto initial = stream(StreamRole::initial);

    NoiseRealization noise;
    noise.wiener_increments = sample_wiener_increments(wiener, disc.density, disc.truncation, problem.horizon());
    noise.jumps = sample_jumps(times, marks, problem.jump_intensity(), problem.horizon(), problem.mark_dim(),
                               problem.mark_sampler());
    noise.thetas = sample_thetas(theta, disc.density, problem.horizon());
    noise.initial_state.resize(problem.state_dim());
    problem.sample_initial(initial, noise.initial_state);
    return noise;
}

CoupledNoise make_coupled_noise(const SdeProblem& problem, Discretization fine, Discretization coarse,
                                std::uint64_t master_seed, std::uint64_t sample_index, std::uint32_t level) {
    if (fine.density == 0 || coarse.density == 0) {
        throw std::invalid_argument("make_coupled_noise: grid densities must be >= 1");
    }
    auto stream = [&](StreamRole role) { return derive_stream(master_seed, {sample_index, level, role}); };
    auto wiener = stream(StreamRole::wiener);
    auto times = stream(StreamRole::jumps);
    auto marks = stream(StreamRole::marks);
    auto theta_fine = stream(StreamRole::theta_fine);
    auto theta_coarse = stream(StreamRole::theta_coarse);
    auto initial = stream(StreamRole::initial);

    const std::size_t refined = std::lcm(fine.density, coarse.density);
    CoupledNoise noise;
    noise.shared_wiener = sample_wiener_increments(wiener, refined, fine.truncation, problem.horizon());
    noise.shared_jumps = sample_jumps(times, marks, problem.jump_intensity(), problem.horizon(),
                                      problem.mark_dim(), problem.mark_sampler());
    noise.theta_fine = sample_thetas(theta_fine, fine.density, problem.horizon());
    noise.theta_coarse = sample_thetas(theta_coarse, coarse.density, problem.horizon());
    noise.initial_state.resize(problem.state_dim());
    problem.sample_initial(initial, noise.initial_state);
    return noise;
}

}  // namespace mlmcjd
