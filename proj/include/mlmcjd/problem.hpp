#pragma once

// Jump-diffusion problems driven by a countably dimensional Wiener process:
//
//   dX = a(t, X) dt + sum_j b^(j)(t, X) dW_j + integral c(t, X(t-), y) N(dy, dt),
//   X(0) = eta,
//
// with a finite-activity Poisson random measure N. Also holds the tail
// function delta that controls the Wiener truncation error and the bundled
// Merton example with its closed-form solution.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlmcjd/noise.hpp"

namespace mlmcjd {

using DriftFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// b^(j)(t, x) for block index j >= 1.
using DiffusionBlockFn =
    std::function<void(double t, std::span<const double> x, std::size_t j, std::span<double> out)>;
/// Writes blocks 1..m contiguously: block j occupies out[(j-1)*d, j*d).
using DiffusionBlocksFn =
    std::function<void(double t, std::span<const double> x, std::size_t m, std::span<double> out)>;
using JumpFn =
    std::function<void(double t, std::span<const double> x, std::span<const double> y, std::span<double> out)>;
using InitialFn = std::function<void(RandomStream&, std::span<double> out)>;

struct SdeCoefficients {
    std::size_t state_dim = 1;
    std::size_t mark_dim = 1;
    double horizon = 1.0;
    DriftFn drift;
    DiffusionBlockFn diffusion_block;
    DiffusionBlocksFn diffusion_blocks;  // optional batched form of diffusion_block
    JumpFn jump_coeff;
    InitialFn initial;
    double jump_intensity = 0.0;
    MarkSampler mark_sampler;
    double lipschitz = 1.0;  // informational
};

/// Immutable, validated coefficient tuple (a, b, c, eta) plus the jump law.
class SdeProblem {
public:
    explicit SdeProblem(SdeCoefficients coefficients);

    std::size_t state_dim() const noexcept { return c_.state_dim; }
    std::size_t mark_dim() const noexcept { return c_.mark_dim; }
    double horizon() const noexcept { return c_.horizon; }
    double jump_intensity() const noexcept { return c_.jump_intensity; }
    double lipschitz() const noexcept { return c_.lipschitz; }

    void drift(double t, std::span<const double> x, std::span<double> out) const { c_.drift(t, x, out); }
    void diffusion_block(double t, std::span<const double> x, std::size_t j, std::span<double> out) const {
        c_.diffusion_block(t, x, j, out);
    }
    /// First m blocks, via the batched callable when one was supplied.
    void diffusion_blocks(double t, std::span<const double> x, std::size_t m, std::span<double> out) const;
    void jump(double t, std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        c_.jump_coeff(t, x, y, out);
    }
    void sample_initial(RandomStream& stream, std::span<double> out) const { c_.initial(stream, out); }
    const MarkSampler& mark_sampler() const noexcept { return c_.mark_sampler; }

private:
    SdeCoefficients c_;
};

enum class DeltaFamily { power_law, log_decay, custom };

/// Positive, strictly decreasing function on [1, inf) tending to zero, with
/// its inverse on (0, delta(1)].
class DeltaFunction {
public:
    DeltaFunction(std::function<double(double)> eval, std::function<double(double)> inverse,
                  DeltaFamily family = DeltaFamily::custom, std::vector<double> parameters = {});

    double operator()(double k) const;
    /// Rejects y <= 0 and y > delta(1).
    double inverse(double y) const;

    double at_one() const noexcept { return at_one_; }
    DeltaFamily family() const noexcept { return family_; }
    const std::vector<double>& parameters() const noexcept { return parameters_; }
    std::string describe() const;

private:
    std::function<double(double)> eval_;
    std::function<double(double)> inverse_;
    DeltaFamily family_;
    std::vector<double> parameters_;
    double at_one_;
};

/// delta(k) = c k^-gamma.
DeltaFunction delta_power_law(double c, double gamma);

/// delta(k) = c / ln(1 + k).
DeltaFunction delta_log_decay(double c);

struct Payoff {
    std::function<double(std::span<const double>)> f;
    double lipschitz = 1.0;

    double operator()(std::span<const double> x) const { return f(x); }
};

Payoff call_payoff(double strike);
/// f(x) = x_0; used by degenerate-problem checks.
Payoff identity_payoff();

/// Scalar Merton-type model with a countable family of Wiener drivers,
///   dX = mu X dt + sum_j sigma / j^alpha_series X dW_j + X(t-) dL,
/// L compound Poisson with intensity lambda and marks
///   xi = -0.5 if Y <= 0 else 0.5 + Y,  Y ~ N(0, 1).
struct MertonSpec {
    double mu = 0.08;
    double sigma = 0.4;
    double alpha_series = 1.0;
    double lambda = 1.0;
    double eta0 = 1.0;
    double horizon = 1.0;

    void validate() const;
};

SdeProblem merton_problem(const MertonSpec& spec);

/// Integral bound of the l2 tail of the diffusion blocks:
///   sigma * k^-(alpha - 1/2) / sqrt(2 alpha - 1)  >=  sigma (sum_{j>k} j^-2alpha)^1/2.
DeltaFunction merton_delta(const MertonSpec& spec);

/// Mark law of the Merton example.
double merton_mark(RandomStream& stream);

/// Truncated exact solution X_M(T) given the first M coordinates of W(T)
/// and the realized jump marks.
double merton_exact_terminal(const MertonSpec& spec, std::span<const double> wiener_terminal,
                             std::span<const double> marks);

/// Scalar affine jump-diffusion, loadable from a config file:
///   a = drift_const + drift_lin x
///   b^(j) = (diff_const + diff_lin x) / j^alpha_series
///   c = (jump_const + jump_lin x) y
/// with Merton marks and deterministic eta0.
struct AffineSpec {
    double drift_const = 0.0;
    double drift_lin = 0.0;
    double diff_const = 0.0;
    double diff_lin = 0.0;
    double jump_const = 0.0;
    double jump_lin = 0.0;
    double alpha_series = 1.0;
    double lambda = 0.0;
    double eta0 = 1.0;
    double horizon = 1.0;

    void validate() const;
};

SdeProblem affine_problem(const AffineSpec& spec);
DeltaFunction affine_delta(const AffineSpec& spec);

}  // namespace mlmcjd
