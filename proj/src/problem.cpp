#include "mlmcjd/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlmcjd {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// sigma / j^alpha for j = 1..size, shared by all copies of a problem.
std::shared_ptr<const std::vector<double>> block_scales(double sigma, double alpha, std::size_t size) {
    auto scales = std::make_shared<std::vector<double>>(size);
    for (std::size_t j = 1; j <= size; ++j) {
        (*scales)[j - 1] = sigma / std::pow(static_cast<double>(j), alpha);
    }
    return scales;
}

constexpr std::size_t kScaleTableSize = 1u << 14;

inline double block_scale(const std::vector<double>& table, double sigma, double alpha, std::size_t j) {
    return j <= table.size() ? table[j - 1] : sigma / std::pow(static_cast<double>(j), alpha);
}

}  // namespace

SdeProblem::SdeProblem(SdeCoefficients coefficients) : c_(std::move(coefficients)) {
    require(c_.state_dim >= 1, "SdeProblem: state dimension must be >= 1");
    require(c_.mark_dim >= 1, "SdeProblem: mark dimension must be >= 1");
    require(c_.horizon > 0.0 && std::isfinite(c_.horizon), "SdeProblem: horizon must be finite and > 0");
    require(c_.jump_intensity >= 0.0 && std::isfinite(c_.jump_intensity),
            "SdeProblem: jump intensity must be finite and >= 0 (finite activity only)");
    require(static_cast<bool>(c_.drift), "SdeProblem: drift is required");
    require(static_cast<bool>(c_.diffusion_block), "SdeProblem: diffusion block accessor is required");
    require(static_cast<bool>(c_.jump_coeff), "SdeProblem: jump coefficient is required");
    require(static_cast<bool>(c_.initial), "SdeProblem: initial value sampler is required");
    require(c_.jump_intensity == 0.0 || static_cast<bool>(c_.mark_sampler),
            "SdeProblem: a mark sampler is required when jump intensity > 0");
}

void SdeProblem::diffusion_blocks(double t, std::span<const double> x, std::size_t m,
                                  std::span<double> out) const {
    const std::size_t d = c_.state_dim;
    if (c_.diffusion_blocks) {
        c_.diffusion_blocks(t, x, m, out.first(m * d));
        return;
    }
    for (std::size_t j = 1; j <= m; ++j) c_.diffusion_block(t, x, j, out.subspan((j - 1) * d, d));
}

DeltaFunction::DeltaFunction(std::function<double(double)> eval, std::function<double(double)> inverse,
                             DeltaFamily family, std::vector<double> parameters)
    : eval_(std::move(eval)), inverse_(std::move(inverse)), family_(family), parameters_(std::move(parameters)) {
    require(static_cast<bool>(eval_) && static_cast<bool>(inverse_), "DeltaFunction: eval and inverse are required");
    at_one_ = eval_(1.0);
    require(at_one_ > 0.0 && std::isfinite(at_one_), "DeltaFunction: delta(1) must be finite and > 0");
}

double DeltaFunction::operator()(double k) const {
    if (!(k >= 1.0)) throw std::domain_error("DeltaFunction: argument must be >= 1");
    return eval_(k);
}

double DeltaFunction::inverse(double y) const {
    if (!(y > 0.0)) throw std::domain_error("DeltaFunction::inverse: argument must be > 0");
    if (y > at_one_ * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "DeltaFunction::inverse: argument " << y << " exceeds delta(1) = " << at_one_;
        throw std::domain_error(msg.str());
    }
    return std::max(1.0, inverse_(y));
}

std::string DeltaFunction::describe() const {
    std::ostringstream out;
    switch (family_) {
    case DeltaFamily::power_law:
        out << "power_law(c=" << parameters_.at(0) << ", gamma=" << parameters_.at(1) << ")";
        break;
    case DeltaFamily::log_decay:
        out << "log_decay(c=" << parameters_.at(0) << ")";
        break;
    case DeltaFamily::custom:
        out << "custom";
        break;
    }
    return out.str();
}

DeltaFunction delta_power_law(double c, double gamma) {
    require(c > 0.0 && std::isfinite(c), "delta_power_law: c must be finite and > 0");
    require(gamma > 0.0 && std::isfinite(gamma), "delta_power_law: gamma must be finite and > 0");
    return DeltaFunction([c, gamma](double k) { return c * std::pow(k, -gamma); },
                         [c, gamma](double y) { return std::pow(c / y, 1.0 / gamma); }, DeltaFamily::power_law,
                         {c, gamma});
}

DeltaFunction delta_log_decay(double c) {
    require(c > 0.0 && std::isfinite(c), "delta_log_decay: c must be finite and > 0");
    return DeltaFunction([c](double k) { return c / std::log1p(k); },
                         [c](double y) { return std::expm1(c / y); }, DeltaFamily::log_decay, {c});
}

Payoff call_payoff(double strike) {
    return Payoff{[strike](std::span<const double> x) { return std::max(x[0] - strike, 0.0); }, 1.0};
}

Payoff identity_payoff() {
    return Payoff{[](std::span<const double> x) { return x[0]; }, 1.0};
}

void MertonSpec::validate() const {
    require(std::isfinite(mu), "MertonSpec: mu must be finite");
    require(sigma >= 0.0 && std::isfinite(sigma), "MertonSpec: sigma must be finite and >= 0");
    require(alpha_series >= 1.0 && std::isfinite(alpha_series), "MertonSpec: alpha_series must be >= 1");
    require(lambda >= 0.0 && std::isfinite(lambda), "MertonSpec: lambda must be finite and >= 0");
    require(eta0 > 0.0 && std::isfinite(eta0), "MertonSpec: eta0 must be finite and > 0");
    require(horizon > 0.0 && std::isfinite(horizon), "MertonSpec: horizon must be finite and > 0");
}

double merton_mark(RandomStream& stream) {
    const double y = stream.normal();
    return y <= 0.0 ? -0.5 : 0.5 + y;
}

SdeProblem merton_problem(const MertonSpec& spec) {
    spec.validate();
    const double mu = spec.mu;
    const double sigma = spec.sigma;
    const double alpha = spec.alpha_series;
    const double eta0 = spec.eta0;
    auto scales = block_scales(sigma, alpha, kScaleTableSize);

    SdeCoefficients c;
    c.state_dim = 1;
    c.mark_dim = 1;
    c.horizon = spec.horizon;
    c.drift = [mu](double, std::span<const double> x, std::span<double> out) { out[0] = mu * x[0]; };
    c.diffusion_block = [scales, sigma, alpha](double, std::span<const double> x, std::size_t j,
                                               std::span<double> out) {
        out[0] = block_scale(*scales, sigma, alpha, j) * x[0];
    };
    c.diffusion_blocks = [scales, sigma, alpha](double, std::span<const double> x, std::size_t m,
                                                std::span<double> out) {
        const double x0 = x[0];
        const std::size_t tabled = std::min(m, scales->size());
        for (std::size_t j = 0; j < tabled; ++j) out[j] = (*scales)[j] * x0;
        for (std::size_t j = tabled + 1; j <= m; ++j) out[j - 1] = block_scale(*scales, sigma, alpha, j) * x0;
    };
    c.jump_coeff = [](double, std::span<const double> x, std::span<const double> y, std::span<double> out) {
        out[0] = x[0] * y[0];
    };
    c.initial = [eta0](RandomStream&, std::span<double> out) { out[0] = eta0; };
    c.jump_intensity = spec.lambda;
    c.mark_sampler = [](RandomStream& stream, std::span<double> out) { out[0] = merton_mark(stream); };
    c.lipschitz = std::abs(mu) + sigma + 1.0;
    return SdeProblem(std::move(c));
}

DeltaFunction merton_delta(const MertonSpec& spec) {
    require(spec.alpha_series > 0.5, "merton_delta: alpha_series must be > 1/2");
    require(spec.sigma > 0.0, "merton_delta: sigma must be > 0");
    const double a = spec.alpha_series;
    return delta_power_law(spec.sigma / std::sqrt(2.0 * a - 1.0), a - 0.5);
}

double merton_exact_terminal(const MertonSpec& spec, std::span<const double> wiener_terminal,
                             std::span<const double> marks) {
    double variance = 0.0;
    double diffusion = 0.0;
    for (std::size_t j = 1; j <= wiener_terminal.size(); ++j) {
        const double s = spec.sigma / std::pow(static_cast<double>(j), spec.alpha_series);
        variance += s * s;
        diffusion += s * wiener_terminal[j - 1];
    }
    double jumps = 1.0;
    for (double xi : marks) jumps *= 1.0 + xi;
    return spec.eta0 * std::exp((spec.mu - 0.5 * variance) * spec.horizon + diffusion) * jumps;
}

void AffineSpec::validate() const {
    for (double v : {drift_const, drift_lin, diff_const, diff_lin, jump_const, jump_lin}) {
        require(std::isfinite(v), "AffineSpec: coefficients must be finite");
    }
    require(alpha_series > 0.5 && std::isfinite(alpha_series), "AffineSpec: alpha_series must be > 1/2");
    require(lambda >= 0.0 && std::isfinite(lambda), "AffineSpec: lambda must be finite and >= 0");
    require(std::isfinite(eta0), "AffineSpec: eta0 must be finite");
    require(horizon > 0.0 && std::isfinite(horizon), "AffineSpec: horizon must be finite and > 0");
}

SdeProblem affine_problem(const AffineSpec& spec) {
    spec.validate();
    const AffineSpec s = spec;
    auto scales = block_scales(1.0, s.alpha_series, kScaleTableSize);

    SdeCoefficients c;
    c.horizon = s.horizon;
    c.drift = [s](double, std::span<const double> x, std::span<double> out) {
        out[0] = s.drift_const + s.drift_lin * x[0];
    };
    c.diffusion_block = [s, scales](double, std::span<const double> x, std::size_t j, std::span<double> out) {
        out[0] = block_scale(*scales, 1.0, s.alpha_series, j) * (s.diff_const + s.diff_lin * x[0]);
    };
    c.diffusion_blocks = [s, scales](double, std::span<const double> x, std::size_t m, std::span<double> out) {
        const double base = s.diff_const + s.diff_lin * x[0];
        for (std::size_t j = 1; j <= m; ++j) out[j - 1] = block_scale(*scales, 1.0, s.alpha_series, j) * base;
    };
    c.jump_coeff = [s](double, std::span<const double> x, std::span<const double> y, std::span<double> out) {
        out[0] = (s.jump_const + s.jump_lin * x[0]) * y[0];
    };
    c.initial = [s](RandomStream&, std::span<double> out) { out[0] = s.eta0; };
    c.jump_intensity = s.lambda;
    c.mark_sampler = [](RandomStream& stream, std::span<double> out) { out[0] = merton_mark(stream); };
    c.lipschitz = std::abs(s.drift_lin) + std::abs(s.diff_lin) + std::abs(s.jump_lin);
    return SdeProblem(std::move(c));
}

DeltaFunction affine_delta(const AffineSpec& spec) {
    spec.validate();
    double scale = std::max(std::abs(spec.diff_const), std::abs(spec.diff_lin));
    // Any decreasing bound works when the diffusion vanishes.
    if (scale == 0.0) scale = 1.0;
    const double a = spec.alpha_series;
    return delta_power_law(scale / std::sqrt(2.0 * a - 1.0), a - 0.5);
}

}  // namespace mlmcjd
