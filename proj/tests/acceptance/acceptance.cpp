// Acceptance checks for the estimator library. Prints one PASS/FAIL line per
// criterion; pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mlmcjd/estimators.hpp"
#include "mlmcjd/experiment.hpp"
#include "mlmcjd/kernels.hpp"
#include "mlmcjd/numeric.hpp"

using namespace mlmcjd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

const MertonSpec kSpec{};

LevelSchedule merton_schedule() { return LevelSchedule(2.0, 0.5, merton_delta(kSpec), kSpec.horizon); }

// 1. Sizing of the standard estimator.
void sizing(Outcome& o) {
    const auto delta = merton_delta(kSpec);
    struct Row {
        int inv_eps;
        std::uint64_t k, n, m;
    };
    // eps = 1/inv_eps; K = n = inv_eps^2, M = ceil((0.4 inv_eps)^2) or 1 when eps >= delta(1)
    for (const Row r : {Row{2, 4, 4, 1}, Row{10, 100, 100, 16}, Row{20, 400, 400, 64}}) {
        const double eps = 1.0 / r.inv_eps;
        const auto p = mc_params(eps, 0.5, delta);
        o.require(p.samples == r.k && p.density == r.n && p.truncation == r.m,
                  "ceilings at eps " + fmt(eps));
        // eps^-4 delta^-1(eps) with the power law extended past delta(1)
        const double base = std::pow(eps, -4.0) * std::pow(kSpec.sigma / eps, 2.0);
        const double cost = static_cast<double>(p.cost());
        o.require(base <= cost && cost <= 8.0 * base, "sandwich at eps " + fmt(eps));
        o.detail << "eps=" << fmt(eps) << ": K=" << p.samples << " n=" << p.density << " M=" << p.truncation
                 << " KMn=" << p.cost() << " in [" << fmt(base) << ", " << fmt(8 * base) << "]; ";
    }
}

// 2. Deterministic problems are reproduced exactly.
SdeProblem deterministic_problem(double a, double eta) {
    SdeCoefficients k;
    k.jump_intensity = 1.0;
    k.drift = [a](double, std::span<const double>, std::span<double> out) { out[0] = a; };
    k.diffusion_block = [](double, std::span<const double>, std::size_t, std::span<double> out) { out[0] = 0.0; };
    k.jump_coeff = [](double, std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    k.initial = [eta](RandomStream&, std::span<double> out) { out[0] = eta; };
    k.mark_sampler = [](RandomStream& s, std::span<double> out) { out[0] = s.normal(); };
    return SdeProblem(std::move(k));
}

void deterministic(Outcome& o) {
    const auto p = deterministic_problem(0.7, 1.3);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 1024; ++n) {
        const Discretization d{3, n};
        const double x = simulate_path(p, d, make_path_noise(p, d, 5, n, 0)).terminal_state[0];
        worst = std::max(worst, std::abs(x - 2.0));
    }
    o.require(worst <= 1e-12, "constant drift");
    o.detail << "max |X(T) - (eta + aT)| over n=1..1024: " << fmt(worst) << "; ";

    const auto zero = deterministic_problem(0.0, 2.0);
    const auto r = run_mlmc(zero, identity_payoff(), 0.1, merton_schedule(), 3);
    bool zero_var = true;
    for (const auto& l : r.per_level) zero_var = zero_var && l.variance() == 0.0;
    o.require(r.value == 2.0 && zero_var && r.converged, "degenerate MLMC");
    o.detail << "degenerate MLMC value " << format_double(r.value) << " with " << r.per_level.size()
             << " zero-variance levels";
}

// 3. Noise distributions.
void distributions(Outcome& o) {
    constexpr std::uint64_t draws = 100000;
    // Wiener increments, n = 4, M = 2, T = 1: 10^5 matrices, 8 * 10^5 entries
    std::vector<double> w;
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto s = derive_stream(31, {i, 0, StreamRole::wiener});
        const auto m = sample_wiener_increments(s, 4, 2, 1.0);
        w.insert(w.end(), m.data().begin(), m.data().end());
    }
    const double wm = mean_of(w), wv = sd_of(w) * sd_of(w);
    o.require(std::abs(wm) <= 4.0 * 0.5 / std::sqrt(8.0e5), "Wiener mean");
    o.require(std::abs(wv - 0.25) <= 0.05 * 0.25, "Wiener variance");
    o.detail << "dW mean " << fmt(wm) << " var " << fmt(wv) << "; ";

    const auto marks = merton_problem(kSpec).mark_sampler();
    std::vector<double> counts;
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto t = derive_stream(32, {i, 0, StreamRole::jumps});
        auto m = derive_stream(32, {i, 0, StreamRole::marks});
        counts.push_back(static_cast<double>(sample_jumps(t, m, 1.0, 1.0, 1, marks).size()));
    }
    const double cm = mean_of(counts), cv = sd_of(counts) * sd_of(counts);
    o.require(std::abs(cm - 1.0) <= 0.02, "Poisson mean");
    o.require(std::abs(cv - 1.0) <= 0.05, "Poisson variance");
    o.detail << "N(T) mean " << fmt(cm) << " var " << fmt(cv) << "; ";

    bool inside = true;
    std::vector<double> first, frac;
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto s = derive_stream(33, {i, 0, StreamRole::theta_fine});
        const auto th4 = sample_thetas(s, 4, 1.0);
        inside = inside && th4[2] >= 0.5 && th4[2] <= 0.75;
        for (std::size_t j = 0; j < 4; ++j) frac.push_back(th4[j] * 4.0 - static_cast<double>(j));
        auto s2 = derive_stream(34, {i, 0, StreamRole::theta_fine});
        first.push_back(sample_thetas(s2, 2, 1.0)[0]);
    }
    o.require(inside, "theta_2 in [0.5, 0.75]");
    const double tm = mean_of(first);
    o.require(std::abs(tm - 0.25) <= 0.005, "theta_0 mean");
    // Kolmogorov-Smirnov of the within-step positions against U(0,1)
    std::sort(frac.begin(), frac.end());
    double ks = 0.0;
    const double nf = static_cast<double>(frac.size());
    for (std::size_t i = 0; i < frac.size(); ++i) {
        ks = std::max({ks, std::abs((i + 1) / nf - frac[i]), std::abs(frac[i] - i / nf)});
    }
    o.require(ks <= 1.6276 / std::sqrt(nf), "theta uniformity (KS, 1%)");
    o.detail << "theta_0 mean " << fmt(tm) << ", KS " << fmt(ks) << " vs " << fmt(1.6276 / std::sqrt(nf));
}

// 4. Strong rate against the exact solution.
void strong_rate(Outcome& o) {
    const auto p = merton_problem(kSpec);
    const std::size_t m = 1000;
    std::vector<double> x, y;
    for (std::size_t n = 4; n <= 512; n *= 2) {
        double ss = 0.0;
        for (std::uint64_t i = 0; i < 2000; ++i) {
            const auto noise = make_path_noise(p, {m, n}, 41, i, 0);
            const double e = simulate_path(p, {m, n}, noise).terminal_state[0] -
                             merton_exact_terminal(kSpec, noise.wiener_increments.column_sums(), noise.jumps.marks);
            ss += e * e;
        }
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(0.5 * std::log(ss / 2000.0));
        o.detail << "n=" << n << ":" << fmt(std::exp(y.back()), 3) << " ";
    }
    const double s = ls_slope(x, y);
    o.require(s >= -0.65 && s <= -0.35, "slope in [-0.65, -0.35]");
    o.detail << "; slope " << fmt(s);
}

// 5. Level variance decay.
void variance_decay(Outcome& o) {
    const auto p = merton_problem(kSpec);
    const auto schedule = merton_schedule();
    std::vector<double> x, y;
    for (std::uint32_t l = 1; l <= 6; ++l) {
        const auto st = sample_level(p, call_payoff(1.0), schedule, l, 51, 10000);
        x.push_back(l);
        y.push_back(std::log2(st.variance()));
        o.detail << "v" << l << "=" << fmt(st.variance(), 3) << " ";
    }
    const double s = ls_slope(x, y);
    o.require(s >= -1.4 && s <= -0.6, "slope in [-1.4, -0.6]");
    o.detail << "; slope " << fmt(s);
}

// Shared by 6 and 7: the full sweep on the default grid.
const std::vector<SweepRow>& default_sweep() {
    static const std::vector<SweepRow> rows = [] {
        SweepConfig c;
        c.spec = kSpec;
        c.eps_grid = {0.2, 0.1, 0.05, 0.02};
        c.mc_repetitions = 1;  // MC cost is exactly K M n for every repetition
        c.mlmc_repetitions = 100;
        c.master_seed = 61;
        c.reference = {fixtures::kReferenceValue, fixtures::kReferenceCi, 0.0, fixtures::kReferenceSamples,
                       fixtures::kReferenceTruncation};
        return sweep(c, [](const SweepRow& r) {
            std::fprintf(stderr, "  sweep row eps=%s %s: error %s, mean cost %s\n", fmt(r.eps).c_str(),
                         to_string(r.estimator).c_str(), fmt(r.empirical_error).c_str(), fmt(r.mean_cost).c_str());
        });
    }();
    return rows;
}

// 6. MLMC accuracy.
void mlmc_accuracy(Outcome& o) {
    for (const auto& r : default_sweep()) {
        if (r.estimator != EstimatorKind::mlmc || r.eps > 0.1) continue;
        o.require(!r.failed && r.repetitions == 100 && r.empirical_error <= 1.5 * r.eps, "eps " + fmt(r.eps));
        o.detail << "eps=" << fmt(r.eps) << ": e=" << fmt(r.empirical_error) << " (<= " << fmt(1.5 * r.eps) << "); ";
    }
}

// 7. Cost separation.
void cost_separation(Outcome& o) {
    std::vector<std::pair<double, double>> mc, ml;
    for (const auto& r : default_sweep()) {
        o.require(!r.failed, "row eps " + fmt(r.eps) + " " + to_string(r.estimator));
        (r.estimator == EstimatorKind::mc ? mc : ml).emplace_back(1.0 / r.eps, r.mean_cost);
    }
    if (!o.pass) return;
    const double s_mc = fit_loglog_slope(mc).slope, s_ml = fit_loglog_slope(ml).slope;
    o.require(std::abs(s_mc - 6.0) <= 0.3, "MC slope 6 +- 0.3");
    o.require(s_ml <= s_mc - 1.0, "MLMC slope <= MC slope - 1");
    o.detail << "MC slope " << fmt(s_mc) << ", MLMC slope " << fmt(s_ml) << "; cost ratios";
    double prev = INFINITY;
    for (std::size_t i = 0; i < mc.size(); ++i) {
        const double ratio = ml[i].second / mc[i].second;
        o.require(ratio < prev, "ratio decreasing at eps " + fmt(1.0 / mc[i].first));
        prev = ratio;
        o.detail << " " << fmt(ratio, 3);
    }
}

// 8. Telescoping: MLMC runs against direct MC on the finest level each run used.
void telescoping(Outcome& o) {
    const auto p = merton_problem(kSpec);
    const auto pay = call_payoff(1.0);
    const auto schedule = merton_schedule();
    const double eps = 0.1;
    std::vector<double> estimates;
    std::map<std::uint32_t, int> finest;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto r = run_mlmc(p, pay, eps, schedule, derive_seed(81, 0, rep));
        estimates.push_back(r.value);
        ++finest[static_cast<std::uint32_t>(r.per_level.size() - 1)];
    }
    double oracle = 0.0, oracle_var = 0.0;
    for (const auto& [level, count] : finest) {
        const auto batch = omp::sample_payoffs(p, pay, schedule.at(level), 82, 0, {0, 100000}, 0);
        const double w = count / 100.0;
        oracle += w * mean_of(batch.values);
        oracle_var += w * w * sd_of(batch.values) * sd_of(batch.values) / 1e5;
        o.detail << "L=" << level << " x" << count << " ";
    }
    const double mlmc = mean_of(estimates), mlmc_se = sd_of(estimates) / 10.0;
    const double tol = 3.0 * std::sqrt(mlmc_se * mlmc_se + oracle_var);
    o.require(std::abs(mlmc - oracle) <= tol, "within combined 3 sigma");
    o.detail << "; MLMC mean " << fmt(mlmc, 6) << " vs direct " << fmt(oracle, 6) << ", |diff| "
             << fmt(std::abs(mlmc - oracle)) << " <= " << fmt(tol);
}

// 9. Bitwise reproducibility of the CLI across worker counts.
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void reproducibility(Outcome& o) {
    const fs::path dir = fs::temp_directory_path() / ("mlmcjd_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"reference", "reference --seed 9 --ref-samples 20000 --ref-truncation 500"},
        {"mc", "mc --eps 0.05 --seed 9"},
        {"mlmc", "mlmc --eps 0.05 --seed 9"},
        {"sweep", "sweep --eps-grid 0.2,0.1,0.05 --reps 4 --ref-samples 5000 --ref-truncation 200 --seed 9"},
    };
    for (const auto& [name, args] : runs) {
        std::optional<std::string> first;
        bool same = true;
        for (int workers : {1, 4, 8}) {
            const auto out = dir / (name + "_" + std::to_string(workers) + ".csv");
            const std::string cmd = std::string(MLMCJD_CLI) + " " + args + " --workers " + std::to_string(workers) +
                                    " --out " + out.string() + " > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            o.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, name + " exit status");
            const std::string csv = slurp(out);
            o.require(!csv.empty(), name + " output");
            if (!first) first = csv;
            same = same && csv == *first;
        }
        o.require(same, name + " identical for workers 1/4/8");
        o.detail << name << (same ? " identical" : " DIFFERS") << "; ";
    }
    fs::remove_all(dir);
}

struct Criterion {
    int id;
    const char* title;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "formula-exact MC sizing", sizing},
        {2, "deterministic exactness", deterministic},
        {3, "distributional checks", distributions},
        {4, "strong rate", strong_rate},
        {5, "level variance decay", variance_decay},
        {6, "MLMC accuracy", mlmc_accuracy},
        {7, "cost separation", cost_separation},
        {8, "telescoping consistency", telescoping},
        {9, "reproducibility across workers", reproducibility},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
