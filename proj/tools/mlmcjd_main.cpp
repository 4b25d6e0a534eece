// mlmcjd: reference | mc | mlmc | sweep

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "mlmcjd/config.hpp"
#include "mlmcjd/estimators.hpp"
#include "mlmcjd/experiment.hpp"

using namespace mlmcjd;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitEstimator = 2;

// CSV goes to --out when given, otherwise to stdout after the report.
class CsvSink {
public:
    explicit CsvSink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
            if (!*file_) throw ConfigError("out: cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void flush() { stream().flush(); }

private:
    std::unique_ptr<std::ofstream> file_;
};

void print_report(const EstimateReport& r) {
    std::cout << r.estimator << " estimate " << format_double(r.value) << "  (eps " << format_double(r.target_eps)
              << ", cost " << r.total_cost << " M*n units, " << r.iterations << " iteration(s)"
              << (r.converged ? "" : ", NOT converged") << ")\n";
    std::cout << std::setw(6) << "level" << std::setw(8) << "M" << std::setw(10) << "n" << std::setw(12) << "samples"
              << std::setw(12) << "target" << std::setw(24) << "mean" << std::setw(24) << "variance" << '\n';
    for (const auto& s : r.per_level) {
        std::cout << std::setw(6) << s.level << std::setw(8) << s.truncation << std::setw(10) << s.density
                  << std::setw(12) << s.samples_used << std::setw(12) << s.target << std::setw(24)
                  << format_double(s.mean()) << std::setw(24) << format_double(s.variance()) << '\n';
    }
    for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';
}

void write_report_csv(std::ostream& out, const EstimateReport& r) {
    out << "estimator,eps,value,total_cost,levels,iterations,converged\n";
    out << r.estimator << ',' << format_double(r.target_eps) << ',' << format_double(r.value) << ',' << r.total_cost
        << ',' << r.per_level.size() << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
}

int run_estimator(const RunConfig& cfg) {
    const SdeProblem problem = make_problem(cfg);
    const DeltaFunction delta = make_delta(cfg);
    const Payoff payoff = call_payoff(cfg.strike);
    CsvSink sink(cfg.out);

    EstimateReport report;
    int status = 0;
    try {
        if (cfg.command == Command::mc) {
            report = run_mc(problem, payoff, cfg.eps, delta, cfg.seed, {cfg.alpha, cfg.workers});
        } else {
            const LevelSchedule schedule(cfg.beta, cfg.alpha, delta, problem.horizon());
            report = run_mlmc(problem, payoff, cfg.eps, schedule, cfg.seed, {cfg.caps, 1000, cfg.workers});
        }
    } catch (const EstimatorError& e) {
        std::cerr << "error: " << e.what() << '\n';
        report = e.partial();
        status = kExitEstimator;
    } catch (const SimulationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimator;
    }
    print_report(report);
    write_report_csv(sink.stream(), report);
    sink.flush();
    return status;
}

int run_reference(const RunConfig& cfg) {
    CsvSink sink(cfg.out);
    const ReferenceValue ref =
        reference_value(cfg.merton, cfg.strike, cfg.reference_truncation, cfg.reference_samples, cfg.seed, cfg.workers);
    std::cout << "reference " << format_double(ref.value) << " +- " << format_double(ref.ci_halfwidth)
              << " (99%, M = " << ref.truncation << ", K = " << ref.samples << ")\n";
    auto& out = sink.stream();
    out << "truncation,samples,reference_value,reference_ci\n";
    out << ref.truncation << ',' << ref.samples << ',' << format_double(ref.value) << ','
        << format_double(ref.ci_halfwidth) << '\n';
    sink.flush();
    return 0;
}

int run_sweep(const RunConfig& cfg) {
    CsvSink sink(cfg.out);
    SweepConfig sc;
    sc.spec = cfg.merton;
    sc.strike = cfg.strike;
    sc.eps_grid = cfg.eps_grid;
    sc.mc_repetitions = cfg.mc_repetitions;
    sc.mlmc_repetitions = cfg.mlmc_repetitions;
    sc.master_seed = cfg.seed;
    sc.beta = cfg.beta;
    sc.alpha = cfg.alpha;
    sc.caps = cfg.caps;
    sc.workers = cfg.workers;
    sc.reference =
        reference_value(cfg.merton, cfg.strike, cfg.reference_truncation, cfg.reference_samples, cfg.seed, cfg.workers);
    std::cerr << "# reference " << format_double(sc.reference.value) << " +- "
              << format_double(sc.reference.ci_halfwidth) << '\n';

    auto& out = sink.stream();
    out << kSweepCsvHeader << '\n';
    bool failed = false;
    sweep(sc, [&](const SweepRow& row) {
        write_sweep_row(out, row);
        sink.flush();
        std::cerr << "# row eps=" << format_double(row.eps) << " " << to_string(row.estimator);
        if (row.failed) {
            failed = true;
            std::cerr << " FAILED: " << row.error << '\n';
        } else {
            std::cerr << " error=" << format_double(row.empirical_error)
                      << " mean_cost=" << format_double(row.mean_cost) << '\n';
        }
    });
    return failed ? kExitEstimator : 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        cfg = parse_config(argc, argv);
    } catch (const ConfigError& e) {
        (e.exit_code() == 0 ? std::cout : std::cerr) << e.what() << (e.exit_code() == 0 ? "" : "\n");
        return e.exit_code();
    }

    std::cerr << "# resolved configuration\n";
    std::istringstream lines(describe(cfg));
    for (std::string line; std::getline(lines, line);) std::cerr << "# " << line << '\n';

    try {
        switch (cfg.command) {
        case Command::reference: return run_reference(cfg);
        case Command::mc:
        case Command::mlmc: return run_estimator(cfg);
        case Command::sweep: return run_sweep(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEstimator;
    }
    return 0;
}
