// bddmma: solve a 0-1 ILP given in LP format with parallel deferred min-marginal
// averaging over per-constraint BDDs, followed by perturbation rounding.

#include "bddmma/decomposition.h"
#include "bddmma/dual.h"
#include "bddmma/ilp.h"
#include "bddmma/kernels.h"
#include "bddmma/primal.h"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

using namespace bddmma;

namespace {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_parse_error = 2,
    exit_infeasible = 3,
    exit_rounding_failure = 4,
    exit_internal = 5,
};

struct Options {
    std::string input;
    DualConfig dual;
    PrimalConfig primal;
    bool no_primal = false;
    bool no_timing = false;
    std::string log_path;
    std::string solution_path;
    std::string kernels = "auto";
};

struct RunReport {
    std::string instance;
    bool maximize = false;
    double dual_bound = 0.0; // minimization form
    std::optional<double> primal_value;
    std::size_t iterations = 0;
    std::optional<std::size_t> rounding_rounds;
    double dual_ms = 0.0;
    double primal_ms = 0.0;
};

std::string opt_str(const std::optional<double>& v)
{
    return v ? format_double(*v) : "none";
}

void print_report(const RunReport& r, bool timing)
{
    // minimization: dual bound below, primal above; maximization mirrors after negation
    std::optional<double> lower = r.dual_bound;
    std::optional<double> upper = r.primal_value;
    if (r.maximize) {
        lower = r.primal_value ? std::optional<double>(-*r.primal_value) : std::nullopt;
        upper = -r.dual_bound;
    }
    std::optional<double> gap;
    if (lower && upper)
        gap = *upper - *lower;
    std::cout << "instance: " << r.instance << '\n'
              << "sense: " << (r.maximize ? "maximize" : "minimize") << '\n'
              << "lower_bound: " << opt_str(lower) << '\n'
              << "upper_bound: " << opt_str(upper) << '\n'
              << "gap: " << opt_str(gap) << '\n'
              << "iterations: " << r.iterations << '\n'
              << "rounding_rounds: " << (r.rounding_rounds ? std::to_string(*r.rounding_rounds) : "none") << '\n';
    if (timing)
        std::cout << "dual_ms: " << format_double(r.dual_ms) << '\n'
                  << "primal_ms: " << format_double(r.primal_ms) << '\n'
                  << "total_ms: " << format_double(r.dual_ms + r.primal_ms) << '\n';
}

int run(const Options& opt)
{
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t) { return std::chrono::duration<double, std::milli>(clock::now() - t).count(); };

    if (opt.kernels == "scalar")
        kernels::select(kernels::Isa::scalar);
    else if (opt.kernels == "avx2" && !kernels::select(kernels::Isa::avx2))
        std::cerr << "warning: avx2 kernels unavailable, using scalar\n";

    IlpInstance instance;
    try {
        instance = parse_lp_file(opt.input);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << opt.input << ": " << e.what() << '\n';
        return exit_parse_error;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }

    const auto start = clock::now();
    std::optional<Decomposition> decomposition;
    try {
        decomposition.emplace(instance);
    } catch (const InfeasibleConstraint& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return exit_infeasible;
    }

    std::ofstream log;
    if (!opt.log_path.empty()) {
        log.open(opt.log_path);
        if (!log) {
            std::cerr << "error: cannot write log '" << opt.log_path << "'\n";
            return exit_usage;
        }
        log << "iteration,phase,lower_bound,elapsed_ms\n";
    }
    const auto log_row = [&](std::size_t iteration, const char* phase, double bound) {
        if (log)
            log << iteration << ',' << phase << ',' << format_double(bound) << ',' << (opt.no_timing ? "0" : format_double(ms_since(start))) << '\n';
    };

    RunReport report;
    report.instance = std::filesystem::path(opt.input).stem().string();
    report.maximize = instance.maximize;

    DualSolver solver(instance, *decomposition, init_multipliers(instance, *decomposition), opt.dual);
    const ConvergenceRecord record = solver.run([&](const PassRecord& p) { log_row(p.iteration, to_string(p.direction), p.lower_bound); });
    solver.finalize();
    report.dual_bound = solver.lower_bound();
    report.iterations = record.iterations;
    report.dual_ms = ms_since(start);

    int status = exit_ok;
    if (!opt.no_primal) {
        const auto primal_start = clock::now();
        try {
            const Solution sol = round_primal(solver, opt.primal, [&](const RoundingRecord& r) { log_row(r.round, "perturb", r.heuristic_bound); });
            report.primal_value = sol.objective;
            report.rounding_rounds = sol.rounds_used;
            if (!opt.solution_path.empty()) {
                std::ofstream out(opt.solution_path);
                if (!out) {
                    std::cerr << "error: cannot write solution '" << opt.solution_path << "'\n";
                    return exit_usage;
                }
                for (std::size_t i = 0; i < instance.nr_variables(); ++i)
                    out << instance.variable_names[i] << ' ' << static_cast<int>(sol.assignment[i]) << '\n';
                out << "objective " << format_double(reported_objective(instance, sol.objective)) << '\n';
            }
        } catch (const RoundingFailure& e) {
            std::cerr << "rounding failed: " << e.what() << '\n';
            report.rounding_rounds = opt.primal.max_rounds;
            status = exit_rounding_failure;
        }
        report.primal_ms = ms_since(primal_start);
    }
    print_report(report, !opt.no_timing);
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lagrange decomposition solver for 0-1 integer linear programs"};
    Options opt;
    opt.dual.threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("input", opt.input, "LP file")->required();
    app.add_option("--omega", opt.dual.omega, "damping factor in (0,1]")->capture_default_str();
    app.add_option("--max-iter", opt.dual.max_iterations, "maximum dual iterations")->capture_default_str();
    app.add_option("--tol", opt.dual.rel_improvement_tol, "relative lower-bound improvement for stopping")->capture_default_str();
    app.add_option("--delta", opt.primal.delta0, "initial perturbation strength")->capture_default_str();
    app.add_option("--alpha", opt.primal.alpha, "perturbation growth rate")->capture_default_str();
    app.add_option("--inner-passes", opt.primal.inner_passes, "dual iterations per perturbation round")->capture_default_str();
    app.add_option("--max-rounds", opt.primal.max_rounds, "maximum perturbation rounds")->capture_default_str();
    app.add_option("--seed", opt.primal.seed, "perturbation seed")->capture_default_str();
    app.add_option("--threads", opt.dual.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--no-primal", opt.no_primal, "skip primal rounding");
    app.add_option("--log", opt.log_path, "CSV convergence log");
    app.add_option("--solution", opt.solution_path, "solution output file");
    app.add_flag("--no-timing", opt.no_timing, "write 0 for elapsed times so outputs are reproducible");
    app.add_option("--kernels", opt.kernels, "layer kernels: auto, scalar, avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
        ->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }
    try {
        opt.dual.validate();
        opt.primal.validate();
        return run(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
}
