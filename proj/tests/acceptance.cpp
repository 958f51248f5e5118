// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "bddmma/bdd.h"
#include "bddmma/decomposition.h"
#include "bddmma/dual.h"
#include "bddmma/oracle.h"
#include "bddmma/primal.h"
#include "test_support.h"

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace bddmma;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

struct Problem {
    IlpInstance instance;
    Decomposition decomposition;
    explicit Problem(IlpInstance inst) : instance(std::move(inst)), decomposition(instance) {}
};

DualConfig single_thread()
{
    DualConfig c;
    c.threads = 1;
    return c;
}

std::vector<IlpInstance> dual_instances()
{
    std::mt19937_64 rng(2024);
    testing::RandomInstanceOptions opt;
    opt.max_variables = 12;
    opt.max_constraints = 6;
    opt.forbid_forced = true;
    std::vector<IlpInstance> out;
    for (int t = 0; t < 200; ++t)
        out.push_back(testing::random_instance(rng, opt));
    return out;
}

std::vector<IlpInstance> rounding_instances()
{
    std::mt19937_64 rng(77);
    testing::RandomInstanceOptions opt;
    opt.max_variables = 12;
    std::vector<IlpInstance> out;
    for (int t = 0; t < 100; ++t)
        out.push_back(testing::random_instance(rng, opt));
    return out;
}

Outcome bdd_correctness()
{
    std::mt19937_64 rng(1);
    std::size_t infeasible = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
        LinearConstraint c = testing::random_constraint(rng, testing::random_subset(rng, 16, k), 5);
        c.name = "r" + std::to_string(trial);
        const auto expected = oracle::satisfying_assignments(c);
        if (expected.empty()) {
            try {
                build_bdd(c);
                return {false, c.name + ": infeasible constraint compiled"};
            } catch (const InfeasibleConstraint&) {
                ++infeasible;
                continue;
            }
        }
        const Bdd bdd = build_bdd(c);
        if (bdd.enumerate_paths() != expected)
            return {false, c.name + ": path set differs"};
        for (std::uint32_t code = 0; code < (1U << k); ++code) {
            Assignment x(k);
            for (std::size_t t = 0; t < k; ++t)
                x[t] = (code >> t) & 1U;
            if (bdd.evaluate(x) != constraint_satisfied(c, x))
                return {false, c.name + ": evaluate disagrees"};
        }
    }
    return {true, "500 constraints, " + std::to_string(infeasible) + " infeasible"};
}

Outcome balance_example()
{
    Problem p(parse_lp(testing::balance_lp));
    if (p.decomposition.bdd(0).partition_sizes() != std::vector<std::size_t>{1, 2, 3, 2})
        return {false, "partition sizes"};
    DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
    if (std::abs(solver.subproblem(0).energy()) > 1e-12)
        return {false, "subproblem optimum"};
    const MinMarginals mm = solver.exact_min_marginals();
    const std::vector<double> lambda{2, 3, 1, 4};
    for (std::size_t t = 0; t < 4; ++t) {
        const auto [m0, m1] = oracle::min_marginals_exhaustive(p.instance.constraints[0], lambda, t);
        if (std::abs(mm.values[0][t].m0 - m0) > 1e-12 || std::abs(mm.values[0][t].m1 - m1) > 1e-12)
            return {false, "min-marginal of " + p.instance.variable_names[t]};
    }
    return {true, "partitions (1,2,3,2), a:(0,3) b:(0,4) c:(0,3) d:(0,6)"};
}

Outcome min_marginal_equivalence(const std::vector<IlpInstance>& instances)
{
    double worst = 0.0;
    std::size_t checked = 0;
    for (const auto& inst : instances) {
        Problem p(inst);
        DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition), single_thread());
        solver.set_observer([&](const MinMarginalEvent& e) {
            const auto [m0, m1] = oracle::min_marginals_exhaustive(p.instance.constraints[e.subproblem], e.lambda, e.local);
            worst = std::max({worst, std::abs(m0 - e.value.m0), std::abs(m1 - e.value.m1)});
            ++checked;
        });
        for (int t = 0; t < 20; ++t)
            solver.iterate();
    }
    std::ostringstream detail;
    detail << checked << " min-marginals, max error " << worst;
    return {worst <= 1e-9, detail.str()};
}

enum class Stage { initial, pass, finalized };

/// Runs 20 iterations pass by pass, calling `check` before, after each pass and after finalize.
template <typename Check>
bool for_each_pass(const std::vector<IlpInstance>& instances, Check&& check)
{
    for (const auto& inst : instances) {
        Problem p(inst);
        DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
        if (!check(p, solver, solver.lower_bound(), Stage::initial))
            return false;
        for (int pass = 0; pass < 40; ++pass) {
            const double lb = solver.pass(pass % 2 ? PassDirection::backward : PassDirection::forward);
            if (!check(p, solver, lb, Stage::pass))
                return false;
        }
        solver.finalize();
        if (!check(p, solver, solver.lower_bound(), Stage::finalized))
            return false;
    }
    return true;
}

Outcome monotonicity(const std::vector<IlpInstance>& instances)
{
    double previous = 0.0;
    double worst_drop = 0.0;
    const bool ok = for_each_pass(instances, [&](const Problem&, const DualSolver&, double lb, Stage stage) {
        if (stage != Stage::initial) {
            worst_drop = std::max(worst_drop, previous - lb);
            if (lb < previous - 1e-9 * (1.0 + std::abs(previous)))
                return false;
        }
        previous = lb;
        return true;
    });
    std::ostringstream detail;
    detail << "largest decrease " << worst_drop;
    return {ok, detail.str()};
}

Outcome iterate_feasibility(const std::vector<IlpInstance>& instances)
{
    double worst = 0.0;
    const bool ok = for_each_pass(instances, [&](const Problem& p, const DualSolver& solver, double, Stage stage) {
        const double omega = solver.config().omega;
        for (std::size_t i = 0; i < p.instance.nr_variables(); ++i) {
            if (p.decomposition.multiplicity(i) == 0)
                continue;
            double sum = 0.0;
            for (const auto& o : p.decomposition.occurrences(i)) {
                const SubproblemState& s = solver.subproblem(o.subproblem);
                sum += s.lambda()[o.local];
                if (stage != Stage::finalized)
                    sum += omega * solver.difference(s.min_marginals()[o.local]);
            }
            worst = std::max(worst, std::abs(sum - p.instance.objective[i]));
        }
        return worst <= 1e-9;
    });
    std::ostringstream detail;
    detail << "max coupling error " << worst;
    return {ok, detail.str()};
}

Outcome weak_duality(const std::vector<IlpInstance>& instances)
{
    std::size_t primal_checked = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& inst : instances) {
        Problem p(inst);
        const auto optimum = oracle::solve_exhaustive(p.instance);
        if (!optimum)
            return {false, "generator produced an infeasible instance"};
        DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
        solver.run();
        solver.finalize();
        const double bound = solver.lower_bound();
        worst = std::max(worst, bound - optimum->value);
        if (bound > optimum->value + 1e-9)
            return {false, "bound exceeds optimum"};
        try {
            const Solution sol = round_primal(solver, {});
            ++primal_checked;
            if (sol.objective < bound - 1e-9)
                return {false, "primal objective below bound"};
        } catch (const RoundingFailure&) {
        }
    }
    std::ostringstream detail;
    detail << instances.size() << " instances, max(bound - optimum) " << worst << ", " << primal_checked << " primal solutions";
    return {true, detail.str()};
}

Outcome primal_rounding(const std::vector<IlpInstance>& instances)
{
    std::size_t successes = 0;
    for (const auto& inst : instances) {
        Problem p(inst);
        DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
        solver.run();
        solver.finalize();
        PrimalConfig cfg;
        cfg.max_rounds = 100;
        try {
            const Solution sol = round_primal(solver, cfg);
            for (const auto& c : p.instance.constraints)
                if (!constraint_satisfied_global(c, sol.assignment))
                    return {false, "returned solution violates " + c.name};
            if (!check_feasible(p.instance, sol.assignment))
                return {false, "returned solution infeasible"};
            ++successes;
        } catch (const RoundingFailure&) {
        }
    }
    return {successes >= 95, std::to_string(successes) + "/" + std::to_string(instances.size()) + " rounded"};
}

Outcome lifted_cross_check()
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double clamp = DualConfig{}.clamp;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const double lambda = value(rng);
        const double omega = 1.0 - unit(rng); // (0, 1]
        const MinMarginalPair m{value(rng), value(rng)};
        const MinMarginalPair mbar{value(rng), value(rng)};
        const double expected = oracle::lifted_update_reference(lambda, {m.m0, m.m1}, {mbar.m0, mbar.m1}, omega);
        const double got = averaged_update(lambda, m, omega * clamped_difference(mbar, clamp), omega, clamp);
        worst = std::max(worst, std::abs(expected - got));
    }
    if (worst > 1e-12)
        return {false, "update mismatch " + std::to_string(worst)};

    std::size_t energies = 0;
    for (int t = 0; t < 300; ++t) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        LinearConstraint c = testing::random_constraint(rng, testing::random_subset(rng, 8, k), 4);
        if (oracle::satisfying_assignments(c).empty())
            continue;
        std::vector<double> lambda(k);
        for (auto& l : lambda)
            l = value(rng);
        const Bdd bdd = build_bdd(c);
        SubproblemState state(bdd, lambda);
        const double single = backward_sweep(state);
        const double lifted = oracle::lifted_energy(c, oracle::LiftedMultipliers::lift(lambda));
        if (std::abs(single - lifted) > 1e-12)
            return {false, "lifted energy mismatch"};
        ++energies;
    }
    std::ostringstream detail;
    detail << "1000 updates (max error " << worst << "), " << energies << " energies";
    return {true, detail.str()};
}

Outcome determinism()
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bddmma_determinism";
    fs::create_directories(dir);

    std::mt19937_64 rng(99);
    testing::RandomInstanceOptions opt;
    opt.max_variables = 60;
    opt.max_constraints = 40;
    opt.max_constraint_size = 8;
    IlpInstance inst;
    do
        inst = testing::random_instance(rng, opt);
    while (inst.nr_variables() < 40);
    const std::string input = (dir / "instance.lp").string();
    testing::write_file(input, write_lp(inst));

    std::vector<std::string> outputs;
    for (const char* threads : {"1", "8"}) {
        const std::string tag = (dir / ("t" + std::string(threads))).string();
        const std::string cmd = std::string(BDDMMA_CLI_PATH) + " " + input + " --threads " + threads +
                                " --seed 5 --no-timing --log " + tag + ".csv --solution " + tag + ".sol > " + tag + ".out 2>&1";
        const int status = testing::run_command(cmd);
        if (status != 0 && status != 4)
            return {false, "cli exited with " + std::to_string(status)};
        outputs.push_back(testing::read_file(tag + ".csv") + '\x1f' + testing::read_file(tag + ".sol") + '\x1f' + testing::read_file(tag + ".out"));
    }
    if (outputs[0] != outputs[1])
        return {false, "outputs differ between 1 and 8 threads"};
    return {true, "log, solution and report identical (" + std::to_string(inst.nr_variables()) + " variables, " +
                      std::to_string(inst.nr_constraints()) + " constraints)"};
}

Outcome end_to_end()
{
    bool ok = true;
    std::ostringstream detail;
    const auto note = [&](bool pass, const std::string& text) {
        ok = ok && pass;
        detail << (detail.tellp() > 0 ? "; " : "") << text << (pass ? "" : " [failed]");
    };
    {
        Problem p(parse_lp(testing::cover_lp));
        DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
        solver.run();
        solver.finalize();
        const double bound = solver.lower_bound();
        const Solution sol = round_primal(solver, {});
        note(bound == 1.0 && sol.objective == 1.0 && sol.objective - bound == 0.0,
             "cover bound " + format_double(bound) + " cost " + format_double(sol.objective));
    }
    Problem p(parse_lp(testing::two_constraint_lp));
    DualSolver solver(p.instance, p.decomposition, init_multipliers(p.instance, p.decomposition));
    const double initial = solver.lower_bound();
    note(std::abs(initial - 0.5) <= 1e-12, "two-constraint initial bound " + format_double(initial));
    solver.run();
    solver.finalize();
    try {
        const Solution sol = round_primal(solver, {});
        const double optimum = oracle::solve_exhaustive(p.instance)->value;
        note(sol.objective == optimum, "primal objective " + format_double(sol.objective) + " vs optimum " + format_double(optimum));
    } catch (const RoundingFailure&) {
        note(true, "rounding did not reach consensus");
    }
    return {ok, detail.str()};
}

} // namespace

int main()
{
    const std::vector<IlpInstance> instances = dual_instances();
    const std::vector<IlpInstance> rounding = rounding_instances();
    std::vector<IlpInstance> all = instances;
    all.insert(all.end(), rounding.begin(), rounding.end());
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"bdd correctness", bdd_correctness},
        {"balance constraint example", balance_example},
        {"min-marginal oracle equivalence", [&] { return min_marginal_equivalence(instances); }},
        {"lower bound monotonicity", [&] { return monotonicity(instances); }},
        {"iterate feasibility", [&] { return iterate_feasibility(instances); }},
        {"weak duality", [&] { return weak_duality(all); }},
        {"primal rounding", [&] { return primal_rounding(rounding); }},
        {"lifted cross-check", lifted_cross_check},
        {"thread determinism", determinism},
        {"end-to-end toys", end_to_end},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << k + 1 << "] " << criteria[k].first << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
