#include "bddmma/dual.h"
#include "bddmma/oracle.h"
#include "test_support.h"

#include <doctest.h>

#include <limits>

using namespace bddmma;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Fixture {
    IlpInstance instance;
    Decomposition decomposition;
    explicit Fixture(const std::string& lp) : instance(parse_lp(lp)), decomposition(instance) {}
    explicit Fixture(IlpInstance inst) : instance(std::move(inst)), decomposition(instance) {}
};

DualConfig with_threads(std::size_t threads)
{
    DualConfig c;
    c.threads = threads;
    return c;
}

} // namespace

TEST_CASE("clamped differences")
{
    CHECK(clamped_difference({1.0, 4.0}, 10.0) == 3.0);
    CHECK(clamped_difference({0.0, inf}, 10.0) == 10.0);
    CHECK(clamped_difference({inf, 2.0}, 10.0) == -10.0);
    CHECK(clamped_difference({0.0, 50.0}, 10.0) == 10.0);
    CHECK(clamped_difference({inf, 2.0}, 10.0, 3.0) == -3.0);
    CHECK(clamped_difference({0.0, 50.0}, 100.0, 3.0) == 50.0);
    CHECK(averaged_update(2.0, {0.0, 3.0}, 0.0, 0.5, 1e10) == 0.5);
    CHECK(averaged_update(2.0, {0.0, 3.0}, 1.5, 0.5, 1e10) == 2.0);
}

TEST_CASE("balance constraint min-marginals at lambda=(2,3,1,4)")
{
    Fixture f(testing::balance_lp);
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
    CHECK(solver.subproblem(0).dist_to_top()[solver.subproblem(0).bdd().root()] == 0.0);
    CHECK(solver.lower_bound() == 0.0);
    const MinMarginals mm = solver.exact_min_marginals();
    const std::vector<std::pair<double, double>> expected{{0, 3}, {0, 4}, {0, 3}, {0, 6}};
    for (std::size_t t = 0; t < 4; ++t) {
        CHECK(mm.values[0][t].m0 == expected[t].first);
        CHECK(mm.values[0][t].m1 == expected[t].second);
    }
}

TEST_CASE("fixed variable has infinite zero min-marginal")
{
    Fixture f("min\n obj: 2 x\nst\n x = 1\nbinary\n x\nend\n");
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
    const MinMarginals mm = solver.exact_min_marginals();
    CHECK(mm.values[0][0].m0 == inf);
    CHECK(mm.values[0][0].m1 == 2.0);
}

TEST_CASE("first forward update on the balance constraint")
{
    Fixture f(testing::balance_lp);
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
    solver.pass(PassDirection::forward);
    CHECK(solver.subproblem(0).lambda()[0] == 0.5);
    const auto stored = solver.subproblem(0).min_marginals();
    CHECK(stored[0].m0 == 0.0);
    CHECK(stored[0].m1 == 3.0);
}

TEST_CASE("passes visit variables in partition order")
{
    Fixture f(testing::balance_lp);
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition), with_threads(1));
    std::vector<std::size_t> order;
    solver.set_observer([&](const MinMarginalEvent& e) { order.push_back(e.local); });
    solver.pass(PassDirection::forward);
    CHECK(order == std::vector<std::size_t>{0, 1, 2, 3});
    order.clear();
    solver.pass(PassDirection::backward);
    CHECK(order == std::vector<std::size_t>{3, 2, 1, 0});
}

TEST_CASE("single cover constraint is already a fixed point")
{
    Fixture f(testing::cover_lp);
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
    CHECK(solver.lower_bound() == 1.0);
    for (int t = 0; t < 5; ++t)
        CHECK(solver.iterate() == 1.0);
    solver.finalize();
    CHECK(solver.lower_bound() == 1.0);
    CHECK(solver.multipliers().values[0] == std::vector<double>{1.0, 1.0});
}

TEST_CASE("two-constraint instance starts at bound 0.5 and finalizes to the costs")
{
    Fixture f(testing::two_constraint_lp);
    DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
    CHECK(solver.lower_bound() == doctest::Approx(0.5).epsilon(1e-15));
    const ConvergenceRecord rec = solver.run();
    CHECK(rec.iterations >= 1);
    solver.finalize();
    const Multipliers m = solver.multipliers();
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(m.coupling_sum(f.decomposition, i) == doctest::Approx(f.instance.objective[i]).epsilon(1e-12));
    CHECK(solver.lower_bound() <= 3.0 + 1e-9);
    CHECK(solver.lower_bound() >= 0.5);
}

TEST_CASE("zero iterations leave the multipliers untouched")
{
    Fixture f(testing::two_constraint_lp);
    DualConfig cfg;
    cfg.max_iterations = 0;
    const Multipliers init = init_multipliers(f.instance, f.decomposition);
    DualSolver solver(f.instance, f.decomposition, init, cfg);
    const ConvergenceRecord rec = solver.run();
    CHECK(rec.iterations == 0);
    CHECK(rec.passes.empty());
    solver.finalize();
    CHECK(solver.multipliers() == init);
}

TEST_CASE("invalid configuration is rejected")
{
    Fixture f(testing::cover_lp);
    DualConfig cfg;
    cfg.omega = 0.0;
    CHECK_THROWS_AS(DualSolver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition), cfg), std::invalid_argument);
    cfg.omega = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("property: incremental min-marginals match enumeration")
{
    std::mt19937_64 rng(21);
    testing::RandomInstanceOptions opt;
    opt.forbid_forced = true;
    for (int trial = 0; trial < 40; ++trial) {
        Fixture f(testing::random_instance(rng, opt));
        DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition), with_threads(1));
        double worst = 0.0;
        solver.set_observer([&](const MinMarginalEvent& e) {
            const auto [m0, m1] = oracle::min_marginals_exhaustive(f.instance.constraints[e.subproblem], e.lambda, e.local);
            worst = std::max({worst, std::abs(m0 - e.value.m0), std::abs(m1 - e.value.m1)});
        });
        for (int t = 0; t < 10; ++t)
            solver.iterate();
        REQUIRE(worst <= 1e-9);
    }
}

TEST_CASE("property: bound is monotone, feasible and below the optimum")
{
    std::mt19937_64 rng(22);
    testing::RandomInstanceOptions opt;
    opt.forbid_forced = true;
    for (int trial = 0; trial < 40; ++trial) {
        Fixture f(testing::random_instance(rng, opt));
        const auto optimum = oracle::solve_exhaustive(f.instance);
        REQUIRE(optimum);
        DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
        double previous = solver.lower_bound();
        for (int p = 0; p < 30; ++p) {
            const double lb = solver.pass(p % 2 ? PassDirection::backward : PassDirection::forward);
            REQUIRE(lb >= previous - 1e-9 * (1.0 + std::abs(previous)));
            REQUIRE(lb <= optimum->value + 1e-9);
            previous = lb;
            for (std::size_t i = 0; i < f.instance.nr_variables(); ++i) {
                double sum = 0.0;
                for (const auto& o : f.decomposition.occurrences(i)) {
                    const auto& s = solver.subproblem(o.subproblem);
                    sum += s.lambda()[o.local] + 0.5 * solver.difference(s.min_marginals()[o.local]);
                }
                if (f.decomposition.multiplicity(i) > 0)
                    REQUIRE(std::abs(sum - f.instance.objective[i]) <= 1e-9);
            }
        }
        solver.finalize();
        REQUIRE(solver.lower_bound() >= previous - 1e-9 * (1.0 + std::abs(previous)));
        REQUIRE(solver.lower_bound() <= optimum->value + 1e-9);
    }
}

TEST_CASE("property: results do not depend on the thread count")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Fixture f(testing::random_instance(rng));
        DualSolver one(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition), with_threads(1));
        DualSolver four(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition), with_threads(4));
        for (int t = 0; t < 10; ++t)
            REQUIRE(one.iterate() == four.iterate());
        REQUIRE(one.multipliers() == four.multipliers());
    }
}

TEST_CASE("property: sweeps reproduce enumerated energies")
{
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 100; ++trial) {
        Fixture f(testing::random_instance(rng));
        const Multipliers m = init_multipliers(f.instance, f.decomposition);
        DualSolver solver(f.instance, f.decomposition, m);
        for (std::size_t j = 0; j < solver.nr_subproblems(); ++j) {
            const double expected = oracle::energy_exhaustive(f.instance.constraints[j], m.values[j]);
            REQUIRE(solver.subproblem(j).energy() == doctest::Approx(expected).epsilon(1e-12));
            REQUIRE(forward_sweep(solver.subproblem(j)) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: scalar and simd kernels give identical solver trajectories")
{
    if (!kernels::avx2_table())
        return;
    std::mt19937_64 rng(25);
    testing::RandomInstanceOptions opt;
    opt.max_variables = 24;
    opt.max_constraint_size = 12;
    for (int trial = 0; trial < 20; ++trial) {
        Fixture f(testing::random_instance(rng, opt));
        std::vector<Multipliers> results;
        std::vector<double> bounds;
        for (const kernels::Isa isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
            REQUIRE(kernels::select(isa));
            DualSolver solver(f.instance, f.decomposition, init_multipliers(f.instance, f.decomposition));
            for (int t = 0; t < 10; ++t)
                solver.iterate();
            results.push_back(solver.multipliers());
            bounds.push_back(solver.lower_bound());
        }
        REQUIRE(results[0] == results[1]);
        REQUIRE(bounds[0] == bounds[1]);
    }
    kernels::select(kernels::avx2_table() ? kernels::Isa::avx2 : kernels::Isa::scalar);
}
