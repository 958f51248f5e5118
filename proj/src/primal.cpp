#include "bddmma/primal.h"

#include <algorithm>
#include <cmath>

namespace bddmma {

void PrimalConfig::validate() const
{
    if (!(delta0 > 0.0))
        throw std::invalid_argument("initial perturbation strength must be positive");
    if (!(alpha > 1.0))
        throw std::invalid_argument("perturbation growth rate must exceed 1");
    if (inner_passes < 1)
        throw std::invalid_argument("at least one reoptimization iteration per round is required");
}

namespace {

int sign(double v)
{
    return (v > 0.0) - (v < 0.0);
}

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// No conflict and no zero difference anywhere.
bool decided(const DualSolver& solver, const MinMarginals& mm)
{
    for (std::size_t i = 0; i < solver.decomposition().nr_variables(); ++i) {
        const auto diffs = variable_differences(solver, mm, i);
        if (has_conflict(diffs))
            return false;
        if (!diffs.empty() && diffs.front() == 0.0)
            return false;
    }
    return true;
}

} // namespace

bool has_conflict(std::span<const double> differences)
{
    for (std::size_t t = 1; t < differences.size(); ++t)
        if (sign(differences[t]) != sign(differences[0]))
            return true;
    return false;
}

std::vector<double> variable_differences(const DualSolver& solver, const MinMarginals& mm, std::size_t i)
{
    std::vector<double> diffs;
    for (const auto& o : solver.decomposition().occurrences(i))
        diffs.push_back(solver.difference(mm.values[o.subproblem][o.local]));
    return diffs;
}

bool has_conflict(const DualSolver& solver, const MinMarginals& mm)
{
    for (std::size_t i = 0; i < solver.decomposition().nr_variables(); ++i)
        if (has_conflict(variable_differences(solver, mm, i)))
            return true;
    return false;
}

double perturbation_increment(std::span<const double> differences, double delta, const std::function<double()>& draw)
{
    const auto all = [&](auto pred) { return std::all_of(differences.begin(), differences.end(), pred); };
    if (all([](double d) { return d > 0.0; }))
        return delta;
    if (all([](double d) { return d < 0.0; }))
        return -delta;
    if (all([](double d) { return d == 0.0; }))
        return draw() * delta;
    double total = 0.0;
    for (const double d : differences)
        total += d;
    return sign(total) * std::abs(draw()) * delta;
}

double counter_uniform(std::uint64_t seed, std::uint64_t round, std::uint64_t variable)
{
    const std::uint64_t bits = splitmix64(splitmix64(splitmix64(seed) ^ round) ^ variable);
    return static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
}

double perturbation_strength(const PrimalConfig& config, std::size_t round)
{
    return config.delta0 * std::pow(config.alpha, static_cast<double>(round));
}

void perturb(DualSolver& solver, const MinMarginals& mm, double delta, std::uint64_t seed, std::size_t round)
{
    const Decomposition& d = solver.decomposition();
    for (std::size_t i = 0; i < d.nr_variables(); ++i) {
        if (d.multiplicity(i) == 0)
            continue;
        const auto diffs = variable_differences(solver, mm, i);
        const double step = perturbation_increment(diffs, delta, [&] { return counter_uniform(seed, round, i) * delta; });
        for (const auto& o : d.occurrences(i))
            solver.subproblem(o.subproblem).lambda()[o.local] += step;
    }
}

bool check_feasible(const IlpInstance& instance, std::span<const std::uint8_t> x)
{
    if (x.size() != instance.nr_variables())
        return false;
    return std::all_of(instance.constraints.begin(), instance.constraints.end(),
                       [&](const LinearConstraint& c) { return constraint_satisfied_global(c, x); });
}

Solution round_primal(DualSolver& solver, const PrimalConfig& config, const std::function<void(const RoundingRecord&)>& on_round)
{
    config.validate();
    const Decomposition& d = solver.decomposition();
    const IlpInstance& instance = solver.instance();

    Solution sol;
    MinMarginals mm = solver.exact_min_marginals();
    while (!decided(solver, mm)) {
        if (sol.rounds_used == config.max_rounds)
            throw RoundingFailure("no min-marginal consensus after " + std::to_string(config.max_rounds) + " perturbation rounds");
        const double delta = perturbation_strength(config, sol.rounds_used);
        perturb(solver, mm, delta, config.seed, sol.rounds_used);
        ++sol.rounds_used;
        solver.refresh_distances();
        for (std::size_t p = 0; p < config.inner_passes; ++p)
            solver.iterate();
        solver.finalize();
        if (on_round)
            on_round({sol.rounds_used, delta, solver.lower_bound()});
        mm = solver.exact_min_marginals();
    }

    sol.assignment.assign(instance.nr_variables(), 0);
    for (std::size_t i = 0; i < instance.nr_variables(); ++i) {
        if (d.multiplicity(i) == 0) {
            sol.assignment[i] = instance.objective[i] < 0.0 ? 1 : 0;
            continue;
        }
        const auto diffs = variable_differences(solver, mm, i);
        sol.assignment[i] = std::all_of(diffs.begin(), diffs.end(), [](double v) { return v < 0.0; }) ? 1 : 0;
    }
    for (const auto& c : instance.constraints)
        if (!constraint_satisfied_global(c, sol.assignment))
            throw std::logic_error("stitched assignment violates constraint '" + c.name + "' despite min-marginal consensus");
    sol.objective = evaluate_objective(instance, sol.assignment);
    return sol;
}

} // namespace bddmma
