#pragma once

#include "bddmma/dual.h"
#include "bddmma/ilp.h"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bddmma {

struct PrimalConfig {
    double delta0 = 1.0;
    double alpha = 1.2;
    std::size_t inner_passes = 5;
    std::size_t max_rounds = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Solution {
    Assignment assignment;
    double objective = 0.0;
    std::size_t rounds_used = 0;
};

class RoundingFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// True iff the min-marginal differences of one variable do not all share a sign
/// (sign in {-1, 0, +1}).
bool has_conflict(std::span<const double> differences);

/// True iff some variable has conflicting differences across its subproblems.
bool has_conflict(const DualSolver& solver, const MinMarginals& mm);

/// Differences clamped(m^1 - m^0) of variable i across J_i, in subproblem order.
std::vector<double> variable_differences(const DualSolver& solver, const MinMarginals& mm, std::size_t i);

/// Multiplier increment applied to every lambda_i^j of one variable:
///   all > 0: +delta, all < 0: -delta, all == 0: r * delta,
///   otherwise sign(sum of differences) * |r| * delta.
/// `r` is drawn from [-delta, delta]; `draw` is only called when a branch needs it.
double perturbation_increment(std::span<const double> differences, double delta, const std::function<double()>& draw);

/// Uniform value in [-1, 1) determined by (seed, round, variable) alone.
double counter_uniform(std::uint64_t seed, std::uint64_t round, std::uint64_t variable);

/// delta0 * alpha^round
double perturbation_strength(const PrimalConfig& config, std::size_t round);

/// Applies one perturbation round to the solver's multipliers (distances are not refreshed).
void perturb(DualSolver& solver, const MinMarginals& mm, double delta, std::uint64_t seed, std::size_t round);

bool check_feasible(const IlpInstance& instance, std::span<const std::uint8_t> x);

struct RoundingRecord {
    std::size_t round;
    double delta;
    /// Lower bound formula evaluated on perturbed multipliers; not a valid bound.
    double heuristic_bound;
};

/// Perturbs and reoptimizes until all subproblems agree on every variable with
/// nonzero min-marginal differences, then stitches the consensus into an assignment.
/// Throws RoundingFailure after max_rounds without consensus.
Solution round_primal(DualSolver& solver, const PrimalConfig& config,
                      const std::function<void(const RoundingRecord&)>& on_round = {});

} // namespace bddmma
