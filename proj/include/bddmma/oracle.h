#pragma once

#include "bddmma/ilp.h"

#include <optional>
#include <span>
#include <utility>
#include <vector>

// Brute-force reference implementations. Nothing here touches the BDD code path.
namespace bddmma::oracle {

struct ExhaustiveResult {
    double value;
    Assignment argmin;
};

/// Global optimum by enumeration (n <= 24). nullopt when infeasible.
/// Among optimal assignments the lexicographically smallest (x_0 first) is returned.
std::optional<ExhaustiveResult> solve_exhaustive(const IlpInstance& instance);

/// All satisfying local assignments of a constraint, lexicographically sorted.
std::vector<Assignment> satisfying_assignments(const LinearConstraint& constraint);

/// (m^0, m^1) of local position `local` under costs `lambda`, by enumeration (|I_j| <= 20).
std::pair<double, double> min_marginals_exhaustive(const LinearConstraint& constraint, std::span<const double> lambda, std::size_t local);

/// min over feasible x of <x, lambda>; +inf if the constraint is infeasible.
double energy_exhaustive(const LinearConstraint& constraint, std::span<const double> lambda);

/// Two-sided multipliers of one subproblem.
struct LiftedMultipliers {
    std::vector<double> one;  // lambda^{j,1}
    std::vector<double> zero; // lambda^{j,0}

    /// (lambda^1 <- lambda, lambda^0 <- 0)
    static LiftedMultipliers lift(std::span<const double> lambda);
    /// lambda^1 - lambda^0
    std::vector<double> project() const;
};

/// min over feasible x of <x, lambda^1> + <1 - x, lambda^0>.
double lifted_energy(const LinearConstraint& constraint, const LiftedMultipliers& lifted);

/// Lifts lambda, applies for beta in {0,1}
///   lambda^beta -= omega * min(m^beta - m^{1-beta}, 0)
///   lambda^beta += omega * min(mbar^beta - mbar^{1-beta}, 0)
/// and projects back. Arguments are (m^0, m^1) pairs.
double lifted_update_reference(double lambda, std::pair<double, double> current, std::pair<double, double> deferred, double omega);

} // namespace bddmma::oracle
