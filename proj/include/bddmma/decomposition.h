#pragma once

#include "bddmma/bdd.h"
#include "bddmma/ilp.h"

#include <cstdint>
#include <span>
#include <vector>

namespace bddmma {

/// Position of a global variable inside one subproblem.
struct Occurrence {
    std::uint32_t subproblem;
    std::uint32_t local;

    friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Lagrange decomposition with one subproblem per constraint row.
class Decomposition {
public:
    /// Compiles every constraint; propagates InfeasibleConstraint.
    explicit Decomposition(const IlpInstance& instance);

    std::size_t nr_variables() const { return occurrences_.size(); }
    std::size_t nr_subproblems() const { return bdds_.size(); }

    const Bdd& bdd(std::size_t j) const { return bdds_[j]; }
    std::span<const Bdd> bdds() const { return bdds_; }

    /// J_i as (subproblem, local position) pairs, ascending in subproblem.
    std::span<const Occurrence> occurrences(std::size_t i) const { return occurrences_[i]; }
    std::vector<std::size_t> subproblems_of(std::size_t i) const;
    std::size_t multiplicity(std::size_t i) const { return occurrences_[i].size(); }

    /// Position of variable i within I_j; throws std::out_of_range if i is not in I_j.
    std::size_t local_index(std::size_t i, std::size_t j) const;

    /// Variables covered by no constraint.
    std::span<const std::size_t> free_variables() const { return free_vars_; }

private:
    std::vector<Bdd> bdds_;
    std::vector<std::vector<Occurrence>> occurrences_;
    std::vector<std::size_t> free_vars_;
};

/// Per-subproblem multipliers lambda^j, indexed by local position within I_j.
struct Multipliers {
    std::vector<std::vector<double>> values;

    /// sum_{j in J_i} lambda_i^j
    double coupling_sum(const Decomposition& d, std::size_t i) const;

    friend bool operator==(const Multipliers&, const Multipliers&) = default;
};

/// lambda_i^j = c_i / |J_i|.
Multipliers init_multipliers(const IlpInstance& instance, const Decomposition& decomposition);

} // namespace bddmma
