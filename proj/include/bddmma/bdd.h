#pragma once

#include "bddmma/ilp.h"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bddmma {

/// Node of a layered BDD. `hop` is the 1-based partition index; successor ids index
/// the owning Bdd's node array, or equal Bdd::top() / Bdd::bot().
struct BddNode {
    std::uint32_t hop = 0;
    std::uint32_t zero_succ = 0;
    std::uint32_t one_succ = 0;

    friend bool operator==(const BddNode&, const BddNode&) = default;
};

class InfeasibleConstraint : public std::runtime_error {
public:
    explicit InfeasibleConstraint(const std::string& constraint_name)
        : std::runtime_error("constraint '" + constraint_name + "' has no feasible assignment"), name_(constraint_name)
    {
    }
    const std::string& constraint_name() const { return name_; }

private:
    std::string name_;
};

/// Layered binary decision diagram over an ordered variable set.
///
/// Nodes are stored in one flat array, partition by partition: partition p (0-based)
/// occupies [partition_begin(p), partition_end(p)). The root is node 0 and is the only
/// node of the first partition. Terminals are not stored; their ids are nr_nodes()
/// (top) and nr_nodes() + 1 (bot), so per-node arrays of size nr_nodes() + 2 can hold
/// terminal values directly.
class Bdd {
public:
    Bdd() = default;

    /// Builds from raw parts and checks the layering invariants (throws std::invalid_argument).
    /// Terminal successors must be given as `nodes.size()` (top) and `nodes.size() + 1` (bot).
    Bdd(std::vector<std::size_t> variables, std::vector<BddNode> nodes, std::vector<std::uint32_t> partition_offsets);

    std::size_t nr_variables() const { return variables_.size(); }
    std::size_t nr_nodes() const { return nodes_.size(); }
    std::uint32_t root() const { return 0; }
    std::uint32_t top() const { return static_cast<std::uint32_t>(nodes_.size()); }
    std::uint32_t bot() const { return static_cast<std::uint32_t>(nodes_.size() + 1); }
    bool is_terminal(std::uint32_t id) const { return id >= nodes_.size(); }

    std::span<const std::size_t> variables() const { return variables_; }
    std::span<const BddNode> nodes() const { return nodes_; }
    const BddNode& node(std::uint32_t id) const { return nodes_[id]; }

    std::uint32_t partition_begin(std::size_t p) const { return offsets_[p]; }
    std::uint32_t partition_end(std::size_t p) const { return offsets_[p + 1]; }
    std::size_t partition_size(std::size_t p) const { return offsets_[p + 1] - offsets_[p]; }
    std::vector<std::size_t> partition_sizes() const;

    /// True iff following the assignment from the root ends in top.
    bool evaluate(std::span<const std::uint8_t> assignment) const;

    /// All root-to-top paths as assignments over the variable order, sorted lexicographically.
    std::vector<Assignment> enumerate_paths() const;

    /// Graphviz rendering: dashed zero arcs, solid one arcs.
    std::string to_dot(const std::vector<std::string>& variable_names = {}) const;

    /// Re-checks every structural invariant; throws std::logic_error describing the first violation.
    void check_invariants() const;

    /// No duplicate successor pairs within a partition, no node with both arcs to bot,
    /// every node reachable from the root.
    bool is_reduced() const;

    friend bool operator==(const Bdd&, const Bdd&) = default;

private:
    std::vector<std::size_t> variables_;
    std::vector<BddNode> nodes_;
    std::vector<std::uint32_t> offsets_;
};

/// Compiles a linear constraint into a reduced layered BDD. Throws InfeasibleConstraint
/// when the constraint has no satisfying assignment.
Bdd build_bdd(const LinearConstraint& constraint);

/// Merges nodes with equal successor pairs within a partition (bottom-up), removes nodes
/// that cannot reach top and nodes unreachable from the root. Throws InfeasibleConstraint
/// if the root itself cannot reach top.
Bdd reduce(const Bdd& bdd);

} // namespace bddmma
