#pragma once

#include "bddmma/bdd.h"
#include "bddmma/decomposition.h"
#include "bddmma/ilp.h"
#include "bddmma/kernels.h"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bddmma {

using kernels::MinMarginalPair;

struct DualConfig {
    double omega = 0.5;
    std::size_t max_iterations = 1000;
    double rel_improvement_tol = 1e-6;
    /// Bound on min-marginal differences inside updates. Infinite differences are
    /// replaced by min(clamp, 1 + sum_i |c_i|), which exceeds every finite difference
    /// at initialization without swamping the multipliers' precision.
    double clamp = 1e10;
    /// Worker count for the per-subproblem loops; 0 picks the OpenMP default.
    std::size_t threads = 0;

    void validate() const;
};

/// m^1 - m^0 clamped to [-clamp, clamp]; an infinite side yields -+infinite.
double clamped_difference(MinMarginalPair mm, double clamp, double infinite);

inline double clamped_difference(MinMarginalPair mm, double clamp)
{
    return clamped_difference(mm, clamp, clamp);
}

/// One multiplier update:
///   lambda - omega * clamped(m^1 - m^0) + deferred_average
/// where deferred_average = omega / |J_i| * sum_k clamped(mbar^1_k - mbar^0_k).
double averaged_update(double lambda, MinMarginalPair current, double deferred_average, double omega, double clamp, double infinite);

inline double averaged_update(double lambda, MinMarginalPair current, double deferred_average, double omega, double clamp)
{
    return averaged_update(lambda, current, deferred_average, omega, clamp, clamp);
}

/// Weighted BDD of one subproblem together with its multipliers, cached shortest-path
/// distances and the min-marginals recorded during the latest pass.
///
/// Distance arrays have nr_nodes() + 2 entries; the last two are the top and bot
/// terminals. dist_to_top(top) = 0 and dist_to_top(bot) = +inf permanently.
class SubproblemState {
public:
    SubproblemState(const Bdd& bdd, std::vector<double> lambda);

    const Bdd& bdd() const { return *bdd_; }
    std::size_t size() const { return lambda_.size(); }

    std::span<double> lambda() { return lambda_; }
    std::span<const double> lambda() const { return lambda_; }
    std::span<const double> dist_from_root() const { return from_root_; }
    std::span<const double> dist_to_top() const { return to_top_; }
    std::span<MinMarginalPair> min_marginals() { return mm_; }
    std::span<const MinMarginalPair> min_marginals() const { return mm_; }

    /// Subproblem optimum E^j(lambda^j) as of the end of the latest sweep or pass.
    double energy() const { return energy_; }

private:
    friend double backward_sweep(SubproblemState&);
    friend double forward_sweep(SubproblemState&);
    friend MinMarginalPair min_marginal(const SubproblemState&, std::size_t);
    friend struct PassRunner;

    const Bdd* bdd_;
    std::vector<double> lambda_;
    std::vector<std::int32_t> lo_, hi_;
    std::vector<double> from_root_, to_top_;
    std::vector<MinMarginalPair> mm_;
    double energy_ = 0.0;
};

/// Recomputes dist_to_top for every node under the current multipliers. Returns the energy.
double backward_sweep(SubproblemState& state);

/// Recomputes dist_from_root for every node under the current multipliers. Returns the energy.
double forward_sweep(SubproblemState& state);

/// Min-marginals of the variable at local position `local`, read from the cached
/// distances of partition `local` (from the root) and of its successors (to top).
MinMarginalPair min_marginal(const SubproblemState& state, std::size_t local);

struct MinMarginalEvent {
    std::size_t subproblem;
    std::size_t local;
    /// Multipliers at the moment the min-marginals were computed.
    std::span<const double> lambda;
    MinMarginalPair value;
};

/// Called for every min-marginal computed during a pass, possibly from worker threads.
using MinMarginalObserver = std::function<void(const MinMarginalEvent&)>;

struct PassOptions {
    double omega = 0.5;
    double clamp = 1e10;
    double infinite = 1e10;
    std::size_t subproblem = 0;
    const MinMarginalObserver* observer = nullptr;
};

/// Ascending sweep: per variable compute min-marginals, update lambda, relax the next
/// partition from the root. Requires dist_to_top valid for the current multipliers.
/// `deferred_average` is indexed by global variable.
void forward_pass(SubproblemState& state, std::span<const double> deferred_average, const PassOptions& options);

/// Descending mirror of forward_pass; requires dist_from_root valid.
void backward_pass(SubproblemState& state, std::span<const double> deferred_average, const PassOptions& options);

enum class PassDirection { forward, backward };

const char* to_string(PassDirection direction);

struct PassRecord {
    std::size_t iteration;
    PassDirection direction;
    double lower_bound;
    double elapsed_ms;
};

struct ConvergenceRecord {
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<PassRecord> passes;
};

/// Per-(subproblem, local position) min-marginals.
struct MinMarginals {
    std::vector<std::vector<MinMarginalPair>> values;
};

/// Parallel deferred min-marginal averaging over all subproblems of a decomposition.
class DualSolver {
public:
    /// Builds the subproblem states and runs the initial backward sweep.
    DualSolver(const IlpInstance& instance, const Decomposition& decomposition, Multipliers multipliers, DualConfig config = {});

    const IlpInstance& instance() const { return *instance_; }
    const Decomposition& decomposition() const { return *decomposition_; }
    const DualConfig& config() const { return config_; }

    std::size_t nr_subproblems() const { return states_.size(); }
    SubproblemState& subproblem(std::size_t j) { return states_[j]; }
    const SubproblemState& subproblem(std::size_t j) const { return states_[j]; }

    Multipliers multipliers() const;

    /// Value substituted for infinite min-marginal differences.
    double infinite_substitute() const { return infinite_; }

    /// clamped(m^1 - m^0) as used by this solver's updates.
    double difference(MinMarginalPair mm) const { return clamped_difference(mm, config_.clamp, infinite_); }

    /// Observer invoked for every min-marginal computed by subsequent passes.
    void set_observer(MinMarginalObserver observer) { observer_ = std::move(observer); }

    /// Full backward sweep of every subproblem (after multipliers were changed externally).
    void refresh_distances();

    /// Per-variable averages omega/|J_i| * sum_k clamped(m^1_ik - m^0_ik) of the stored min-marginals.
    std::vector<double> deferred_averages() const;

    /// One forward or backward pass over all subproblems. Returns the lower bound afterwards.
    double pass(PassDirection direction);

    /// Forward pass followed by backward pass. Returns the lower bound afterwards.
    double iterate();

    /// Iterates until max_iterations or the relative improvement drops below the tolerance.
    ConvergenceRecord run(const std::function<void(const PassRecord&)>& on_pass = {});

    /// Adds back the deferred min-marginals so that sum_j lambda_i^j = c_i, then clears them.
    void finalize();

    /// sum_j E^j(lambda^j)
    double energy_sum() const;

    /// Sum of min(c_i, 0) over variables without constraints.
    double free_variable_bound() const;

    /// Valid lower bound on the ILP optimum: energy_sum() minus the deferred mass still
    /// pending redistribution, omega * sum_ij max(m^0_ij - m^1_ij, 0), plus free variables.
    double lower_bound() const;

    /// Min-marginals of every (subproblem, variable) under the current multipliers,
    /// recomputed from scratch. Leaves all distances consistent with the multipliers.
    MinMarginals exact_min_marginals();

private:
    template <typename Fn>
    void for_each_subproblem(Fn&& fn);

    const IlpInstance* instance_;
    const Decomposition* decomposition_;
    DualConfig config_;
    double infinite_ = 0.0;
    std::vector<SubproblemState> states_;
    MinMarginalObserver observer_;
};

} // namespace bddmma
