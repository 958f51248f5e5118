#include "bddmma/dual.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bddmma {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

void DualConfig::validate() const
{
    if (!(omega > 0.0 && omega <= 1.0))
        throw std::invalid_argument("omega must lie in (0, 1]");
    if (!(clamp > 0.0))
        throw std::invalid_argument("clamp must be positive");
    if (!(rel_improvement_tol >= 0.0))
        throw std::invalid_argument("relative improvement tolerance must be non-negative");
}

double clamped_difference(MinMarginalPair mm, double clamp, double infinite)
{
    const bool inf0 = std::isinf(mm.m0);
    const bool inf1 = std::isinf(mm.m1);
    if (inf0 && inf1)
        return 0.0; // empty subproblem; cannot happen for a compiled BDD
    if (inf1)
        return infinite;
    if (inf0)
        return -infinite;
    return std::clamp(mm.m1 - mm.m0, -clamp, clamp);
}

double averaged_update(double lambda, MinMarginalPair current, double deferred_average, double omega, double clamp, double infinite)
{
    return lambda - omega * clamped_difference(current, clamp, infinite) + deferred_average;
}

SubproblemState::SubproblemState(const Bdd& bdd, std::vector<double> lambda)
    : bdd_(&bdd), lambda_(std::move(lambda))
{
    if (lambda_.size() != bdd.nr_variables())
        throw std::invalid_argument("multiplier count does not match bdd variable count");
    const std::size_t n = bdd.nr_nodes();
    lo_.resize(n);
    hi_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        lo_[v] = static_cast<std::int32_t>(bdd.node(static_cast<std::uint32_t>(v)).zero_succ);
        hi_[v] = static_cast<std::int32_t>(bdd.node(static_cast<std::uint32_t>(v)).one_succ);
    }
    from_root_.assign(n + 2, inf);
    to_top_.assign(n + 2, inf);
    to_top_[bdd.top()] = 0.0;
    mm_.assign(bdd.nr_variables(), MinMarginalPair{0.0, 0.0});
}

double backward_sweep(SubproblemState& s)
{
    const kernels::KernelTable& k = kernels::active();
    const Bdd& bdd = *s.bdd_;
    for (std::size_t i = s.size(); i-- > 0;) {
        const std::uint32_t b = bdd.partition_begin(i);
        k.relax_backward(s.lo_.data() + b, s.hi_.data() + b, bdd.partition_size(i), s.lambda_[i], s.to_top_.data(), s.to_top_.data() + b);
    }
    s.energy_ = s.to_top_[bdd.root()];
    return s.energy_;
}

namespace {

void reset_successor_layer(const Bdd& bdd, std::size_t i, double* from_root)
{
    if (i + 1 < bdd.nr_variables())
        std::fill(from_root + bdd.partition_begin(i + 1), from_root + bdd.partition_end(i + 1), inf);
    else
        from_root[bdd.top()] = from_root[bdd.bot()] = inf;
}

} // namespace

double forward_sweep(SubproblemState& s)
{
    const kernels::KernelTable& k = kernels::active();
    const Bdd& bdd = *s.bdd_;
    double* fr = s.from_root_.data();
    fr[bdd.root()] = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::uint32_t b = bdd.partition_begin(i);
        reset_successor_layer(bdd, i, fr);
        k.relax_forward(fr + b, s.lo_.data() + b, s.hi_.data() + b, bdd.partition_size(i), s.lambda_[i], fr);
    }
    s.energy_ = fr[bdd.top()];
    return s.energy_;
}

MinMarginalPair min_marginal(const SubproblemState& s, std::size_t local)
{
    const Bdd& bdd = *s.bdd_;
    const std::uint32_t b = bdd.partition_begin(local);
    return kernels::active().layer_min_marginals(s.from_root_.data() + b, s.lo_.data() + b, s.hi_.data() + b,
                                                 bdd.partition_size(local), s.lambda_[local], s.to_top_.data());
}

struct PassRunner {
    static void forward(SubproblemState& s, std::span<const double> deferred, const PassOptions& opt)
    {
        const kernels::KernelTable& k = kernels::active();
        const Bdd& bdd = *s.bdd_;
        const auto vars = bdd.variables();
        double* fr = s.from_root_.data();
        fr[bdd.root()] = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::uint32_t b = bdd.partition_begin(i);
            const std::size_t count = bdd.partition_size(i);
            const MinMarginalPair mm = k.layer_min_marginals(fr + b, s.lo_.data() + b, s.hi_.data() + b, count, s.lambda_[i], s.to_top_.data());
            s.mm_[i] = mm;
            if (opt.observer)
                (*opt.observer)({opt.subproblem, i, s.lambda_, mm});
            s.lambda_[i] = averaged_update(s.lambda_[i], mm, deferred[vars[i]], opt.omega, opt.clamp, opt.infinite);
            reset_successor_layer(bdd, i, fr);
            k.relax_forward(fr + b, s.lo_.data() + b, s.hi_.data() + b, count, s.lambda_[i], fr);
        }
        s.energy_ = fr[bdd.top()];
    }

    static void backward(SubproblemState& s, std::span<const double> deferred, const PassOptions& opt)
    {
        const kernels::KernelTable& k = kernels::active();
        const Bdd& bdd = *s.bdd_;
        const auto vars = bdd.variables();
        double* tt = s.to_top_.data();
        for (std::size_t i = s.size(); i-- > 0;) {
            const std::uint32_t b = bdd.partition_begin(i);
            const std::size_t count = bdd.partition_size(i);
            const MinMarginalPair mm = k.layer_min_marginals(s.from_root_.data() + b, s.lo_.data() + b, s.hi_.data() + b, count, s.lambda_[i], tt);
            s.mm_[i] = mm;
            if (opt.observer)
                (*opt.observer)({opt.subproblem, i, s.lambda_, mm});
            s.lambda_[i] = averaged_update(s.lambda_[i], mm, deferred[vars[i]], opt.omega, opt.clamp, opt.infinite);
            k.relax_backward(s.lo_.data() + b, s.hi_.data() + b, count, s.lambda_[i], tt, tt + b);
        }
        s.energy_ = tt[bdd.root()];
    }
};

void forward_pass(SubproblemState& state, std::span<const double> deferred_average, const PassOptions& options)
{
    PassRunner::forward(state, deferred_average, options);
}

void backward_pass(SubproblemState& state, std::span<const double> deferred_average, const PassOptions& options)
{
    PassRunner::backward(state, deferred_average, options);
}

const char* to_string(PassDirection direction)
{
    return direction == PassDirection::forward ? "forward" : "backward";
}

DualSolver::DualSolver(const IlpInstance& instance, const Decomposition& decomposition, Multipliers multipliers, DualConfig config)
    : instance_(&instance), decomposition_(&decomposition), config_(config)
{
    config_.validate();
    double scale = 1.0;
    for (const double c : instance.objective)
        scale += std::abs(c);
    infinite_ = std::min(config_.clamp, scale);
    if (multipliers.values.size() != decomposition.nr_subproblems())
        throw std::invalid_argument("multiplier set does not match the decomposition");
    states_.reserve(decomposition.nr_subproblems());
    for (std::size_t j = 0; j < decomposition.nr_subproblems(); ++j)
        states_.emplace_back(decomposition.bdd(j), std::move(multipliers.values[j]));
    refresh_distances();
}

template <typename Fn>
void DualSolver::for_each_subproblem(Fn&& fn)
{
    const auto n = static_cast<std::ptrdiff_t>(states_.size());
#ifdef _OPENMP
    const int threads = config_.threads > 0 ? static_cast<int>(config_.threads) : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
    for (std::ptrdiff_t j = 0; j < n; ++j)
        fn(static_cast<std::size_t>(j));
}

Multipliers DualSolver::multipliers() const
{
    Multipliers m;
    m.values.reserve(states_.size());
    for (const auto& s : states_)
        m.values.emplace_back(s.lambda().begin(), s.lambda().end());
    return m;
}

void DualSolver::refresh_distances()
{
    for_each_subproblem([&](std::size_t j) { backward_sweep(states_[j]); });
}

std::vector<double> DualSolver::deferred_averages() const
{
    std::vector<double> avg(decomposition_->nr_variables(), 0.0);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        const auto occ = decomposition_->occurrences(i);
        if (occ.empty())
            continue;
        double sum = 0.0;
        for (const auto& o : occ)
            sum += difference(states_[o.subproblem].min_marginals()[o.local]);
        avg[i] = config_.omega / static_cast<double>(occ.size()) * sum;
    }
    return avg;
}

double DualSolver::pass(PassDirection direction)
{
    const std::vector<double> deferred = deferred_averages();
    const MinMarginalObserver* observer = observer_ ? &observer_ : nullptr;
    for_each_subproblem([&](std::size_t j) {
        const PassOptions opt{config_.omega, config_.clamp, infinite_, j, observer};
        if (direction == PassDirection::forward)
            forward_pass(states_[j], deferred, opt);
        else
            backward_pass(states_[j], deferred, opt);
    });
    return lower_bound();
}

double DualSolver::iterate()
{
    pass(PassDirection::forward);
    return pass(PassDirection::backward);
}

ConvergenceRecord DualSolver::run(const std::function<void(const PassRecord&)>& on_pass)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto elapsed = [&] { return std::chrono::duration<double, std::milli>(clock::now() - start).count(); };

    ConvergenceRecord record;
    double previous = lower_bound();
    for (std::size_t t = 1; t <= config_.max_iterations; ++t) {
        for (const PassDirection dir : {PassDirection::forward, PassDirection::backward}) {
            const double lb = pass(dir);
            record.passes.push_back({t, dir, lb, elapsed()});
            if (on_pass)
                on_pass(record.passes.back());
        }
        record.iterations = t;
        const double current = record.passes.back().lower_bound;
        if (current - previous <= config_.rel_improvement_tol * std::max(1.0, std::abs(current))) {
            record.converged = true;
            break;
        }
        previous = current;
    }
    return record;
}

void DualSolver::finalize()
{
    for_each_subproblem([&](std::size_t j) {
        SubproblemState& s = states_[j];
        for (std::size_t i = 0; i < s.size(); ++i) {
            s.lambda()[i] += config_.omega * difference(s.min_marginals()[i]);
            s.min_marginals()[i] = {0.0, 0.0};
        }
        backward_sweep(s);
    });
}

double DualSolver::energy_sum() const
{
    double sum = 0.0;
    for (const auto& s : states_)
        sum += s.energy();
    return sum;
}

double DualSolver::free_variable_bound() const
{
    double sum = 0.0;
    for (const std::size_t i : decomposition_->free_variables())
        sum += std::min(instance_->objective[i], 0.0);
    return sum;
}

double DualSolver::lower_bound() const
{
    double pending = 0.0;
    for (const auto& s : states_)
        for (const MinMarginalPair& mm : s.min_marginals())
            pending += std::max(-difference(mm), 0.0);
    return energy_sum() - config_.omega * pending + free_variable_bound();
}

MinMarginals DualSolver::exact_min_marginals()
{
    MinMarginals out;
    out.values.resize(states_.size());
    for_each_subproblem([&](std::size_t j) {
        SubproblemState& s = states_[j];
        forward_sweep(s);
        backward_sweep(s);
        out.values[j].resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            out.values[j][i] = min_marginal(s, i);
    });
    return out;
}

} // namespace bddmma
