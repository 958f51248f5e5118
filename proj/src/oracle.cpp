#include "bddmma/oracle.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace bddmma::oracle {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Assignment decode(std::uint64_t code, std::size_t width)
{
    // most significant bit is position 0 so increasing codes are lexicographic
    Assignment x(width);
    for (std::size_t t = 0; t < width; ++t)
        x[t] = static_cast<std::uint8_t>((code >> (width - 1 - t)) & 1U);
    return x;
}

} // namespace

std::optional<ExhaustiveResult> solve_exhaustive(const IlpInstance& instance)
{
    const std::size_t n = instance.nr_variables();
    if (n > 24)
        throw std::invalid_argument("exhaustive solver refuses instances with more than 24 variables");
    std::optional<ExhaustiveResult> best;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
        const Assignment x = decode(code, n);
        bool feasible = true;
        for (const auto& c : instance.constraints) {
            Assignment local(c.size());
            for (std::size_t t = 0; t < c.size(); ++t)
                local[t] = x[c.vars[t]];
            if (!constraint_satisfied(c, local)) {
                feasible = false;
                break;
            }
        }
        if (!feasible)
            continue;
        double value = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            value += x[i] * instance.objective[i];
        if (!best || value < best->value)
            best = ExhaustiveResult{value, x};
    }
    return best;
}

std::vector<Assignment> satisfying_assignments(const LinearConstraint& constraint)
{
    const std::size_t k = constraint.size();
    if (k > 20)
        throw std::invalid_argument("constraint too large for enumeration");
    std::vector<Assignment> out;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << k); ++code) {
        Assignment x = decode(code, k);
        if (constraint_satisfied(constraint, x))
            out.push_back(std::move(x));
    }
    return out;
}

std::pair<double, double> min_marginals_exhaustive(const LinearConstraint& constraint, std::span<const double> lambda, std::size_t local)
{
    if (lambda.size() != constraint.size() || local >= constraint.size())
        throw std::invalid_argument("multiplier slice does not match constraint");
    std::pair<double, double> mm{inf, inf};
    for (const Assignment& x : satisfying_assignments(constraint)) {
        double cost = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t)
            cost += x[t] * lambda[t];
        double& slot = x[local] ? mm.second : mm.first;
        slot = std::min(slot, cost);
    }
    return mm;
}

double energy_exhaustive(const LinearConstraint& constraint, std::span<const double> lambda)
{
    if (lambda.size() != constraint.size())
        throw std::invalid_argument("multiplier slice does not match constraint");
    double best = inf;
    for (const Assignment& x : satisfying_assignments(constraint)) {
        double cost = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t)
            cost += x[t] * lambda[t];
        best = std::min(best, cost);
    }
    return best;
}

LiftedMultipliers LiftedMultipliers::lift(std::span<const double> lambda)
{
    return {std::vector<double>(lambda.begin(), lambda.end()), std::vector<double>(lambda.size(), 0.0)};
}

std::vector<double> LiftedMultipliers::project() const
{
    std::vector<double> out(one.size());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = one[t] - zero[t];
    return out;
}

double lifted_energy(const LinearConstraint& constraint, const LiftedMultipliers& lifted)
{
    if (lifted.one.size() != constraint.size() || lifted.zero.size() != constraint.size())
        throw std::invalid_argument("lifted multipliers do not match constraint");
    double best = inf;
    for (const Assignment& x : satisfying_assignments(constraint)) {
        double cost = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t)
            cost += x[t] ? lifted.one[t] : lifted.zero[t];
        best = std::min(best, cost);
    }
    return best;
}

double lifted_update_reference(double lambda, std::pair<double, double> current, std::pair<double, double> deferred, double omega)
{
    const double lambda_one = lambda;
    const double lambda_zero = 0.0;
    const auto [m0, m1] = current;
    const auto [mbar0, mbar1] = deferred;
    const double new_one = lambda_one - omega * std::min(m1 - m0, 0.0) + omega * std::min(mbar1 - mbar0, 0.0);
    const double new_zero = lambda_zero - omega * std::min(m0 - m1, 0.0) + omega * std::min(mbar0 - mbar1, 0.0);
    return new_one - new_zero;
}

} // namespace bddmma::oracle
