#include "bddmma/decomposition.h"

#include <stdexcept>

namespace bddmma {

Decomposition::Decomposition(const IlpInstance& instance)
    : occurrences_(instance.nr_variables())
{
    instance.validate();
    bdds_.reserve(instance.nr_constraints());
    for (std::size_t j = 0; j < instance.nr_constraints(); ++j) {
        const LinearConstraint& c = instance.constraints[j];
        bdds_.push_back(build_bdd(c));
        for (std::size_t t = 0; t < c.size(); ++t)
            occurrences_[c.vars[t]].push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(t)});
    }
    for (std::size_t i = 0; i < occurrences_.size(); ++i)
        if (occurrences_[i].empty())
            free_vars_.push_back(i);
}

std::vector<std::size_t> Decomposition::subproblems_of(std::size_t i) const
{
    std::vector<std::size_t> out;
    for (const auto& o : occurrences_[i])
        out.push_back(o.subproblem);
    return out;
}

std::size_t Decomposition::local_index(std::size_t i, std::size_t j) const
{
    for (const auto& o : occurrences_[i])
        if (o.subproblem == j)
            return o.local;
    throw std::out_of_range("variable " + std::to_string(i) + " is not in subproblem " + std::to_string(j));
}

double Multipliers::coupling_sum(const Decomposition& d, std::size_t i) const
{
    double sum = 0.0;
    for (const auto& o : d.occurrences(i))
        sum += values[o.subproblem][o.local];
    return sum;
}

Multipliers init_multipliers(const IlpInstance& instance, const Decomposition& decomposition)
{
    Multipliers m;
    m.values.resize(decomposition.nr_subproblems());
    for (std::size_t j = 0; j < decomposition.nr_subproblems(); ++j)
        m.values[j].assign(decomposition.bdd(j).nr_variables(), 0.0);
    for (std::size_t i = 0; i < decomposition.nr_variables(); ++i) {
        const auto occ = decomposition.occurrences(i);
        if (occ.empty())
            continue;
        const double share = instance.objective[i] / static_cast<double>(occ.size());
        for (const auto& o : occ)
            m.values[o.subproblem][o.local] = share;
    }
    return m;
}

} // namespace bddmma
