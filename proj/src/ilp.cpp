#include "bddmma/ilp.h"

#include <array>
#include <charconv>
#include <system_error>

namespace bddmma {

const char* to_string(Relation rel)
{
    switch (rel) {
    case Relation::less_equal: return "<=";
    case Relation::equal: return "=";
    case Relation::greater_equal: return ">=";
    }
    return "?";
}

void LinearConstraint::validate(std::size_t nr_variables) const
{
    if (vars.empty())
        throw std::invalid_argument("constraint '" + name + "' has no variables");
    if (vars.size() != coefficients.size())
        throw std::invalid_argument("constraint '" + name + "': coefficient count does not match variable count");
    for (std::size_t t = 0; t < vars.size(); ++t) {
        if (vars[t] >= nr_variables)
            throw std::invalid_argument("constraint '" + name + "': variable index out of range");
        if (t > 0 && vars[t - 1] >= vars[t])
            throw std::invalid_argument("constraint '" + name + "': variable indices not strictly ascending");
        if (coefficients[t] == 0)
            throw std::invalid_argument("constraint '" + name + "': zero coefficient stored");
    }
}

void IlpInstance::validate() const
{
    if (objective.empty())
        throw std::invalid_argument("instance has no variables");
    if (variable_names.size() != objective.size())
        throw std::invalid_argument("variable name count does not match objective length");
    for (const auto& c : constraints)
        c.validate(nr_variables());
}

namespace {

bool relation_holds(std::int64_t lhs, Relation rel, std::int64_t rhs)
{
    switch (rel) {
    case Relation::less_equal: return lhs <= rhs;
    case Relation::equal: return lhs == rhs;
    case Relation::greater_equal: return lhs >= rhs;
    }
    return false;
}

} // namespace

bool constraint_satisfied(const LinearConstraint& constraint, std::span<const std::uint8_t> assignment)
{
    if (assignment.size() != constraint.size())
        throw std::invalid_argument("assignment length does not match constraint size");
    std::int64_t lhs = 0;
    for (std::size_t t = 0; t < constraint.size(); ++t)
        if (assignment[t])
            lhs += constraint.coefficients[t];
    return relation_holds(lhs, constraint.relation, constraint.rhs);
}

bool constraint_satisfied_global(const LinearConstraint& constraint, std::span<const std::uint8_t> x)
{
    std::int64_t lhs = 0;
    for (std::size_t t = 0; t < constraint.size(); ++t) {
        if (constraint.vars[t] >= x.size())
            throw std::invalid_argument("assignment shorter than referenced variable index");
        if (x[constraint.vars[t]])
            lhs += constraint.coefficients[t];
    }
    return relation_holds(lhs, constraint.relation, constraint.rhs);
}

double evaluate_objective(const IlpInstance& instance, std::span<const std::uint8_t> x)
{
    if (x.size() != instance.nr_variables())
        throw std::invalid_argument("assignment length does not match variable count");
    double value = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i])
            value += instance.objective[i];
    return value;
}

double reported_objective(const IlpInstance& instance, double internal_value)
{
    return instance.maximize ? -internal_value : internal_value;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

std::string format_double(double value)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc())
        throw std::runtime_error("cannot format double");
    return std::string(buf.data(), end);
}

} // namespace bddmma
