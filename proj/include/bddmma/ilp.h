#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bddmma {

/// Bit vector over some ordered variable set, one byte per entry (0 or 1).
using Assignment = std::vector<std::uint8_t>;

enum class Relation { less_equal, equal, greater_equal };

const char* to_string(Relation rel);

/// Integer linear constraint sum_i a_i x_i (rel) b over binary variables.
/// `vars` is strictly ascending; it fixes the variable order used for the BDD.
struct LinearConstraint {
    std::string name;
    std::vector<std::size_t> vars;
    std::vector<std::int64_t> coefficients;
    Relation relation = Relation::less_equal;
    std::int64_t rhs = 0;

    std::size_t size() const { return vars.size(); }

    /// Checks the structural invariants and throws std::invalid_argument on violation.
    void validate(std::size_t nr_variables) const;

    friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

/// Minimization 0-1 ILP. Maximization inputs are stored negated with `maximize` set.
struct IlpInstance {
    std::vector<std::string> variable_names;
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    bool maximize = false;

    std::size_t nr_variables() const { return objective.size(); }
    std::size_t nr_constraints() const { return constraints.size(); }

    void validate() const;

    friend bool operator==(const IlpInstance&, const IlpInstance&) = default;
};

/// `assignment` is indexed by the constraint's local positions.
bool constraint_satisfied(const LinearConstraint& constraint, std::span<const std::uint8_t> assignment);

/// Same check with `x` indexed by global variable.
bool constraint_satisfied_global(const LinearConstraint& constraint, std::span<const std::uint8_t> x);

double evaluate_objective(const IlpInstance& instance, std::span<const std::uint8_t> x);

/// Objective in the sense of the original input (negated back for maximization).
double reported_objective(const IlpInstance& instance, double internal_value);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

IlpInstance parse_lp(const std::string& text);
IlpInstance parse_lp_file(const std::string& path);
std::string write_lp(const IlpInstance& instance);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace bddmma
