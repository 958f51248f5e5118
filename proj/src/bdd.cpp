#include "bddmma/bdd.h"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace bddmma {

Bdd::Bdd(std::vector<std::size_t> variables, std::vector<BddNode> nodes, std::vector<std::uint32_t> partition_offsets)
    : variables_(std::move(variables)), nodes_(std::move(nodes)), offsets_(std::move(partition_offsets))
{
    try {
        check_invariants();
    } catch (const std::logic_error& e) {
        throw std::invalid_argument(e.what());
    }
}

void Bdd::check_invariants() const
{
    const std::size_t k = variables_.size();
    if (k == 0)
        throw std::logic_error("bdd has no variables");
    if (offsets_.size() != k + 1 || offsets_.front() != 0 || offsets_.back() != nodes_.size())
        throw std::logic_error("partition offsets do not cover the node array");
    if (partition_size(0) != 1)
        throw std::logic_error("first partition must contain exactly the root");
    for (std::size_t p = 0; p < k; ++p) {
        if (offsets_[p] >= offsets_[p + 1])
            throw std::logic_error("empty partition " + std::to_string(p + 1));
        for (std::uint32_t v = offsets_[p]; v < offsets_[p + 1]; ++v) {
            const BddNode& n = nodes_[v];
            if (n.hop != p + 1)
                throw std::logic_error("node " + std::to_string(v) + " has wrong hop");
            for (const std::uint32_t s : {n.zero_succ, n.one_succ}) {
                const bool ok = p + 1 < k ? (s == bot() || (s >= offsets_[p + 1] && s < offsets_[p + 2])) : (s == top() || s == bot());
                if (!ok)
                    throw std::logic_error("node " + std::to_string(v) + " violates partition ordering");
            }
        }
    }
}

bool Bdd::is_reduced() const
{
    std::vector<char> reachable(nr_nodes() + 2, 0);
    reachable[root()] = 1;
    for (std::size_t p = 0; p < nr_variables(); ++p) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> seen;
        for (std::uint32_t v = partition_begin(p); v < partition_end(p); ++v) {
            const BddNode& n = nodes_[v];
            if (!reachable[v] || (n.zero_succ == bot() && n.one_succ == bot()))
                return false;
            if (!seen.try_emplace({n.zero_succ, n.one_succ}, v).second)
                return false;
            reachable[n.zero_succ] = reachable[n.one_succ] = 1;
        }
    }
    return true;
}

std::vector<std::size_t> Bdd::partition_sizes() const
{
    std::vector<std::size_t> sizes(nr_variables());
    for (std::size_t p = 0; p < sizes.size(); ++p)
        sizes[p] = partition_size(p);
    return sizes;
}

bool Bdd::evaluate(std::span<const std::uint8_t> assignment) const
{
    if (assignment.size() != nr_variables())
        throw std::invalid_argument("assignment length does not match bdd variable count");
    std::uint32_t v = root();
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        v = assignment[i] ? nodes_[v].one_succ : nodes_[v].zero_succ;
        if (v == bot())
            return false;
    }
    return v == top();
}

std::vector<Assignment> Bdd::enumerate_paths() const
{
    std::vector<Assignment> paths;
    Assignment current(nr_variables(), 0);
    // explicit stack of (node, depth, next branch to try)
    struct Frame {
        std::uint32_t node;
        std::size_t depth;
        int branch;
    };
    std::vector<Frame> stack{{root(), 0, 0}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.node == top()) {
            paths.push_back(current);
            stack.pop_back();
            continue;
        }
        if (f.node == bot() || f.branch == 2) {
            stack.pop_back();
            continue;
        }
        const int b = f.branch++;
        current[f.depth] = static_cast<std::uint8_t>(b);
        const BddNode& n = nodes_[f.node];
        stack.push_back({b ? n.one_succ : n.zero_succ, f.depth + 1, 0});
    }
    return paths;
}

std::string Bdd::to_dot(const std::vector<std::string>& variable_names) const
{
    std::ostringstream out;
    out << "digraph bdd {\n";
    out << "  top [label=\"T\", shape=box];\n  bot [label=\"F\", shape=box];\n";
    const auto id = [&](std::uint32_t v) { return v == top() ? std::string("top") : v == bot() ? std::string("bot") : "n" + std::to_string(v); };
    for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
        const std::size_t var = variables_[nodes_[v].hop - 1];
        const std::string label = var < variable_names.size() ? variable_names[var] : "x" + std::to_string(var);
        out << "  " << id(v) << " [label=\"" << label << "\"];\n";
    }
    for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
        out << "  " << id(v) << " -> " << id(nodes_[v].zero_succ) << " [style=dashed];\n";
        out << "  " << id(v) << " -> " << id(nodes_[v].one_succ) << ";\n";
    }
    out << "}\n";
    return out.str();
}

Bdd reduce(const Bdd& bdd)
{
    const std::size_t k = bdd.nr_variables();
    const std::uint32_t old_top = bdd.top();
    const std::uint32_t old_bot = bdd.bot();
    // repl maps every old id (including terminals) to its representative
    std::vector<std::uint32_t> repl(bdd.nr_nodes() + 2);
    repl[old_top] = old_top;
    repl[old_bot] = old_bot;
    for (std::size_t p = k; p-- > 0;) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> unique;
        for (std::uint32_t v = bdd.partition_begin(p); v < bdd.partition_end(p); ++v) {
            const std::uint32_t z = repl[bdd.node(v).zero_succ];
            const std::uint32_t o = repl[bdd.node(v).one_succ];
            if (z == old_bot && o == old_bot) {
                repl[v] = old_bot;
                continue;
            }
            auto [it, inserted] = unique.try_emplace({z, o}, v);
            repl[v] = it->second;
        }
    }
    if (repl[bdd.root()] == old_bot)
        throw InfeasibleConstraint("");

    // keep representatives reachable from the root, in original order
    std::vector<char> reachable(bdd.nr_nodes() + 2, 0);
    reachable[bdd.root()] = 1;
    std::vector<std::uint32_t> new_id(bdd.nr_nodes() + 2, 0);
    std::vector<std::uint32_t> offsets{0};
    std::vector<std::uint32_t> kept;
    for (std::size_t p = 0; p < k; ++p) {
        for (std::uint32_t v = bdd.partition_begin(p); v < bdd.partition_end(p); ++v) {
            if (!reachable[v] || repl[v] != v)
                continue;
            new_id[v] = static_cast<std::uint32_t>(kept.size());
            kept.push_back(v);
            reachable[repl[bdd.node(v).zero_succ]] = 1;
            reachable[repl[bdd.node(v).one_succ]] = 1;
        }
        offsets.push_back(static_cast<std::uint32_t>(kept.size()));
    }
    const auto n = static_cast<std::uint32_t>(kept.size());
    new_id[old_top] = n;
    new_id[old_bot] = n + 1;
    std::vector<BddNode> nodes;
    nodes.reserve(kept.size());
    for (const std::uint32_t v : kept) {
        const BddNode& old = bdd.node(v);
        nodes.push_back({old.hop, new_id[repl[old.zero_succ]], new_id[repl[old.one_succ]]});
    }
    return Bdd(std::vector<std::size_t>(bdd.variables().begin(), bdd.variables().end()), std::move(nodes), std::move(offsets));
}

namespace {

/// Layer state of the compiler: a partial sum, or one of the two decided outcomes.
constexpr std::int64_t kAlwaysTrue = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kAlwaysFalse = std::numeric_limits<std::int64_t>::min();

struct SuffixRange {
    std::vector<std::int64_t> min, max;
};

SuffixRange suffix_range(const LinearConstraint& c)
{
    const std::size_t k = c.size();
    SuffixRange r{std::vector<std::int64_t>(k + 1, 0), std::vector<std::int64_t>(k + 1, 0)};
    for (std::size_t t = k; t-- > 0;) {
        r.min[t] = r.min[t + 1] + std::min<std::int64_t>(c.coefficients[t], 0);
        r.max[t] = r.max[t + 1] + std::max<std::int64_t>(c.coefficients[t], 0);
    }
    return r;
}

/// Clamps a partial sum before variable `layer` to a decided outcome where possible.
std::int64_t classify(const LinearConstraint& c, const SuffixRange& r, std::size_t layer, std::int64_t sum)
{
    const std::int64_t lo = sum + r.min[layer];
    const std::int64_t hi = sum + r.max[layer];
    switch (c.relation) {
    case Relation::less_equal:
        if (lo > c.rhs)
            return kAlwaysFalse;
        if (hi <= c.rhs)
            return kAlwaysTrue;
        break;
    case Relation::greater_equal:
        if (hi < c.rhs)
            return kAlwaysFalse;
        if (lo >= c.rhs)
            return kAlwaysTrue;
        break;
    case Relation::equal:
        if (lo > c.rhs || hi < c.rhs)
            return kAlwaysFalse;
        if (lo == c.rhs && hi == c.rhs)
            return kAlwaysTrue;
        break;
    }
    return sum;
}

} // namespace

Bdd build_bdd(const LinearConstraint& constraint)
{
    const std::size_t k = constraint.size();
    if (k == 0)
        throw std::invalid_argument("cannot build a bdd for an empty constraint");
    const SuffixRange range = suffix_range(constraint);
    const std::int64_t root_state = classify(constraint, range, 0, 0);
    if (root_state == kAlwaysFalse)
        throw InfeasibleConstraint(constraint.name);

    // successors are first recorded as layer-local indices; terminals use sentinels
    constexpr std::uint32_t local_top = std::numeric_limits<std::uint32_t>::max() - 1;
    constexpr std::uint32_t local_bot = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::vector<BddNode>> layers(k);
    std::vector<std::int64_t> states{root_state};
    for (std::size_t i = 0; i < k; ++i) {
        std::map<std::int64_t, std::uint32_t> next_index;
        std::vector<std::int64_t> next_states;
        const auto successor = [&](std::int64_t state) -> std::uint32_t {
            if (state == kAlwaysFalse)
                return local_bot;
            if (i + 1 == k)
                return state == kAlwaysTrue ? local_top : local_bot;
            auto [it, inserted] = next_index.try_emplace(state, static_cast<std::uint32_t>(next_states.size()));
            if (inserted)
                next_states.push_back(state);
            return it->second;
        };
        for (const std::int64_t s : states) {
            BddNode node{static_cast<std::uint32_t>(i + 1), 0, 0};
            if (s == kAlwaysTrue) {
                node.zero_succ = node.one_succ = successor(kAlwaysTrue);
            } else {
                node.zero_succ = successor(classify(constraint, range, i + 1, s));
                node.one_succ = successor(classify(constraint, range, i + 1, s + constraint.coefficients[i]));
            }
            layers[i].push_back(node);
        }
        states = std::move(next_states);
        if (i + 1 < k && states.empty())
            throw InfeasibleConstraint(constraint.name);
    }

    std::vector<std::uint32_t> offsets{0};
    for (const auto& layer : layers)
        offsets.push_back(offsets.back() + static_cast<std::uint32_t>(layer.size()));
    const std::uint32_t n = offsets.back();
    std::vector<BddNode> nodes;
    nodes.reserve(n);
    for (std::size_t i = 0; i < k; ++i) {
        for (BddNode node : layers[i]) {
            for (std::uint32_t* s : {&node.zero_succ, &node.one_succ})
                *s = *s == local_top ? n : *s == local_bot ? n + 1 : offsets[i + 1] + *s;
            nodes.push_back(node);
        }
    }
    Bdd raw(constraint.vars, std::move(nodes), std::move(offsets));
    try {
        return reduce(raw);
    } catch (const InfeasibleConstraint&) {
        throw InfeasibleConstraint(constraint.name);
    }
}

} // namespace bddmma
