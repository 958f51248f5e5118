#include "bddmma/ilp.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace bddmma {

namespace {

enum class TokenKind { identifier, number, plus, minus, colon, relation };

struct Token {
    TokenKind kind;
    std::string text;
    double number = 0.0;
    Relation relation = Relation::less_equal;
    std::size_t line = 0;
};

bool is_identifier_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || std::string_view("!\"#$%&()/,;?@`'{}|~[]").find(c) != std::string_view::npos;
}

bool is_identifier_char(char c)
{
    return is_identifier_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.';
}

std::vector<Token> tokenize(std::string_view text, std::size_t line)
{
    std::vector<Token> tokens;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        if (c == '+' || c == '-') {
            tokens.push_back({c == '+' ? TokenKind::plus : TokenKind::minus, std::string(1, c), 0.0, {}, line});
            ++pos;
            continue;
        }
        if (c == ':') {
            tokens.push_back({TokenKind::colon, ":", 0.0, {}, line});
            ++pos;
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::size_t end = pos + 1;
            while (end < text.size() && (text[end] == '<' || text[end] == '>' || text[end] == '='))
                ++end;
            const std::string op(text.substr(pos, end - pos));
            Token tok{TokenKind::relation, op, 0.0, {}, line};
            if (op == "<=" || op == "=<" || op == "<")
                tok.relation = Relation::less_equal;
            else if (op == ">=" || op == "=>" || op == ">")
                tok.relation = Relation::greater_equal;
            else if (op == "=" || op == "==")
                tok.relation = Relation::equal;
            else
                throw ParseError(line, "unknown relation '" + op + "'");
            tokens.push_back(tok);
            pos = end;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t end = pos;
            while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.'))
                ++end;
            if (end < text.size() && (text[end] == 'e' || text[end] == 'E')) {
                std::size_t exp = end + 1;
                if (exp < text.size() && (text[exp] == '+' || text[exp] == '-'))
                    ++exp;
                if (exp < text.size() && std::isdigit(static_cast<unsigned char>(text[exp]))) {
                    end = exp;
                    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end])))
                        ++end;
                }
            }
            Token tok{TokenKind::number, std::string(text.substr(pos, end - pos)), 0.0, {}, line};
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size())
                throw ParseError(line, "malformed number '" + tok.text + "'");
            tokens.push_back(tok);
            pos = end;
            continue;
        }
        if (is_identifier_start(c)) {
            std::size_t end = pos;
            while (end < text.size() && is_identifier_char(text[end]))
                ++end;
            tokens.push_back({TokenKind::identifier, std::string(text.substr(pos, end - pos)), 0.0, {}, line});
            pos = end;
            continue;
        }
        throw ParseError(line, std::string("unexpected character '") + c + "'");
    }
    return tokens;
}

enum class Section { none, objective, constraints, bounds, binaries, generals, end };

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Recognizes a section keyword at the start of a line; returns the section and the remaining text.
std::optional<std::pair<Section, std::string_view>> match_section(std::string_view line)
{
    static const std::vector<std::pair<std::string, Section>> keywords = {
        {"minimize", Section::objective}, {"minimise", Section::objective}, {"minimum", Section::objective},
        {"min", Section::objective},      {"maximize", Section::objective}, {"maximise", Section::objective},
        {"maximum", Section::objective},  {"max", Section::objective},      {"subject to", Section::constraints},
        {"such that", Section::constraints}, {"s.t.", Section::constraints}, {"st", Section::constraints},
        {"bounds", Section::bounds},      {"bound", Section::bounds},       {"binaries", Section::binaries},
        {"binary", Section::binaries},    {"bin", Section::binaries},       {"generals", Section::generals},
        {"general", Section::generals},   {"gen", Section::generals},       {"integers", Section::generals},
        {"integer", Section::generals},   {"end", Section::end},
    };
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start])))
        ++start;
    const std::string low = lower(line.substr(start));
    for (const auto& [kw, section] : keywords) {
        if (low.compare(0, kw.size(), kw) != 0)
            continue;
        const std::size_t after = kw.size();
        if (after < low.size() && !std::isspace(static_cast<unsigned char>(low[after])))
            continue;
        return std::make_pair(section, line.substr(start + after));
    }
    return std::nullopt;
}

bool is_maximize_keyword(std::string_view line)
{
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start])))
        ++start;
    return lower(line.substr(start, 3)) == "max";
}

class LpReader {
public:
    IlpInstance read(const std::string& text)
    {
        std::istringstream in(text);
        std::string raw;
        std::size_t line_no = 0;
        Section section = Section::none;
        while (std::getline(in, raw)) {
            ++line_no;
            if (auto comment = raw.find('\\'); comment != std::string::npos)
                raw.erase(comment);
            std::string_view rest = raw;
            if (auto match = match_section(rest)) {
                if (section == Section::objective)
                    parse_objective();
                if (match->first == Section::objective) {
                    if (seen_objective_)
                        throw ParseError(line_no, "duplicate objective section");
                    seen_objective_ = true;
                    instance_.maximize = is_maximize_keyword(rest);
                }
                section = match->first;
                rest = match->second;
            }
            if (section == Section::end)
                break;
            auto tokens = tokenize(rest, line_no);
            if (tokens.empty())
                continue;
            if (section == Section::none)
                throw ParseError(line_no, "content before any section header");
            if (section == Section::bounds) {
                parse_bound(tokens, line_no);
                continue;
            }
            if (section == Section::binaries || section == Section::generals) {
                for (const auto& tok : tokens) {
                    if (tok.kind != TokenKind::identifier)
                        throw ParseError(line_no, "expected variable name, got '" + tok.text + "'");
                    const std::size_t v = variable(tok.text);
                    (section == Section::binaries ? binary_ : general_)[v] = true;
                }
                continue;
            }
            auto& buffer = section == Section::objective ? objective_tokens_ : constraint_tokens_;
            buffer.insert(buffer.end(), tokens.begin(), tokens.end());
            if (section == Section::constraints)
                consume_constraints(false);
        }
        if (!seen_objective_)
            throw ParseError(line_no, "missing objective section");
        if (section == Section::objective)
            parse_objective();
        consume_constraints(true);
        finish_objective();
        check_binaries(line_no);
        if (instance_.objective.empty())
            throw ParseError(line_no, "instance has no variables");
        return std::move(instance_);
    }

private:
    std::size_t variable(const std::string& name)
    {
        auto [it, inserted] = index_.try_emplace(name, instance_.variable_names.size());
        if (inserted) {
            instance_.variable_names.push_back(name);
            instance_.objective.push_back(0.0);
            binary_.push_back(false);
            general_.push_back(false);
            lower_.push_back(0.0);
            upper_.push_back(std::numeric_limits<double>::infinity());
        }
        return it->second;
    }

    /// Parses "[sign] [coef] var" terms from tokens[pos...] until a relation or the end.
    struct Term {
        std::size_t var;
        double coef;
        std::size_t line;
    };

    std::vector<Term> parse_terms(const std::vector<Token>& tokens, std::size_t& pos)
    {
        std::vector<Term> terms;
        while (pos < tokens.size() && tokens[pos].kind != TokenKind::relation) {
            const std::size_t line = tokens[pos].line;
            double sign = 1.0;
            bool explicit_sign = false;
            while (pos < tokens.size() && (tokens[pos].kind == TokenKind::plus || tokens[pos].kind == TokenKind::minus)) {
                if (tokens[pos].kind == TokenKind::minus)
                    sign = -sign;
                explicit_sign = true;
                ++pos;
            }
            if (!explicit_sign && !terms.empty())
                throw ParseError(line, "expected '+' or '-' between terms");
            double coef = 1.0;
            if (pos < tokens.size() && tokens[pos].kind == TokenKind::number) {
                coef = tokens[pos].number;
                ++pos;
            }
            if (pos >= tokens.size() || tokens[pos].kind != TokenKind::identifier)
                throw ParseError(line, "expected variable name in term");
            terms.push_back({variable(tokens[pos].text), sign * coef, line});
            ++pos;
        }
        return terms;
    }

    /// Registers objective variables first so they keep their order of appearance.
    void parse_objective()
    {
        std::size_t pos = 0;
        if (objective_tokens_.size() >= 2 && objective_tokens_[0].kind == TokenKind::identifier && objective_tokens_[1].kind == TokenKind::colon)
            pos = 2;
        objective_terms_ = parse_terms(objective_tokens_, pos);
        if (pos != objective_tokens_.size())
            throw ParseError(objective_tokens_[pos].line, "unexpected relation in objective");
    }

    void finish_objective()
    {
        for (const auto& term : objective_terms_)
            instance_.objective[term.var] += term.coef;
        if (instance_.maximize)
            for (auto& c : instance_.objective)
                c = -c;
    }

    static std::int64_t to_integer(std::size_t line, double value, const char* what)
    {
        if (!std::isfinite(value) || value != std::floor(value) || std::abs(value) > 9.0e15)
            throw ParseError(line, std::string("non-integer ") + what + " '" + format_double(value) + "'");
        return static_cast<std::int64_t>(value);
    }

    /// Consumes complete constraint statements from the buffer. A statement ends at its rhs number.
    void consume_constraints(bool at_end)
    {
        auto& toks = constraint_tokens_;
        std::size_t start = 0;
        while (start < toks.size()) {
            std::size_t rel = start;
            while (rel < toks.size() && toks[rel].kind != TokenKind::relation)
                ++rel;
            std::size_t rhs_end = rel + 1;
            if (rhs_end < toks.size() && (toks[rhs_end].kind == TokenKind::plus || toks[rhs_end].kind == TokenKind::minus))
                ++rhs_end;
            if (rhs_end >= toks.size()) {
                if (at_end)
                    throw ParseError(toks[start].line, "incomplete constraint");
                break;
            }
            parse_constraint(start, rel, rhs_end);
            start = rhs_end + 1;
        }
        toks.erase(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(start));
    }

    void parse_constraint(std::size_t start, std::size_t rel, std::size_t rhs_pos)
    {
        const auto& toks = constraint_tokens_;
        LinearConstraint c;
        std::size_t pos = start;
        if (rel - start >= 2 && toks[start].kind == TokenKind::identifier && toks[start + 1].kind == TokenKind::colon) {
            c.name = toks[start].text;
            pos += 2;
        } else {
            c.name = "R" + std::to_string(instance_.constraints.size());
        }
        const std::vector<Token> lhs(toks.begin() + static_cast<std::ptrdiff_t>(pos), toks.begin() + static_cast<std::ptrdiff_t>(rel));
        std::size_t lpos = 0;
        const auto terms = parse_terms(lhs, lpos);
        std::map<std::size_t, std::int64_t> merged;
        for (const auto& term : terms)
            merged[term.var] += to_integer(term.line, term.coef, "constraint coefficient");
        for (const auto& [v, coef] : merged) {
            if (coef == 0)
                continue;
            c.vars.push_back(v);
            c.coefficients.push_back(coef);
        }
        if (c.vars.empty())
            throw ParseError(toks[rel].line, "empty constraint '" + c.name + "'");
        c.relation = toks[rel].relation;
        const Token& rhs_tok = toks[rhs_pos];
        if (rhs_tok.kind != TokenKind::number)
            throw ParseError(rhs_tok.line, "expected numeric right-hand side, got '" + rhs_tok.text + "'");
        const double sign = (rhs_pos > rel + 1 && toks[rel + 1].kind == TokenKind::minus) ? -1.0 : 1.0;
        c.rhs = to_integer(rhs_tok.line, sign * rhs_tok.number, "right-hand side");
        instance_.constraints.push_back(std::move(c));
    }

    static double bound_value(const std::vector<Token>& t, std::size_t& pos, std::size_t line)
    {
        double sign = 1.0;
        if (pos < t.size() && (t[pos].kind == TokenKind::plus || t[pos].kind == TokenKind::minus)) {
            sign = t[pos].kind == TokenKind::minus ? -1.0 : 1.0;
            ++pos;
        }
        if (pos < t.size() && t[pos].kind == TokenKind::number)
            return sign * t[pos++].number;
        if (pos < t.size() && t[pos].kind == TokenKind::identifier) {
            const std::string low = lower(t[pos].text);
            if (low == "inf" || low == "infinity") {
                ++pos;
                return sign * std::numeric_limits<double>::infinity();
            }
        }
        throw ParseError(line, "expected bound value");
    }

    void set_bound(std::size_t v, Relation rel, double value, bool var_on_left)
    {
        // "x <= b" on the left equals "b >= x" on the right
        if (!var_on_left)
            rel = rel == Relation::less_equal ? Relation::greater_equal : rel == Relation::greater_equal ? Relation::less_equal : rel;
        if (rel == Relation::less_equal || rel == Relation::equal)
            upper_[v] = value;
        if (rel == Relation::greater_equal || rel == Relation::equal)
            lower_[v] = value;
    }

    void parse_bound(const std::vector<Token>& t, std::size_t line)
    {
        std::size_t pos = 0;
        if (t.size() == 2 && t[0].kind == TokenKind::identifier && t[1].kind == TokenKind::identifier && lower(t[1].text) == "free")
            throw ParseError(line, "variable '" + t[0].text + "' declared free; only binary variables are supported");
        std::optional<std::pair<Relation, double>> left;
        if (t[0].kind != TokenKind::identifier) {
            const double value = bound_value(t, pos, line);
            if (pos >= t.size() || t[pos].kind != TokenKind::relation)
                throw ParseError(line, "expected relation in bound");
            left = std::make_pair(t[pos++].relation, value);
        }
        if (pos >= t.size() || t[pos].kind != TokenKind::identifier)
            throw ParseError(line, "expected variable in bound");
        const std::size_t v = variable(t[pos++].text);
        if (left)
            set_bound(v, left->first, left->second, false);
        if (pos < t.size()) {
            if (t[pos].kind != TokenKind::relation)
                throw ParseError(line, "expected relation in bound");
            const Relation rel = t[pos++].relation;
            set_bound(v, rel, bound_value(t, pos, line), true);
        }
        if (pos != t.size())
            throw ParseError(line, "trailing tokens in bound");
        if (lower_[v] != 0.0 || !(upper_[v] == 1.0 || upper_[v] == std::numeric_limits<double>::infinity()))
            throw ParseError(line, "variable '" + instance_.variable_names[v] + "' has bounds other than [0,1]");
    }

    void check_binaries(std::size_t line)
    {
        for (std::size_t v = 0; v < instance_.variable_names.size(); ++v) {
            if (binary_[v])
                continue;
            if (general_[v] && upper_[v] == 1.0)
                continue;
            throw ParseError(line, "variable '" + instance_.variable_names[v] + "' is not binary");
        }
    }

    IlpInstance instance_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<bool> binary_, general_;
    std::vector<double> lower_, upper_;
    std::vector<Token> objective_tokens_, constraint_tokens_;
    std::vector<Term> objective_terms_;
    bool seen_objective_ = false;
};

} // namespace

IlpInstance parse_lp(const std::string& text)
{
    return LpReader().read(text);
}

IlpInstance parse_lp_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_lp(ss.str());
}

std::string write_lp(const IlpInstance& instance)
{
    std::ostringstream out;
    const auto term = [&](bool first, double coef, const std::string& name) {
        if (std::signbit(coef))
            out << (first ? "- " : " - ");
        else if (!first)
            out << " + ";
        out << format_double(std::abs(coef)) << ' ' << name;
    };
    out << (instance.maximize ? "Maximize\n" : "Minimize\n") << " obj: ";
    for (std::size_t i = 0; i < instance.nr_variables(); ++i)
        term(i == 0, instance.maximize ? -instance.objective[i] : instance.objective[i], instance.variable_names[i]);
    out << "\nSubject To\n";
    for (const auto& c : instance.constraints) {
        out << ' ' << c.name << ": ";
        for (std::size_t t = 0; t < c.size(); ++t)
            term(t == 0, static_cast<double>(c.coefficients[t]), instance.variable_names[c.vars[t]]);
        out << ' ' << to_string(c.relation) << ' ' << c.rhs << '\n';
    }
    out << "Binaries\n";
    for (std::size_t i = 0; i < instance.nr_variables(); ++i)
        out << ' ' << instance.variable_names[i];
    out << "\nEnd\n";
    return out.str();
}

} // namespace bddmma
