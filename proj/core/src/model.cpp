#include "p2s/model.hpp"

#include <algorithm>
#include <map>

namespace p2s {

Domain::Domain(Value lower, Value upper) : lower_(lower), upper_(upper) {}

bool Domain::contains(Value v) const
{
    if (v < lower_ || v > upper_)
        return false;
    return !std::binary_search(holes_.begin(), holes_.end(), v);
}

std::uint64_t Domain::size() const
{
    if (is_empty())
        return 0;
    return static_cast<std::uint64_t>(upper_ - lower_ + 1) - holes_.size();
}

std::vector<Value> Domain::values() const
{
    std::vector<Value> out;
    if (is_empty())
        return out;
    out.reserve(size());
    for (Value v = lower_; v <= upper_; ++v)
        if (contains(v))
            out.push_back(v);
    return out;
}

void Domain::remove(Value v)
{
    if (!contains(v))
        return;
    if (lower_ == upper_) {
        *this = Domain::empty();
        return;
    }
    if (v == lower_) {
        ++lower_;
        while (std::binary_search(holes_.begin(), holes_.end(), lower_))
            ++lower_;
    }
    else if (v == upper_) {
        --upper_;
        while (std::binary_search(holes_.begin(), holes_.end(), upper_))
            --upper_;
    }
    else {
        holes_.insert(std::lower_bound(holes_.begin(), holes_.end(), v), v);
    }
    std::erase_if(holes_, [&](Value h) { return h <= lower_ || h >= upper_; });
}

std::string_view to_string(RelOp op)
{
    switch (op) {
    case RelOp::Le: return "<=";
    case RelOp::Ge: return ">=";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    }
    return "?";
}

std::optional<RelOp> parse_rel_op(std::string_view text)
{
    if (text == "<=")
        return RelOp::Le;
    if (text == ">=")
        return RelOp::Ge;
    if (text == "==")
        return RelOp::Eq;
    if (text == "!=")
        return RelOp::Ne;
    return std::nullopt;
}

bool compare(Value lhs, RelOp op, Value rhs)
{
    switch (op) {
    case RelOp::Le: return lhs <= rhs;
    case RelOp::Ge: return lhs >= rhs;
    case RelOp::Eq: return lhs == rhs;
    case RelOp::Ne: return lhs != rhs;
    }
    return false;
}

Atomic negate(const Atomic& a)
{
    switch (a.op) {
    case RelOp::Le: return {a.var, RelOp::Ge, a.value + 1};
    case RelOp::Ge: return {a.var, RelOp::Le, a.value - 1};
    case RelOp::Eq: return {a.var, RelOp::Ne, a.value};
    case RelOp::Ne: return {a.var, RelOp::Eq, a.value};
    }
    return a;
}

bool Disjunction::operator==(const Disjunction& other) const { return parts == other.parts; }
bool Conjunction::operator==(const Conjunction& other) const { return parts == other.parts; }

bool Body::is_false() const
{
    const auto* clause = std::get_if<Clause>(&node);
    return clause && clause->atoms.empty();
}

bool Body::is_true() const
{
    const auto* conj = std::get_if<Conjunction>(&node);
    return conj && conj->parts.empty();
}

void Assignment::set(VarId v, Value value)
{
    if (v.index >= values_.size())
        values_.resize(v.index + 1);
    values_[v.index] = value;
}

void Assignment::unset(VarId v)
{
    if (v.index < values_.size())
        values_[v.index].reset();
}

std::optional<Value> Assignment::get(VarId v) const
{
    if (v.index >= values_.size())
        return std::nullopt;
    return values_[v.index];
}

Value Assignment::at(VarId v) const
{
    auto value = get(v);
    if (!value)
        throw EvalError("variable #" + std::to_string(v.index) + " is not assigned");
    return *value;
}

namespace {

    void collect_scope(const Body& body, std::vector<VarId>& out)
    {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, Atomic>)
                    out.push_back(node.var);
                else if constexpr (std::is_same_v<T, Clause>)
                    for (const auto& a : node.atoms)
                        out.push_back(a.var);
                else if constexpr (std::is_same_v<T, Linear>)
                    for (const auto& t : node.terms)
                        out.push_back(t.var);
                else if constexpr (std::is_same_v<T, AllDifferent>)
                    out.insert(out.end(), node.vars.begin(), node.vars.end());
                else if constexpr (std::is_same_v<T, HalfReified>) {
                    out.push_back(node.guard.var);
                    for (const auto& t : node.then.terms)
                        out.push_back(t.var);
                }
                else
                    for (const auto& part : node.parts)
                        collect_scope(part, out);
            },
            body.node);
    }

    void sort_unique(std::vector<VarId>& vars)
    {
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    }

    bool eval_linear(const Linear& lin, const Assignment& a)
    {
        Value sum = 0;
        for (const auto& t : lin.terms)
            sum += t.coeff * a.at(t.var);
        return compare(sum, lin.op, lin.rhs);
    }

} // namespace

std::vector<VarId> scope(const Body& body)
{
    std::vector<VarId> out;
    collect_scope(body, out);
    sort_unique(out);
    return out;
}

std::vector<VarId> scope(std::span<const Body> bodies)
{
    std::vector<VarId> out;
    for (const auto& b : bodies)
        collect_scope(b, out);
    sort_unique(out);
    return out;
}

bool eval(const Body& body, const Assignment& assignment)
{
    return std::visit(
        [&](const auto& node) -> bool {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Atomic>)
                return node.holds(assignment.at(node.var));
            else if constexpr (std::is_same_v<T, Clause>) {
                bool any = false;
                for (const auto& a : node.atoms)
                    any = a.holds(assignment.at(a.var)) || any;
                return any;
            }
            else if constexpr (std::is_same_v<T, Linear>)
                return eval_linear(node, assignment);
            else if constexpr (std::is_same_v<T, AllDifferent>) {
                std::vector<Value> seen;
                for (auto v : node.vars)
                    seen.push_back(assignment.at(v));
                std::sort(seen.begin(), seen.end());
                return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
            }
            else if constexpr (std::is_same_v<T, HalfReified>) {
                bool guard = node.guard.holds(assignment.at(node.guard.var));
                bool then = eval_linear(node.then, assignment);
                return !guard || then;
            }
            else if constexpr (std::is_same_v<T, Disjunction>) {
                bool any = false;
                for (const auto& p : node.parts)
                    any = eval(p, assignment) || any;
                return any;
            }
            else {
                bool all = true;
                for (const auto& p : node.parts)
                    all = eval(p, assignment) && all;
                return all;
            }
        },
        body.node);
}

namespace {

    Linear canonical_linear(const Linear& lin)
    {
        std::map<VarId, Value> merged;
        for (const auto& t : lin.terms)
            merged[t.var] += t.coeff;
        Linear out{{}, lin.op, lin.rhs};
        for (auto [var, coeff] : merged)
            if (coeff != 0)
                out.terms.push_back({coeff, var});
        return out;
    }

} // namespace

Body canonical(const Body& body)
{
    return std::visit(
        [&](const auto& node) -> Body {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Clause>) {
                Clause c = node;
                std::sort(c.atoms.begin(), c.atoms.end());
                c.atoms.erase(std::unique(c.atoms.begin(), c.atoms.end()), c.atoms.end());
                if (c.atoms.size() == 1)
                    return c.atoms.front();
                return c;
            }
            else if constexpr (std::is_same_v<T, Linear>) {
                Linear lin = canonical_linear(node);
                // A linear with no terms left is a constant.
                if (lin.terms.empty())
                    return compare(0, lin.op, lin.rhs) ? truth() : falsity();
                return lin;
            }
            else if constexpr (std::is_same_v<T, AllDifferent>) {
                AllDifferent ad = node;
                std::sort(ad.vars.begin(), ad.vars.end());
                return ad;
            }
            else if constexpr (std::is_same_v<T, HalfReified>) {
                Linear then = canonical_linear(node.then);
                if (then.terms.empty())
                    return compare(0, then.op, then.rhs) ? truth() : Body(negate(node.guard));
                return HalfReified{node.guard, then};
            }
            else if constexpr (std::is_same_v<T, Disjunction> || std::is_same_v<T, Conjunction>) {
                T out;
                for (const auto& p : node.parts)
                    out.parts.push_back(canonical(p));
                return out;
            }
            else
                return node;
        },
        body.node);
}

std::optional<VarId> UserModel::find_var(std::string_view name) const
{
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name)
            return VarId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
}

std::optional<std::size_t> UserModel::find_constraint(std::string_view id) const
{
    for (std::size_t i = 0; i < constraints.size(); ++i)
        if (constraints[i].id == id)
            return i;
    return std::nullopt;
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column) :
    std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
    line_(line),
    column_(column)
{
}

namespace {

    std::string var_name(VarId v, std::span<const VarDecl> vars)
    {
        if (v.index < vars.size())
            return vars[v.index].name;
        return "#" + std::to_string(v.index);
    }

    std::string format_linear(const Linear& lin, std::span<const VarDecl> vars)
    {
        std::string out = "lin ";
        for (std::size_t i = 0; i < lin.terms.size(); ++i) {
            if (i > 0)
                out += " + ";
            out += std::to_string(lin.terms[i].coeff) + "*" + var_name(lin.terms[i].var, vars);
        }
        out += " ";
        out += to_string(lin.op);
        out += " " + std::to_string(lin.rhs);
        return out;
    }

    std::string format_atom_spaced(const Atomic& a, std::span<const VarDecl> vars)
    {
        return var_name(a.var, vars) + " " + std::string(to_string(a.op)) + " " + std::to_string(a.value);
    }

} // namespace

std::string format_atom(const Atomic& a, std::span<const VarDecl> vars)
{
    return var_name(a.var, vars) + std::string(to_string(a.op)) + std::to_string(a.value);
}

std::string format_body(const Body& body, std::span<const VarDecl> vars)
{
    return std::visit(
        [&](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Atomic>)
                return "clause " + format_atom_spaced(node, vars);
            else if constexpr (std::is_same_v<T, Clause>) {
                if (node.atoms.empty())
                    return "false";
                std::string out = "clause ";
                for (std::size_t i = 0; i < node.atoms.size(); ++i) {
                    if (i > 0)
                        out += " | ";
                    out += format_atom_spaced(node.atoms[i], vars);
                }
                return out;
            }
            else if constexpr (std::is_same_v<T, Linear>)
                return format_linear(node, vars);
            else if constexpr (std::is_same_v<T, AllDifferent>) {
                std::string out = "alldifferent(";
                for (std::size_t i = 0; i < node.vars.size(); ++i) {
                    if (i > 0)
                        out += ",";
                    out += var_name(node.vars[i], vars);
                }
                return out + ")";
            }
            else if constexpr (std::is_same_v<T, HalfReified>)
                return "imp " + format_atom_spaced(node.guard, vars) + " -> " + format_linear(node.then, vars);
            else {
                constexpr bool is_or = std::is_same_v<T, Disjunction>;
                if (!is_or && node.parts.empty())
                    return "true";
                std::string out = is_or ? "or(" : "and(";
                for (std::size_t i = 0; i < node.parts.size(); ++i) {
                    if (i > 0)
                        out += "; ";
                    out += format_body(node.parts[i], vars);
                }
                return out + ")";
            }
        },
        body.node);
}

} // namespace p2s
