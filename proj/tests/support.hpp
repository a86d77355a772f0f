#pragma once

// Independent reference implementations for tests: a direct evaluator and an
// exhaustive enumerator, sharing no code with the library's engine.

#include "p2s/flatten.hpp"
#include "p2s/model.hpp"

#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace p2s::testing {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string data_path(const std::string& name) { return std::string(P2S_DATA_DIR) + "/" + name; }

inline UserModel golden_model() { return parse_model(read_file(data_path("jobshop.mod"))); }
inline std::string golden_proof_text() { return read_file(data_path("jobshop.drcp")); }

inline bool ref_cmp(Value x, RelOp op, Value v)
{
    switch (op) {
    case RelOp::Le: return x <= v;
    case RelOp::Ge: return x >= v;
    case RelOp::Eq: return x == v;
    case RelOp::Ne: return x != v;
    }
    return false;
}

inline bool ref_eval(const Body& b, const std::vector<Value>& x);

inline Value ref_sum(const Linear& l, const std::vector<Value>& x)
{
    Value s = 0;
    for (const auto& t : l.terms)
        s += t.coeff * x[t.var.index];
    return s;
}

inline bool ref_eval(const Body& b, const std::vector<Value>& x)
{
    if (const auto* a = std::get_if<Atomic>(&b.node))
        return ref_cmp(x[a->var.index], a->op, a->value);
    if (const auto* c = std::get_if<Clause>(&b.node)) {
        for (const auto& a : c->atoms)
            if (ref_cmp(x[a.var.index], a.op, a.value))
                return true;
        return false;
    }
    if (const auto* l = std::get_if<Linear>(&b.node))
        return ref_cmp(ref_sum(*l, x), l->op, l->rhs);
    if (const auto* ad = std::get_if<AllDifferent>(&b.node)) {
        for (std::size_t i = 0; i < ad->vars.size(); ++i)
            for (std::size_t j = i + 1; j < ad->vars.size(); ++j)
                if (x[ad->vars[i].index] == x[ad->vars[j].index])
                    return false;
        return true;
    }
    if (const auto* h = std::get_if<HalfReified>(&b.node))
        return !ref_cmp(x[h->guard.var.index], h->guard.op, h->guard.value) ||
            ref_cmp(ref_sum(h->then, x), h->then.op, h->then.rhs);
    if (const auto* d = std::get_if<Disjunction>(&b.node)) {
        for (const auto& p : d->parts)
            if (ref_eval(p, x))
                return true;
        return false;
    }
    const auto& c = std::get<Conjunction>(b.node);
    for (const auto& p : c.parts)
        if (!ref_eval(p, x))
            return false;
    return true;
}

/// Calls f on every total assignment of the domains until f returns false.
template <typename F>
void enumerate(const std::vector<Domain>& domains, F&& f)
{
    std::vector<std::vector<Value>> values;
    for (const auto& d : domains) {
        values.push_back(d.values());
        if (values.back().empty())
            return;
    }
    std::vector<std::size_t> pos(domains.size(), 0);
    std::vector<Value> x(domains.size());
    for (;;) {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = values[i][pos[i]];
        if (!f(x))
            return;
        std::size_t i = 0;
        while (i < pos.size() && ++pos[i] == values[i].size())
            pos[i++] = 0;
        if (i == pos.size())
            return;
    }
}

inline std::vector<Domain> domains_of_vars(const std::vector<VarDecl>& vars)
{
    std::vector<Domain> out;
    for (const auto& v : vars)
        out.push_back(v.domain);
    return out;
}

/// Some assignment satisfying all bodies, by exhaustive search.
inline std::optional<std::vector<Value>> ref_solve(const std::vector<Domain>& domains, const std::vector<const Body*>& bodies)
{
    std::optional<std::vector<Value>> found;
    enumerate(domains, [&](const std::vector<Value>& x) {
        for (const Body* b : bodies)
            if (!ref_eval(*b, x))
                return true;
        found = x;
        return false;
    });
    return found;
}

inline bool ref_sat(const std::vector<Domain>& domains, const std::vector<const Body*>& bodies)
{
    return ref_solve(domains, bodies).has_value();
}

/// Small random bodies over `n` variables for fuzzing.
class BodyFuzzer {
public:
    BodyFuzzer(std::uint64_t seed, std::uint32_t vars, Value lo, Value hi) : rng_(seed), vars_(vars), lo_(lo), hi_(hi) {}

    Atomic atom()
    {
        static constexpr RelOp ops[] = {RelOp::Le, RelOp::Ge, RelOp::Eq, RelOp::Ne};
        return {VarId{pick(vars_)}, ops[pick(4)], lo_ + static_cast<Value>(pick(static_cast<std::uint32_t>(hi_ - lo_ + 1)))};
    }

    Linear linear()
    {
        Linear l;
        std::uint32_t k = 1 + pick(3);
        for (std::uint32_t i = 0; i < k; ++i)
            l.terms.push_back({static_cast<Value>(pick(5)) - 2, VarId{pick(vars_)}});
        if (l.terms.front().coeff == 0)
            l.terms.front().coeff = 1;
        l.op = pick(3) == 0 ? RelOp::Ne : (pick(2) ? RelOp::Le : RelOp::Ge);
        l.rhs = static_cast<Value>(pick(9)) - 2;
        return l;
    }

    Body body(int depth = 1)
    {
        switch (pick(depth > 0 ? 6 : 4)) {
        case 0: return atom();
        case 1: {
            Clause c;
            std::uint32_t k = 1 + pick(3);
            for (std::uint32_t i = 0; i < k; ++i)
                c.atoms.push_back(atom());
            return c;
        }
        case 2: return linear();
        case 3: {
            AllDifferent ad;
            for (std::uint32_t v = 0; v < vars_; ++v)
                if (pick(2))
                    ad.vars.push_back(VarId{v});
            if (ad.vars.size() < 2)
                return linear();
            return ad;
        }
        default: {
            Disjunction d;
            std::uint32_t k = 2 + pick(2);
            for (std::uint32_t i = 0; i < k; ++i)
                d.parts.push_back(body(depth - 1));
            return d;
        }
        }
    }

    std::uint32_t pick(std::uint32_t n) { return static_cast<std::uint32_t>(rng_() % n); }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::uint32_t vars_;
    Value lo_, hi_;
};

inline UserModel random_user_model(std::uint64_t seed, std::uint32_t vars, std::uint32_t constraints, Value hi = 3)
{
    BodyFuzzer fz(seed, vars, 0, hi);
    UserModel m;
    for (std::uint32_t v = 0; v < vars; ++v)
        m.vars.push_back({"v" + std::to_string(v), Domain(0, hi)});
    for (std::uint32_t c = 0; c < constraints; ++c)
        m.constraints.push_back({"c" + std::to_string(c), fz.body()});
    return m;
}

} // namespace p2s::testing
