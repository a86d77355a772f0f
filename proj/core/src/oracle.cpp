#include "p2s/oracle.hpp"

#include "engine.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace p2s {

std::uint64_t budget_from_env(std::uint64_t fallback)
{
    const char* text = std::getenv("P2S_BUDGET");
    if (!text || !*text)
        return fallback;
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(text, text + std::strlen(text), value);
    if (ec != std::errc() || *end != '\0')
        return fallback;
    return value;
}

std::vector<Domain> domains_of(std::span<const VarDecl> vars)
{
    std::vector<Domain> out;
    out.reserve(vars.size());
    for (const auto& v : vars)
        out.push_back(v.domain);
    return out;
}

Oracle::Oracle(std::vector<Domain> domains, std::uint64_t budget) : domains_(std::move(domains)), budget_(budget) {}

OracleResult Oracle::solve(std::span<const Body* const> hard, std::span<const Body* const> assumptions)
{
    return solve(hard, assumptions, budget_);
}

OracleResult Oracle::solve(
    std::span<const Body* const> hard, std::span<const Body* const> assumptions, std::uint64_t call_budget)
{
    ++calls_;
    detail::EngineOptions options;
    options.conflict_budget = std::min(call_budget, budget_);
    options.track_deps = true;
    detail::Engine engine(domains_, options);
    for (std::size_t i = 0; i < hard.size(); ++i)
        engine.add_body(*hard[i], static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < assumptions.size(); ++i) {
        detail::DepSet deps;
        deps.set(i);
        engine.add_body(*assumptions[i], static_cast<std::uint32_t>(hard.size() + i), &deps);
    }
    switch (engine.solve()) {
    case detail::SearchStatus::Sat: {
        Assignment full = engine.assignment();
        Assignment a(domains_.size());
        for (std::uint32_t v = 0; v < domains_.size(); ++v)
            a.set(VarId{v}, full.at(VarId{v}));
        for (const Body* b : hard)
            if (!eval(*b, a))
                throw std::logic_error("oracle returned an assignment violating a hard constraint");
        for (const Body* b : assumptions)
            if (!eval(*b, a))
                throw std::logic_error("oracle returned an assignment violating an assumption");
        return Sat{std::move(a)};
    }
    case detail::SearchStatus::Unsat: return Unsat{engine.refutation_deps().members()};
    case detail::SearchStatus::BudgetExceeded: break;
    }
    return BudgetExceeded{};
}

OracleResult Oracle::solve(std::span<const Body> hard, std::span<const Body> assumptions)
{
    std::vector<const Body*> h, a;
    for (const auto& b : hard)
        h.push_back(&b);
    for (const auto& b : assumptions)
        a.push_back(&b);
    return solve(std::span<const Body* const>(h), std::span<const Body* const>(a));
}

OracleResult solve(const OracleProblem& problem)
{
    Oracle oracle(problem.domains, problem.budget);
    return oracle.solve(std::span<const Body>(problem.hard), std::span<const Body>(problem.assumptions));
}

namespace {

    Body negated_linear(const Linear& l)
    {
        Linear out = l;
        switch (l.op) {
        case RelOp::Le:
            out.op = RelOp::Ge;
            out.rhs = l.rhs + 1;
            break;
        case RelOp::Ge:
            out.op = RelOp::Le;
            out.rhs = l.rhs - 1;
            break;
        case RelOp::Eq: out.op = RelOp::Ne; break;
        case RelOp::Ne: out.op = RelOp::Eq; break;
        }
        return out;
    }

    /// Disjunction of the given bodies, flattened to a clause when every part is atomic.
    Body any_of(std::vector<Body> parts)
    {
        if (parts.size() == 1)
            return std::move(parts.front());
        Clause clause;
        for (const auto& p : parts) {
            if (const auto* a = std::get_if<Atomic>(&p.node))
                clause.atoms.push_back(*a);
            else if (const auto* c = std::get_if<Clause>(&p.node))
                clause.atoms.insert(clause.atoms.end(), c->atoms.begin(), c->atoms.end());
            else
                return Disjunction{std::move(parts)};
        }
        return clause;
    }

} // namespace

Body negate(const Body& body)
{
    return std::visit(
        [](const auto& node) -> Body {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Atomic>)
                return negate(node);
            else if constexpr (std::is_same_v<T, Clause>) {
                if (node.atoms.size() == 1)
                    return negate(node.atoms.front());
                Conjunction c;
                for (const auto& a : node.atoms)
                    c.parts.emplace_back(negate(a));
                return c;
            }
            else if constexpr (std::is_same_v<T, Linear>)
                return negated_linear(node);
            else if constexpr (std::is_same_v<T, AllDifferent>) {
                std::vector<Body> parts;
                for (std::size_t i = 0; i < node.vars.size(); ++i)
                    for (std::size_t j = i + 1; j < node.vars.size(); ++j)
                        parts.emplace_back(Linear{{{1, node.vars[i]}, {-1, node.vars[j]}}, RelOp::Eq, 0});
                if (parts.empty())
                    return falsity();
                return any_of(std::move(parts));
            }
            else if constexpr (std::is_same_v<T, HalfReified>)
                return Conjunction{{Body(node.guard), negated_linear(node.then)}};
            else if constexpr (std::is_same_v<T, Disjunction>) {
                Conjunction c;
                for (const auto& p : node.parts)
                    c.parts.push_back(negate(p));
                return c;
            }
            else {
                if (node.parts.empty())
                    return falsity();
                std::vector<Body> parts;
                for (const auto& p : node.parts)
                    parts.push_back(negate(p));
                return any_of(std::move(parts));
            }
        },
        body.node);
}

Body negate_conjunction(std::span<const Body> bodies)
{
    if (bodies.empty())
        return falsity();
    std::vector<Body> parts;
    for (const auto& b : bodies)
        parts.push_back(negate(b));
    return any_of(std::move(parts));
}

} // namespace p2s
