#include "engine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace p2s::detail {

void DepSet::set(std::size_t i)
{
    if (i / 64 >= words_.size())
        words_.resize(i / 64 + 1, 0);
    words_[i / 64] |= std::uint64_t{1} << (i % 64);
}

void DepSet::merge(const DepSet& other)
{
    if (other.words_.size() > words_.size())
        words_.resize(other.words_.size(), 0);
    for (std::size_t w = 0; w < other.words_.size(); ++w)
        words_[w] |= other.words_[w];
}

std::vector<std::size_t> DepSet::members() const
{
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w)
        for (std::size_t b = 0; b < 64; ++b)
            if (words_[w] >> b & 1)
                out.push_back(w * 64 + b);
    return out;
}

namespace {

    constexpr Value max_domain_width = 10'000'000;

    Value floor_div(Value a, Value b)
    {
        Value q = a / b;
        if (a % b != 0 && ((a < 0) != (b < 0)))
            --q;
        return q;
    }

    Value ceil_div(Value a, Value b)
    {
        Value q = a / b;
        if (a % b != 0 && ((a < 0) == (b < 0)))
            ++q;
        return q;
    }

    std::vector<Term> merge_terms(const std::vector<Term>& terms)
    {
        std::map<VarId, Value> merged;
        for (const auto& t : terms)
            merged[t.var] += t.coeff;
        std::vector<Term> out;
        for (auto [v, c] : merged)
            if (c != 0)
                out.push_back({c, v});
        return out;
    }

    std::vector<Term> negated(std::vector<Term> terms)
    {
        for (auto& t : terms)
            t.coeff = -t.coeff;
        return terms;
    }

} // namespace

Engine::Engine(std::span<const Domain> domains, EngineOptions options) : options_(options)
{
    for (const auto& d : domains)
        add_var(d);
}

VarId Engine::add_var(const Domain& domain)
{
    VarState s;
    if (domain.is_empty()) {
        trivially_unsat_ = true;
        s.lb0 = s.lb = 0;
        s.ub0 = s.ub = 0;
        s.removed.assign(1, 0);
        s.hole_entry.assign(1, -1);
    }
    else {
        if (domain.upper() - domain.lower() >= max_domain_width)
            throw std::invalid_argument("domain too wide for the engine");
        s.lb0 = s.lb = domain.lower();
        s.ub0 = s.ub = domain.upper();
        auto width = static_cast<std::size_t>(s.ub0 - s.lb0 + 1);
        s.removed.assign(width, 0);
        s.hole_entry.assign(width, -1);
        for (Value h : domain.holes())
            s.removed[static_cast<std::size_t>(h - s.lb0)] = 1;
    }
    vars_.push_back(std::move(s));
    return VarId{static_cast<std::uint32_t>(vars_.size() - 1)};
}

std::uint32_t Engine::push_constraint(EngineConstraint c)
{
    auto idx = static_cast<std::uint32_t>(constraints_.size());
    std::vector<VarId> watched;
    for (const auto& a : c.atoms)
        watched.push_back(a.var);
    for (const auto& t : c.terms)
        watched.push_back(t.var);
    watched.insert(watched.end(), c.vars.begin(), c.vars.end());
    std::sort(watched.begin(), watched.end());
    watched.erase(std::unique(watched.begin(), watched.end()), watched.end());
    for (auto v : watched)
        vars_[v.index].watchers.push_back(idx);
    constraints_.push_back(std::move(c));
    in_queue_.push_back(0);
    return idx;
}

void Engine::add_clause(std::vector<Atomic> atoms, std::uint32_t origin, const DepSet* deps)
{
    EngineConstraint c;
    c.kind = EngineConstraint::Kind::Clause;
    for (auto& a : atoms)
        a = normalize(a);
    c.atoms = std::move(atoms);
    c.origin = origin;
    if (deps)
        c.deps = *deps;
    push_constraint(std::move(c));
}

void Engine::add_linear(std::vector<Term> terms, RelOp op, Value rhs, std::vector<Atomic> guards,
    std::uint32_t origin, const DepSet* deps)
{
    terms = merge_terms(terms);
    for (auto& g : guards)
        g = normalize(g);
    if (terms.empty()) {
        if (compare(0, op, rhs))
            return;
        std::vector<Atomic> clause;
        for (const auto& g : guards)
            clause.push_back(negate(g));
        add_clause(std::move(clause), origin, deps);
        return;
    }
    auto make = [&](EngineConstraint::Kind kind, std::vector<Term> ts, Value r) {
        EngineConstraint c;
        c.kind = kind;
        c.atoms = guards;
        c.terms = std::move(ts);
        c.rhs = r;
        c.origin = origin;
        if (deps)
            c.deps = *deps;
        push_constraint(std::move(c));
    };
    using K = EngineConstraint::Kind;
    switch (op) {
    case RelOp::Le: make(K::LinearLe, terms, rhs); break;
    case RelOp::Ge: make(K::LinearLe, negated(terms), -rhs); break;
    case RelOp::Eq:
        make(K::LinearLe, terms, rhs);
        make(K::LinearLe, negated(terms), -rhs);
        break;
    case RelOp::Ne: make(K::LinearNe, terms, rhs); break;
    }
}

void Engine::add_all_different(std::vector<VarId> vars, std::uint32_t origin, const DepSet* deps)
{
    EngineConstraint c;
    c.kind = EngineConstraint::Kind::AllDifferent;
    c.vars = std::move(vars);
    c.origin = origin;
    if (deps)
        c.deps = *deps;
    push_constraint(std::move(c));
}

void Engine::add_body(const Body& body, std::uint32_t origin, const DepSet* deps)
{
    add_body_guarded(body, {}, origin, deps);
}

void Engine::add_body_guarded(const Body& body, const std::vector<Atomic>& guards, std::uint32_t origin,
    const DepSet* deps)
{
    auto with_negated_guards = [&](std::vector<Atomic> atoms) {
        std::vector<Atomic> out;
        for (const auto& g : guards)
            out.push_back(negate(g));
        out.insert(out.end(), atoms.begin(), atoms.end());
        return out;
    };
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Atomic>)
                add_clause(with_negated_guards({node}), origin, deps);
            else if constexpr (std::is_same_v<T, Clause>)
                add_clause(with_negated_guards(node.atoms), origin, deps);
            else if constexpr (std::is_same_v<T, Linear>)
                add_linear(node.terms, node.op, node.rhs, guards, origin, deps);
            else if constexpr (std::is_same_v<T, AllDifferent>) {
                if (guards.empty()) {
                    add_all_different(node.vars, origin, deps);
                    return;
                }
                for (std::size_t i = 0; i < node.vars.size(); ++i)
                    for (std::size_t j = i + 1; j < node.vars.size(); ++j)
                        add_linear({{1, node.vars[i]}, {-1, node.vars[j]}}, RelOp::Ne, 0, guards, origin, deps);
            }
            else if constexpr (std::is_same_v<T, HalfReified>) {
                auto inner = guards;
                inner.push_back(node.guard);
                add_linear(node.then.terms, node.then.op, node.then.rhs, inner, origin, deps);
            }
            else if constexpr (std::is_same_v<T, Conjunction>) {
                for (const auto& part : node.parts)
                    add_body_guarded(part, guards, origin, deps);
            }
            else {
                std::vector<Atomic> clause;
                for (const auto& part : node.parts) {
                    if (const auto* a = std::get_if<Atomic>(&part.node))
                        clause.push_back(*a);
                    else if (const auto* c = std::get_if<Clause>(&part.node))
                        clause.insert(clause.end(), c->atoms.begin(), c->atoms.end());
                    else {
                        VarId selector = add_var(Domain(0, 1));
                        Atomic on{selector, RelOp::Ge, 1};
                        add_body_guarded(part, {on}, origin, deps);
                        clause.push_back(on);
                    }
                }
                add_clause(with_negated_guards(std::move(clause)), origin, deps);
            }
        },
        body.node);
}

bool Engine::in_domain(const VarState& s, Value v) const
{
    return v >= s.lb && v <= s.ub && !s.removed[static_cast<std::size_t>(v - s.lb0)];
}

Engine::Truth Engine::status(const Atomic& a) const
{
    const VarState& s = vars_[a.var.index];
    switch (a.op) {
    case RelOp::Le:
        if (s.ub <= a.value)
            return Truth::True;
        return s.lb > a.value ? Truth::False : Truth::Unknown;
    case RelOp::Ge:
        if (s.lb >= a.value)
            return Truth::True;
        return s.ub < a.value ? Truth::False : Truth::Unknown;
    case RelOp::Eq:
        if (!in_domain(s, a.value))
            return Truth::False;
        return s.lb == s.ub ? Truth::True : Truth::Unknown;
    case RelOp::Ne:
        if (!in_domain(s, a.value))
            return Truth::True;
        return s.lb == s.ub ? Truth::False : Truth::Unknown;
    }
    return Truth::Unknown;
}

Atomic Engine::normalize(const Atomic& a) const
{
    const VarState& s = vars_[a.var.index];
    if (s.lb0 == s.ub0)
        return a;
    if (a.op == RelOp::Ne) {
        if (a.value == s.lb0)
            return {a.var, RelOp::Ge, s.lb0 + 1};
        if (a.value == s.ub0)
            return {a.var, RelOp::Le, s.ub0 - 1};
    }
    if (a.op == RelOp::Eq) {
        if (a.value == s.lb0)
            return {a.var, RelOp::Le, s.lb0};
        if (a.value == s.ub0)
            return {a.var, RelOp::Ge, s.ub0};
    }
    return a;
}

void Engine::merge_reason_deps(ReasonKind kind, std::uint32_t cref, DepSet& into) const
{
    if (kind == ReasonKind::Constraint || kind == ReasonKind::Learned)
        into.merge(constraints_[cref].deps);
}

std::uint32_t Engine::push_entry(const Atomic& a, ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises)
{
    auto idx = static_cast<std::uint32_t>(trail_.size());
    const VarState& s = vars_[a.var.index];
    Entry e;
    e.atom = a;
    e.level = level();
    e.kind = kind;
    e.cref = cref;
    e.premises = std::move(premises);
    e.old_lb = s.lb;
    e.old_ub = s.ub;
    if (options_.track_deps && e.level == 0) {
        merge_reason_deps(kind, cref, e.deps);
        std::vector<std::uint32_t> sources;
        for (const auto& p : e.premises)
            entries_for(p, sources);
        for (auto t : sources)
            e.deps.merge(trail_[t].deps);
    }
    trail_.push_back(std::move(e));
    return idx;
}

bool Engine::post(Atomic a, ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises)
{
    a = normalize(a);
    switch (status(a)) {
    case Truth::True: return true;
    case Truth::False: conflict_ = {kind, cref, std::move(premises), a}; return false;
    case Truth::Unknown: break;
    }
    VarState& s = vars_[a.var.index];
    std::uint32_t idx = push_entry(a, kind, cref, std::move(premises));
    switch (a.op) {
    case RelOp::Le:
        s.ub = a.value;
        s.ub_entries.push_back(idx);
        break;
    case RelOp::Ge:
        s.lb = a.value;
        s.lb_entries.push_back(idx);
        break;
    case RelOp::Eq:
        s.lb = s.ub = a.value;
        s.lb_entries.push_back(idx);
        s.ub_entries.push_back(idx);
        break;
    case RelOp::Ne: {
        auto offset = static_cast<std::size_t>(a.value - s.lb0);
        s.removed[offset] = 1;
        s.hole_entry[offset] = idx;
        trail_[idx].hole = true;
        break;
    }
    }
    trail_[idx].new_lb = s.lb;
    trail_[idx].new_ub = s.ub;
    if (options_.log_all && options_.sink && kind == ReasonKind::Constraint)
        inference_step(idx);
    fix_lower(a.var);
    fix_upper(a.var);
    changed(a.var);
    return true;
}

bool Engine::fail(ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises)
{
    conflict_ = {kind, cref, std::move(premises), std::nullopt};
    return false;
}

void Engine::fix_lower(VarId v)
{
    VarState& s = vars_[v.index];
    if (!s.removed[static_cast<std::size_t>(s.lb - s.lb0)])
        return;
    std::vector<Atomic> premises{{v, RelOp::Ge, s.lb}};
    Value l = s.lb;
    while (s.removed[static_cast<std::size_t>(l - s.lb0)])
        premises.push_back({v, RelOp::Ne, l++});
    std::uint32_t idx = push_entry({v, RelOp::Ge, l}, ReasonKind::Domain, 0, std::move(premises));
    s.lb = l;
    s.lb_entries.push_back(idx);
    trail_[idx].new_lb = s.lb;
    trail_[idx].new_ub = s.ub;
}

void Engine::fix_upper(VarId v)
{
    VarState& s = vars_[v.index];
    if (!s.removed[static_cast<std::size_t>(s.ub - s.lb0)])
        return;
    std::vector<Atomic> premises{{v, RelOp::Le, s.ub}};
    Value u = s.ub;
    while (s.removed[static_cast<std::size_t>(u - s.lb0)])
        premises.push_back({v, RelOp::Ne, u--});
    std::uint32_t idx = push_entry({v, RelOp::Le, u}, ReasonKind::Domain, 0, std::move(premises));
    s.ub = u;
    s.ub_entries.push_back(idx);
    trail_[idx].new_lb = s.lb;
    trail_[idx].new_ub = s.ub;
}

void Engine::changed(VarId v)
{
    for (auto w : vars_[v.index].watchers)
        if (!in_queue_[w]) {
            in_queue_[w] = 1;
            queue_.push_back(w);
        }
}

bool Engine::propagate()
{
    while (!queue_.empty()) {
        std::uint32_t c = queue_.front();
        queue_.pop_front();
        in_queue_[c] = 0;
        if (!propagate_constraint(c)) {
            for (auto q : queue_)
                in_queue_[q] = 0;
            queue_.clear();
            return false;
        }
    }
    return true;
}

bool Engine::propagate_constraint(std::uint32_t c)
{
    switch (constraints_[c].kind) {
    case EngineConstraint::Kind::Clause: return propagate_clause(c);
    case EngineConstraint::Kind::LinearLe: return propagate_linear_le(c);
    case EngineConstraint::Kind::LinearNe: return propagate_linear_ne(c);
    case EngineConstraint::Kind::AllDifferent: return propagate_all_different(c);
    }
    return true;
}

bool Engine::propagate_clause(std::uint32_t c)
{
    const auto& con = constraints_[c];
    ReasonKind kind = con.learned ? ReasonKind::Learned : ReasonKind::Constraint;
    std::size_t unknown = con.atoms.size();
    std::size_t unknown_count = 0;
    for (std::size_t i = 0; i < con.atoms.size(); ++i) {
        switch (status(con.atoms[i])) {
        case Truth::True: return true;
        case Truth::Unknown:
            ++unknown_count;
            unknown = i;
            break;
        case Truth::False: break;
        }
        if (unknown_count > 1)
            return true;
    }
    std::vector<Atomic> premises;
    for (std::size_t i = 0; i < con.atoms.size(); ++i)
        if (i != unknown)
            premises.push_back(negate(con.atoms[i]));
    if (unknown_count == 0)
        return fail(kind, c, std::move(premises));
    return post(con.atoms[unknown], kind, c, std::move(premises));
}

bool Engine::propagate_linear_le(std::uint32_t c)
{
    const auto& con = constraints_[c];
    std::size_t open_guard = con.atoms.size();
    for (std::size_t i = 0; i < con.atoms.size(); ++i) {
        Truth t = status(con.atoms[i]);
        if (t == Truth::False)
            return true;
        if (t == Truth::Unknown) {
            if (open_guard != con.atoms.size())
                return true;
            open_guard = i;
        }
    }
    std::vector<Atomic> bounds;
    bounds.reserve(con.terms.size());
    Value min_activity = 0;
    for (const auto& t : con.terms) {
        const VarState& s = vars_[t.var.index];
        if (t.coeff > 0) {
            min_activity += t.coeff * s.lb;
            bounds.push_back({t.var, RelOp::Ge, s.lb});
        }
        else {
            min_activity += t.coeff * s.ub;
            bounds.push_back({t.var, RelOp::Le, s.ub});
        }
    }
    auto guard_premises = [&](std::size_t skip) {
        std::vector<Atomic> out;
        for (std::size_t i = 0; i < con.atoms.size(); ++i)
            if (i != skip)
                out.push_back(con.atoms[i]);
        return out;
    };
    if (open_guard != con.atoms.size()) {
        if (min_activity <= con.rhs)
            return true;
        auto premises = guard_premises(open_guard);
        premises.insert(premises.end(), bounds.begin(), bounds.end());
        return post(negate(con.atoms[open_guard]), ReasonKind::Constraint, c, std::move(premises));
    }
    if (min_activity > con.rhs) {
        auto premises = guard_premises(con.atoms.size());
        premises.insert(premises.end(), bounds.begin(), bounds.end());
        return fail(ReasonKind::Constraint, c, std::move(premises));
    }
    for (std::size_t j = 0; j < con.terms.size(); ++j) {
        const Term& t = con.terms[j];
        const VarState& s = vars_[t.var.index];
        Value own_min = t.coeff > 0 ? t.coeff * bounds[j].value : t.coeff * bounds[j].value;
        Value slack = con.rhs - (min_activity - own_min);
        std::optional<Atomic> implied;
        if (t.coeff > 0) {
            Value nb = floor_div(slack, t.coeff);
            if (nb < s.ub)
                implied = Atomic{t.var, RelOp::Le, nb};
        }
        else {
            Value nb = ceil_div(slack, t.coeff);
            if (nb > s.lb)
                implied = Atomic{t.var, RelOp::Ge, nb};
        }
        if (!implied)
            continue;
        auto premises = guard_premises(con.atoms.size());
        for (std::size_t i = 0; i < bounds.size(); ++i)
            if (i != j)
                premises.push_back(bounds[i]);
        if (!post(*implied, ReasonKind::Constraint, c, std::move(premises)))
            return false;
    }
    return true;
}

bool Engine::propagate_linear_ne(std::uint32_t c)
{
    const auto& con = constraints_[c];
    std::size_t open_guard = con.atoms.size();
    for (std::size_t i = 0; i < con.atoms.size(); ++i) {
        Truth t = status(con.atoms[i]);
        if (t == Truth::False)
            return true;
        if (t == Truth::Unknown) {
            if (open_guard != con.atoms.size())
                return true;
            open_guard = i;
        }
    }
    std::size_t unfixed = con.terms.size();
    Value fixed_sum = 0;
    std::vector<Atomic> premises;
    for (std::size_t i = 0; i < con.atoms.size(); ++i)
        if (i != open_guard)
            premises.push_back(con.atoms[i]);
    for (std::size_t j = 0; j < con.terms.size(); ++j) {
        const Term& t = con.terms[j];
        if (fixed(t.var)) {
            Value v = vars_[t.var.index].lb;
            fixed_sum += t.coeff * v;
            premises.push_back({t.var, RelOp::Eq, v});
        }
        else if (unfixed != con.terms.size())
            return true;
        else
            unfixed = j;
    }
    if (unfixed == con.terms.size()) {
        if (fixed_sum != con.rhs)
            return true;
        if (open_guard != con.atoms.size())
            return post(negate(con.atoms[open_guard]), ReasonKind::Constraint, c, std::move(premises));
        return fail(ReasonKind::Constraint, c, std::move(premises));
    }
    if (open_guard != con.atoms.size())
        return true;
    const Term& t = con.terms[unfixed];
    Value rest = con.rhs - fixed_sum;
    if (rest % t.coeff != 0)
        return true;
    return post({t.var, RelOp::Ne, rest / t.coeff}, ReasonKind::Constraint, c, std::move(premises));
}

bool Engine::propagate_all_different(std::uint32_t c)
{
    const auto& vars = constraints_[c].vars;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!fixed(vars[i]))
            continue;
        Value v = vars_[vars[i].index].lb;
        Atomic is_v{vars[i], RelOp::Eq, v};
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (j == i)
                continue;
            Atomic other{vars[j], RelOp::Ne, v};
            Truth t = status(other);
            if (t == Truth::True)
                continue;
            if (t == Truth::False)
                return fail(ReasonKind::Constraint, c, {is_v, {vars[j], RelOp::Eq, v}});
            if (!post(other, ReasonKind::Constraint, c, {is_v}))
                return false;
        }
    }
    return true;
}

void Engine::entries_for(const Atomic& a, std::vector<std::uint32_t>& out) const
{
    const VarState& s = vars_[a.var.index];
    constexpr auto none = std::numeric_limits<std::uint32_t>::max();
    auto first_lb = [&](Value k) -> std::uint32_t {
        auto it = std::lower_bound(s.lb_entries.begin(), s.lb_entries.end(), k,
            [&](std::uint32_t idx, Value key) { return trail_[idx].new_lb < key; });
        return it == s.lb_entries.end() ? none : *it;
    };
    auto first_ub = [&](Value k) -> std::uint32_t {
        auto it = std::lower_bound(s.ub_entries.begin(), s.ub_entries.end(), k,
            [&](std::uint32_t idx, Value key) { return trail_[idx].new_ub > key; });
        return it == s.ub_entries.end() ? none : *it;
    };
    auto require = [&](std::uint32_t idx) {
        if (idx == none)
            throw std::logic_error("premise is not entailed by the trail");
        out.push_back(idx);
    };
    switch (a.op) {
    case RelOp::Ge:
        if (a.value > s.lb0)
            require(first_lb(a.value));
        return;
    case RelOp::Le:
        if (a.value < s.ub0)
            require(first_ub(a.value));
        return;
    case RelOp::Eq:
        entries_for({a.var, RelOp::Ge, a.value}, out);
        entries_for({a.var, RelOp::Le, a.value}, out);
        return;
    case RelOp::Ne: {
        if (a.value < s.lb0 || a.value > s.ub0)
            return;
        auto offset = static_cast<std::size_t>(a.value - s.lb0);
        if (s.removed[offset] && s.hole_entry[offset] < 0)
            return;
        std::uint32_t best = none;
        if (s.hole_entry[offset] >= 0)
            best = static_cast<std::uint32_t>(s.hole_entry[offset]);
        best = std::min({best, first_lb(a.value + 1), first_ub(a.value - 1)});
        require(best);
        return;
    }
    }
}

std::vector<Atomic> Engine::inference_clause(const Entry& e) const
{
    std::vector<Atomic> clause{e.atom};
    for (const auto& p : e.premises)
        clause.push_back(negate(p));
    return clause;
}

std::size_t Engine::inference_step(std::uint32_t entry)
{
    Entry& e = trail_[entry];
    if (!e.step)
        e.step = options_.sink->inference(inference_clause(e), constraints_[e.cref].origin);
    return *e.step;
}

std::size_t Engine::unit_step(std::uint32_t entry)
{
    if (trail_[entry].unit)
        return *trail_[entry].unit;
    std::vector<std::uint32_t> sources;
    for (const auto& p : trail_[entry].premises)
        entries_for(p, sources);
    std::vector<std::size_t> refs;
    for (auto t : sources)
        refs.push_back(unit_step(t));
    const Entry& e = trail_[entry];
    std::size_t unit = 0;
    switch (e.kind) {
    case ReasonKind::Constraint: {
        std::size_t step = inference_step(entry);
        if (refs.empty() && e.premises.empty())
            unit = step;
        else {
            refs.push_back(step);
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            unit = options_.sink->nogood(std::span(&e.atom, 1), refs);
        }
        break;
    }
    case ReasonKind::Learned: {
        std::size_t step = constraints_[e.cref].proof_step;
        if (refs.empty() && e.premises.empty())
            unit = step;
        else {
            refs.push_back(step);
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            unit = options_.sink->nogood(std::span(&e.atom, 1), refs);
        }
        break;
    }
    case ReasonKind::Domain:
        std::sort(refs.begin(), refs.end());
        refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
        unit = options_.sink->nogood(std::span(&e.atom, 1), refs);
        break;
    case ReasonKind::Decision: throw std::logic_error("decision at the root level");
    }
    trail_[entry].unit = unit;
    return unit;
}

void Engine::backtrack(std::uint32_t target)
{
    if (level() <= target)
        return;
    std::size_t limit = trail_lim_[target];
    while (trail_.size() > limit) {
        auto idx = static_cast<std::uint32_t>(trail_.size() - 1);
        const Entry& e = trail_.back();
        VarState& s = vars_[e.atom.var.index];
        if (s.lb == s.ub)
            s.phase = s.lb;
        s.lb = e.old_lb;
        s.ub = e.old_ub;
        if (e.hole) {
            auto offset = static_cast<std::size_t>(e.atom.value - s.lb0);
            s.removed[offset] = 0;
            s.hole_entry[offset] = -1;
        }
        if (!s.lb_entries.empty() && s.lb_entries.back() == idx)
            s.lb_entries.pop_back();
        if (!s.ub_entries.empty() && s.ub_entries.back() == idx)
            s.ub_entries.pop_back();
        trail_.pop_back();
    }
    trail_lim_.resize(target);
    for (auto q : queue_)
        in_queue_[q] = 0;
    queue_.clear();
}

bool Engine::handle_conflict()
{
    Conflict cf = std::move(conflict_);
    std::vector<Atomic> conflict_atoms = cf.premises;
    if (cf.attempted)
        conflict_atoms.push_back(negate(*cf.attempted));
    std::vector<std::uint32_t> sources;
    for (const auto& a : conflict_atoms)
        entries_for(a, sources);
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

    std::uint32_t conflict_level = 0;
    for (auto e : sources)
        conflict_level = std::max(conflict_level, trail_[e].level);

    ProofSink* sink = options_.sink;
    auto conflict_ref = [&]() -> std::size_t {
        if (cf.kind == ReasonKind::Learned)
            return constraints_[cf.cref].proof_step;
        std::vector<Atomic> clause;
        if (cf.attempted)
            clause.push_back(*cf.attempted);
        for (const auto& p : cf.premises)
            clause.push_back(negate(p));
        return sink->inference(clause, constraints_[cf.cref].origin);
    };

    DepSet deps;
    merge_reason_deps(cf.kind, cf.cref, deps);

    if (conflict_level == 0) {
        std::vector<std::size_t> refs;
        for (auto e : sources) {
            deps.merge(trail_[e].deps);
            if (sink)
                refs.push_back(unit_step(e));
        }
        final_deps_ = std::move(deps);
        if (sink) {
            refs.push_back(conflict_ref());
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            sink->conclude(refs);
        }
        return false;
    }

    backtrack(conflict_level);
    std::vector<std::size_t> refs;
    if (sink)
        refs.push_back(conflict_ref());

    std::vector<std::uint8_t> seen(trail_.size(), 0);
    std::size_t pending = 0;
    std::vector<std::uint32_t> out, roots;
    auto mark = [&](std::uint32_t t) {
        if (seen[t])
            return;
        seen[t] = 1;
        std::uint32_t lvl = trail_[t].level;
        if (lvl == 0)
            roots.push_back(t);
        else if (lvl == conflict_level)
            ++pending;
        else
            out.push_back(t);
    };
    for (auto e : sources)
        mark(e);

    std::size_t idx = trail_.size();
    std::uint32_t uip = 0;
    for (;;) {
        do
            --idx;
        while (!seen[idx] || trail_[idx].level != conflict_level);
        if (--pending == 0) {
            uip = static_cast<std::uint32_t>(idx);
            break;
        }
        const Entry& e = trail_[idx];
        switch (e.kind) {
        case ReasonKind::Constraint:
            if (sink)
                refs.push_back(inference_step(static_cast<std::uint32_t>(idx)));
            break;
        case ReasonKind::Learned:
            if (sink)
                refs.push_back(constraints_[e.cref].proof_step);
            break;
        case ReasonKind::Domain: break;
        case ReasonKind::Decision: throw std::logic_error("resolved past the decision of the conflict level");
        }
        merge_reason_deps(e.kind, e.cref, deps);
        std::vector<std::uint32_t> premise_sources;
        for (const auto& p : trail_[idx].premises)
            entries_for(p, premise_sources);
        for (auto t : premise_sources)
            mark(t);
    }

    std::vector<Atomic> clause{negate(trail_[uip].atom)};
    std::vector<Atomic> premises;
    std::uint32_t back = 0;
    for (auto o : out) {
        clause.push_back(negate(trail_[o].atom));
        premises.push_back(trail_[o].atom);
        back = std::max(back, trail_[o].level);
    }
    for (auto r : roots) {
        deps.merge(trail_[r].deps);
        if (sink)
            refs.push_back(unit_step(r));
    }

    for (const auto& a : clause)
        bump(a.var);
    bump_ *= 1.0 / 0.95;

    EngineConstraint learned;
    learned.kind = EngineConstraint::Kind::Clause;
    learned.learned = true;
    learned.atoms = clause;
    learned.deps = std::move(deps);
    if (sink) {
        std::sort(refs.begin(), refs.end());
        refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
        learned.proof_step = sink->nogood(clause, refs);
    }
    ++conflicts_;
    backtrack(back);
    std::uint32_t ci = push_constraint(std::move(learned));
    if (!post(clause.front(), ReasonKind::Learned, ci, std::move(premises)))
        return handle_conflict();
    return true;
}

void Engine::bump(VarId v)
{
    vars_[v.index].activity += bump_;
    if (vars_[v.index].activity > 1e100) {
        for (auto& s : vars_)
            s.activity *= 1e-100;
        bump_ *= 1e-100;
    }
}

std::optional<Atomic> Engine::next_decision() const
{
    std::optional<std::uint32_t> best;
    for (std::uint32_t v = 0; v < vars_.size(); ++v)
        if (vars_[v].lb != vars_[v].ub && (!best || vars_[v].activity > vars_[*best].activity))
            best = v;
    if (!best)
        return std::nullopt;
    const VarState& s = vars_[*best];
    Value value = s.phase && in_domain(s, *s.phase) ? *s.phase : s.lb;
    return Atomic{VarId{*best}, RelOp::Eq, value};
}

SearchStatus Engine::solve()
{
    if (trivially_unsat_) {
        if (options_.sink)
            options_.sink->conclude({});
        return SearchStatus::Unsat;
    }
    for (std::uint32_t c = 0; c < constraints_.size(); ++c)
        if (!in_queue_[c]) {
            in_queue_[c] = 1;
            queue_.push_back(c);
        }
    for (;;) {
        if (!propagate()) {
            if (!handle_conflict())
                return SearchStatus::Unsat;
            if (conflicts_ >= options_.conflict_budget)
                return SearchStatus::BudgetExceeded;
            continue;
        }
        auto decision = next_decision();
        if (!decision)
            return SearchStatus::Sat;
        trail_lim_.push_back(trail_.size());
        post(*decision, ReasonKind::Decision, 0, {});
    }
}

Assignment Engine::assignment() const
{
    Assignment a(vars_.size());
    for (std::uint32_t v = 0; v < vars_.size(); ++v)
        a.set(VarId{v}, vars_[v].lb);
    return a;
}

} // namespace p2s::detail
