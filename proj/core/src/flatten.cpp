#include "p2s/flatten.hpp"

#include <algorithm>
#include <set>

namespace p2s {

std::optional<VarId> SolverModel::find_var(std::string_view name) const
{
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name)
            return VarId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
}

std::optional<std::size_t> SolverModel::find_constraint(std::string_view id) const
{
    for (std::size_t i = 0; i < constraints.size(); ++i)
        if (constraints[i].id == id)
            return i;
    return std::nullopt;
}

bool is_solver_level(const Body& body)
{
    return !std::holds_alternative<Disjunction>(body.node) && !std::holds_alternative<Conjunction>(body.node);
}

namespace {

    Linear pairwise_ne(VarId x, VarId y) { return Linear{{{1, x}, {-1, y}}, RelOp::Ne, 0}; }

    class Flattener {
    public:
        Flattener(const UserModel& model, const FlattenOptions& options) : options_(options)
        {
            out_.source = model;
            out_.vars = model.vars;
            for (const auto& v : model.vars)
                names_.insert(v.name);
        }

        SolverModel run()
        {
            const auto& constraints = out_.source.constraints;
            for (std::size_t i = 0; i < constraints.size(); ++i) {
                pending_.clear();
                top(constraints[i].body);
                const auto& id = constraints[i].id;
                for (std::size_t k = 0; k < pending_.size(); ++k) {
                    std::string sid = pending_.size() == 1 ? id : id + "." + std::to_string(k + 1);
                    out_.constraints.push_back({std::move(sid), std::move(pending_[k])});
                    out_.provenance.solver_to_user.push_back(i);
                }
            }
            return std::move(out_);
        }

    private:
        VarId fresh_aux()
        {
            std::string name;
            do
                name = "x" + std::to_string(++aux_counter_);
            while (names_.contains(name));
            names_.insert(name);
            VarId id{static_cast<std::uint32_t>(out_.vars.size())};
            out_.vars.push_back({name, Domain(0, 1)});
            out_.aux_vars.push_back(id);
            return id;
        }

        void emit(Body body) { pending_.push_back(std::move(body)); }

        void top(const Body& body)
        {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, AllDifferent>) {
                        if (!options_.decompose_alldiff) {
                            emit(node);
                            return;
                        }
                        for (std::size_t i = 0; i < node.vars.size(); ++i)
                            for (std::size_t j = i + 1; j < node.vars.size(); ++j)
                                emit(pairwise_ne(node.vars[i], node.vars[j]));
                    }
                    else if constexpr (std::is_same_v<T, Conjunction>) {
                        for (const auto& part : node.parts)
                            top(part);
                    }
                    else if constexpr (std::is_same_v<T, Disjunction>)
                        disjunction(node, std::nullopt);
                    else
                        emit(node);
                },
                body.node);
        }

        /// guard => body
        void guarded(const Body& body, const Atomic& guard)
        {
            std::visit(
                [&](const auto& node) {
                    using T = std::decay_t<decltype(node)>;
                    if constexpr (std::is_same_v<T, Atomic>)
                        emit(Clause{{negate(guard), node}});
                    else if constexpr (std::is_same_v<T, Clause>) {
                        Clause c{{negate(guard)}};
                        c.atoms.insert(c.atoms.end(), node.atoms.begin(), node.atoms.end());
                        emit(std::move(c));
                    }
                    else if constexpr (std::is_same_v<T, Linear>)
                        emit(HalfReified{guard, node});
                    else if constexpr (std::is_same_v<T, AllDifferent>) {
                        for (std::size_t i = 0; i < node.vars.size(); ++i)
                            for (std::size_t j = i + 1; j < node.vars.size(); ++j)
                                emit(HalfReified{guard, pairwise_ne(node.vars[i], node.vars[j])});
                    }
                    else if constexpr (std::is_same_v<T, HalfReified>) {
                        VarId s = fresh_aux();
                        emit(Clause{{negate(guard), negate(node.guard), Atomic{s, RelOp::Eq, 1}}});
                        emit(HalfReified{{s, RelOp::Eq, 1}, node.then});
                    }
                    else if constexpr (std::is_same_v<T, Conjunction>) {
                        for (const auto& part : node.parts)
                            guarded(part, guard);
                    }
                    else
                        disjunction(node, guard);
                },
                body.node);
        }

        void disjunction(const Disjunction& d, const std::optional<Atomic>& guard)
        {
            Clause clause;
            if (guard)
                clause.atoms.push_back(negate(*guard));
            std::vector<const Body*> complex;
            for (const auto& part : d.parts) {
                if (const auto* a = std::get_if<Atomic>(&part.node))
                    clause.atoms.push_back(*a);
                else if (const auto* c = std::get_if<Clause>(&part.node))
                    clause.atoms.insert(clause.atoms.end(), c->atoms.begin(), c->atoms.end());
                else
                    complex.push_back(&part);
            }
            bool only_complex = clause.atoms.empty();
            if (complex.size() == 2 && only_complex && !options_.selector_disjunctions) {
                VarId x = fresh_aux();
                guarded(*complex[0], {x, RelOp::Eq, 1});
                guarded(*complex[1], {x, RelOp::Eq, 0});
                return;
            }
            for (const Body* part : complex) {
                VarId s = fresh_aux();
                guarded(*part, {s, RelOp::Eq, 1});
                clause.atoms.push_back({s, RelOp::Eq, 1});
            }
            if (clause.atoms.size() == 1 && !guard)
                emit(clause.atoms.front());
            else
                emit(std::move(clause));
        }

        FlattenOptions options_;
        SolverModel out_;
        std::set<std::string> names_;
        std::vector<Body> pending_;
        int aux_counter_ = 0;
    };

    std::uint64_t domain_product(std::span<const VarDecl> vars, std::uint64_t cap)
    {
        std::uint64_t product = 1;
        for (const auto& v : vars) {
            std::uint64_t size = v.domain.size();
            if (size == 0)
                return 0;
            if (product > cap / size)
                return cap + 1;
            product *= size;
        }
        return product;
    }

    /// Depth-first search over auxiliary values, checking each solver constraint as
    /// soon as its last auxiliary is assigned.
    class AuxSearch {
    public:
        explicit AuxSearch(const SolverModel& s) : s_(s)
        {
            std::size_t n_aux = s.aux_vars.size();
            check_at_.resize(n_aux + 1);
            for (std::size_t c = 0; c < s.constraints.size(); ++c) {
                std::size_t depth = 0;
                for (auto v : scope(s.constraints[c].body))
                    if (s.is_aux(v))
                        depth = std::max<std::size_t>(depth, v.index - s.source.vars.size() + 1);
                check_at_[depth].push_back(c);
            }
            for (const auto& a : s.aux_vars)
                aux_values_.push_back(s.vars[a.index].domain.values());
        }

        bool satisfiable(Assignment& a) { return search(a, 0); }

    private:
        bool search(Assignment& a, std::size_t depth)
        {
            for (auto c : check_at_[depth])
                if (!eval(s_.constraints[c].body, a))
                    return false;
            if (depth == s_.aux_vars.size())
                return true;
            VarId v = s_.aux_vars[depth];
            for (Value val : aux_values_[depth]) {
                a.set(v, val);
                if (search(a, depth + 1))
                    return true;
            }
            a.unset(v);
            return false;
        }

        const SolverModel& s_;
        std::vector<std::vector<std::size_t>> check_at_;
        std::vector<std::vector<Value>> aux_values_;
    };

} // namespace

SolverModel flatten(const UserModel& model, const FlattenOptions& options)
{
    return Flattener(model, options).run();
}

bool check_projection_equivalence(const UserModel& model, const SolverModel& solver, std::uint64_t cap)
{
    if (domain_product(model.vars, cap) > cap)
        throw CapExceeded("user assignment space exceeds " + std::to_string(cap));
    std::vector<std::vector<Value>> values;
    for (const auto& v : model.vars)
        values.push_back(v.domain.values());
    for (const auto& v : values)
        if (v.empty())
            return true;

    AuxSearch aux(solver);
    std::vector<std::size_t> odometer(values.size(), 0);
    Assignment a(solver.vars.size());
    for (;;) {
        for (std::size_t i = 0; i < values.size(); ++i)
            a.set(VarId{static_cast<std::uint32_t>(i)}, values[i][odometer[i]]);
        bool user_sat = std::all_of(model.constraints.begin(), model.constraints.end(),
            [&](const Constraint& c) { return eval(c.body, a); });
        if (user_sat != aux.satisfiable(a))
            return false;
        std::size_t i = 0;
        while (i < odometer.size() && ++odometer[i] == values[i].size())
            odometer[i++] = 0;
        if (i == odometer.size())
            return true;
    }
}

} // namespace p2s
