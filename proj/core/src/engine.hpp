#pragma once

// Propagation + conflict-driven nogood learning over atomic constraints.
// Shared by the satisfiability oracle and the proof-logging prover.

#include "p2s/model.hpp"

#include <cstdint>
#include <deque>
#include <optional>

namespace p2s::detail {

/// Growable bitset of assumption indices.
class DepSet {
public:
    void set(std::size_t i);
    void merge(const DepSet& other);
    [[nodiscard]] std::vector<std::size_t> members() const;

private:
    std::vector<std::uint64_t> words_;
};

enum class ReasonKind : std::uint8_t { Decision, Constraint, Learned, Domain };

struct EngineConstraint {
    enum class Kind : std::uint8_t { Clause, LinearLe, LinearNe, AllDifferent };

    Kind kind = Kind::Clause;
    std::vector<Atomic> atoms; ///< clause atoms, or guards of a linear constraint
    std::vector<Term> terms;
    std::vector<VarId> vars;
    Value rhs = 0;
    std::uint32_t origin = 0;
    bool learned = false;
    std::size_t proof_step = 0;
    DepSet deps;
};

/// Receives proof lines; returns 1-based step ids.
class ProofSink {
public:
    virtual ~ProofSink() = default;
    virtual std::size_t inference(std::span<const Atomic> clause, std::uint32_t origin) = 0;
    virtual std::size_t nogood(std::span<const Atomic> clause, std::span<const std::size_t> steps) = 0;
    virtual void conclude(std::span<const std::size_t> steps) = 0;
};

struct EngineOptions {
    std::uint64_t conflict_budget = 1'000'000;
    ProofSink* sink = nullptr;
    bool log_all = false;
    bool track_deps = false;
};

enum class SearchStatus : std::uint8_t { Sat, Unsat, BudgetExceeded };

class Engine {
public:
    Engine(std::span<const Domain> domains, EngineOptions options);

    VarId add_var(const Domain& domain);
    void add_body(const Body& body, std::uint32_t origin, const DepSet* deps = nullptr);
    void add_clause(std::vector<Atomic> atoms, std::uint32_t origin, const DepSet* deps);
    void add_linear(std::vector<Term> terms, RelOp op, Value rhs, std::vector<Atomic> guards, std::uint32_t origin,
        const DepSet* deps);
    void add_all_different(std::vector<VarId> vars, std::uint32_t origin, const DepSet* deps);

    SearchStatus solve();

    /// Values of all variables after a Sat result.
    [[nodiscard]] Assignment assignment() const;
    /// Assumptions the final refutation depends on (with track_deps).
    [[nodiscard]] const DepSet& refutation_deps() const { return final_deps_; }
    [[nodiscard]] std::uint64_t conflicts() const { return conflicts_; }
    [[nodiscard]] std::size_t var_count() const { return vars_.size(); }

private:
    enum class Truth : std::uint8_t { True, False, Unknown };

    struct VarState {
        Value lb0 = 0, ub0 = -1;
        Value lb = 0, ub = -1;
        std::vector<std::uint8_t> removed;
        std::vector<std::int64_t> hole_entry;
        std::vector<std::uint32_t> lb_entries, ub_entries;
        std::vector<std::uint32_t> watchers;
        double activity = 0;
        std::optional<Value> phase;
    };

    struct Entry {
        Atomic atom;
        std::uint32_t level = 0;
        ReasonKind kind = ReasonKind::Decision;
        std::uint32_t cref = 0;
        std::vector<Atomic> premises;
        Value old_lb = 0, old_ub = 0, new_lb = 0, new_ub = 0;
        bool hole = false;
        std::optional<std::size_t> step;
        std::optional<std::size_t> unit;
        DepSet deps;
    };

    struct Conflict {
        ReasonKind kind = ReasonKind::Constraint;
        std::uint32_t cref = 0;
        std::vector<Atomic> premises;
        std::optional<Atomic> attempted;
    };

    void add_body_guarded(const Body& body, const std::vector<Atomic>& guards, std::uint32_t origin, const DepSet* deps);
    std::uint32_t push_constraint(EngineConstraint c);

    [[nodiscard]] bool in_domain(const VarState& s, Value v) const;
    [[nodiscard]] Truth status(const Atomic& a) const;
    [[nodiscard]] bool fixed(VarId v) const { return vars_[v.index].lb == vars_[v.index].ub; }
    [[nodiscard]] Atomic normalize(const Atomic& a) const;
    [[nodiscard]] std::uint32_t level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

    bool post(Atomic a, ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises);
    bool fail(ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises);
    std::uint32_t push_entry(const Atomic& a, ReasonKind kind, std::uint32_t cref, std::vector<Atomic> premises);
    void fix_lower(VarId v);
    void fix_upper(VarId v);
    void changed(VarId v);

    bool propagate();
    bool propagate_constraint(std::uint32_t c);
    bool propagate_clause(std::uint32_t c);
    bool propagate_linear_le(std::uint32_t c);
    bool propagate_linear_ne(std::uint32_t c);
    bool propagate_all_different(std::uint32_t c);

    /// Trail entries whose atoms jointly entail `a`; empty when the initial domain does.
    void entries_for(const Atomic& a, std::vector<std::uint32_t>& out) const;

    bool handle_conflict();
    void bump(VarId v);
    [[nodiscard]] std::optional<Atomic> next_decision() const;
    void backtrack(std::uint32_t target);
    std::size_t inference_step(std::uint32_t entry);
    std::size_t unit_step(std::uint32_t entry);
    std::vector<Atomic> inference_clause(const Entry& e) const;
    void merge_reason_deps(ReasonKind kind, std::uint32_t cref, DepSet& into) const;

    EngineOptions options_;
    std::vector<VarState> vars_;
    std::vector<EngineConstraint> constraints_;
    std::vector<Entry> trail_;
    std::vector<std::size_t> trail_lim_;
    std::deque<std::uint32_t> queue_;
    std::vector<std::uint8_t> in_queue_;
    Conflict conflict_;
    DepSet final_deps_;
    std::uint64_t conflicts_ = 0;
    double bump_ = 1;
    bool trivially_unsat_ = false;
};

} // namespace p2s::detail
