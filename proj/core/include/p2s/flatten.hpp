#pragma once

#include "p2s/model.hpp"

#include <cstdint>
#include <stdexcept>

namespace p2s {

/// Solver constraint index -> index of the user constraint it was produced from.
struct ProvenanceMap {
    std::vector<std::size_t> solver_to_user;

    [[nodiscard]] std::size_t user_of(std::size_t solver_index) const { return solver_to_user.at(solver_index); }
    [[nodiscard]] std::size_t size() const { return solver_to_user.size(); }
};

/// Solver-level model. User variables keep their indices; auxiliaries are appended.
struct SolverModel {
    UserModel source;
    std::vector<VarDecl> vars;
    std::vector<Constraint> constraints;
    std::vector<VarId> aux_vars;
    ProvenanceMap provenance;

    [[nodiscard]] bool is_aux(VarId v) const { return v.index >= source.vars.size(); }
    [[nodiscard]] std::optional<VarId> find_var(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> find_constraint(std::string_view id) const;
    [[nodiscard]] const Constraint& user_constraint_of(std::size_t solver_index) const
    {
        return source.constraints.at(provenance.user_of(solver_index));
    }
};

struct FlattenOptions {
    /// Replace each AllDifferent by pairwise `x - y != 0`.
    bool decompose_alldiff = false;
    /// Use one selector per disjunct plus a selector clause even for two-part disjunctions.
    bool selector_disjunctions = false;
};

SolverModel flatten(const UserModel& model, const FlattenOptions& options = {});

/// Every solver-level constraint in its own class of bodies the prover understands.
bool is_solver_level(const Body& body);

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Enumerates user assignments (at most `cap`) and compares solution sets projected
/// to the user variables; auxiliaries are searched exhaustively per user assignment.
bool check_projection_equivalence(const UserModel& model, const SolverModel& solver, std::uint64_t cap);

} // namespace p2s
