#pragma once

#include "p2s/model.hpp"

#include <cstdint>
#include <variant>

namespace p2s {

inline constexpr std::uint64_t default_oracle_budget = 1'000'000;

/// Conflict budget, overridden by the P2S_BUDGET environment variable when set.
std::uint64_t budget_from_env(std::uint64_t fallback = default_oracle_budget);

struct Sat {
    Assignment assignment;
};

struct Unsat {
    /// Indices into the assumption list; hard plus core is unsatisfiable.
    std::vector<std::size_t> core;
};

struct BudgetExceeded {};

using OracleResult = std::variant<Sat, Unsat, BudgetExceeded>;

struct OracleProblem {
    std::vector<Domain> domains;
    std::vector<Body> hard;
    std::vector<Body> assumptions;
    std::uint64_t budget = default_oracle_budget;
};

OracleResult solve(const OracleProblem& problem);

/// Satisfiability oracle over a fixed variable table. Counts calls.
class Oracle {
public:
    explicit Oracle(std::vector<Domain> domains, std::uint64_t budget = budget_from_env());

    OracleResult solve(std::span<const Body* const> hard, std::span<const Body* const> assumptions);
    /// As above with a tighter conflict budget for this call only.
    OracleResult solve(
        std::span<const Body* const> hard, std::span<const Body* const> assumptions, std::uint64_t call_budget);
    OracleResult solve(std::span<const Body> hard, std::span<const Body> assumptions = {});

    [[nodiscard]] std::uint64_t calls() const { return calls_; }
    [[nodiscard]] std::uint64_t budget() const { return budget_; }
    [[nodiscard]] const std::vector<Domain>& domains() const { return domains_; }

private:
    std::vector<Domain> domains_;
    std::uint64_t budget_;
    std::uint64_t calls_ = 0;
};

std::vector<Domain> domains_of(std::span<const VarDecl> vars);

/// Body that holds exactly when `body` does not.
Body negate(const Body& body);

/// Body that holds exactly when at least one member of `bodies` is violated.
/// Empty input yields false.
Body negate_conjunction(std::span<const Body> bodies);

} // namespace p2s
