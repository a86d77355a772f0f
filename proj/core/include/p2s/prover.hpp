#pragma once

#include "p2s/flatten.hpp"
#include "p2s/oracle.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace p2s {

struct ProverOptions {
    /// Log every propagation as an inference step, not only those used in conflicts.
    bool log_all = false;
    std::uint64_t budget = budget_from_env();
};

struct ProverResult {
    enum class Status : std::uint8_t { Sat, Unsat, BudgetExceeded };

    Status status = Status::BudgetExceeded;
    /// Values of the model's variables (Sat only).
    std::optional<Assignment> assignment;
    /// DRCP text; a bare header unless the model is unsatisfiable.
    std::string proof;
    std::uint64_t conflicts = 0;
};

/// Propagation with 1UIP nogood learning, logging the refutation in the
/// proof grammar read by parse_drcp.
ProverResult solve_with_proof(const SolverModel& model, const ProverOptions& options = {});

} // namespace p2s
