#pragma once

#include "p2s/model.hpp"
#include "p2s/oracle.hpp"

#include <cstdint>
#include <stdexcept>

namespace p2s {

enum class MusMode : std::uint8_t { SubsetMinimal, SmallestWeighted };

struct SoftConstraint {
    Body body;
    std::uint64_t weight = 1;
};

struct MusQuery {
    std::vector<SoftConstraint> soft;
    std::vector<Body> hard;
    MusMode mode = MusMode::SubsetMinimal;
    /// Hitting-set loop gives up beyond this many correction sets.
    std::size_t max_correction_sets = 10'000;
};

class MusError : public std::runtime_error {
public:
    enum class Kind : std::uint8_t { SatInput, BudgetExceeded };

    MusError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Returns sorted indices into q.soft. SubsetMinimal deletes candidates in
/// reverse declaration order, shrinking to the oracle's core after each
/// unsatisfiable call. SmallestWeighted runs an implicit hitting-set loop.
std::vector<std::size_t> extract_mus(const MusQuery& q, Oracle& oracle);

/// Pointer form used by the pipeline; weights are ignored in SubsetMinimal mode.
std::vector<std::size_t> extract_mus(std::span<const Body* const> soft, std::span<const std::uint64_t> weights,
    std::span<const Body* const> hard, MusMode mode, Oracle& oracle, std::size_t max_correction_sets = 10'000);

/// M together with the hard constraints is unsatisfiable and every M minus one member is not.
bool verify_mus(std::span<const std::size_t> mus, const MusQuery& q, Oracle& oracle);

/// Minimum-cost hitting set by branch and bound; sets hold element indices below `weights.size()`.
/// Ties keep the first optimum found, so the result is deterministic.
std::vector<std::size_t> min_cost_hitting_set(
    std::span<const std::vector<std::size_t>> sets, std::span<const std::uint64_t> weights);

} // namespace p2s
