#pragma once

#include "p2s/flatten.hpp"
#include "p2s/mus.hpp"
#include "p2s/oracle.hpp"
#include "p2s/proof.hpp"

#include <functional>

namespace p2s {

enum class Minimization : std::uint8_t { None, Local, Global };

struct PipelineVariant {
    Minimization first = Minimization::None;
    Minimization second = Minimization::None;

    /// One of: trim, trim+minloc, trim+minglob, minloc, minglob, minloc+minloc, minglob+minloc.
    [[nodiscard]] std::string name() const;
    static std::optional<PipelineVariant> parse(std::string_view name);
    static std::span<const PipelineVariant> all();

    bool operator==(const PipelineVariant&) const = default;
};

/// Removes every step failing `keep`; later references to a removed step's
/// derivations are replaced by that step's reasons. Throws when the final step fails.
AbstractProof simplify(const AbstractProof& proof, const std::function<bool(const ProofStep&)>& keep);

/// Drops steps deriving constraints over auxiliary variables.
AbstractProof simplify_aux_vars(const AbstractProof& proof, const SolverModel& model);

/// Replaces solver-level input reasons by the user constraints they came from.
AbstractProof lift_to_user_level(const AbstractProof& proof, const SolverModel& model);

/// Keeps steps whose derived set mentions at most one variable and rewrites
/// unary clauses against the initial domain (x<=u, x>=l, x==v, x!=v when possible).
AbstractProof simplify_to_domain_reductions(const AbstractProof& proof, const SolverModel& model);

/// Rewrites a single-variable clause to the simplest equivalent atom over the initial domain.
Body normalize_unary(const Body& body, const SolverModel& model);

/// Back-to-front reason minimization. Local draws MUS candidates from the
/// step's own reasons (subset-minimal), Global from all inputs plus earlier
/// derivations (smallest, user constraints weighted above facts).
AbstractProof minimize_reasons(const AbstractProof& proof, Minimization mode, const SolverModel& model, Oracle& oracle);

struct ExplanationStep {
    std::vector<Body> facts;
    std::vector<std::size_t> user_reasons;  ///< indices into the user model's constraints
    std::vector<ReasonRef> fact_reasons;    ///< Step refs into this sequence

    bool operator==(const ExplanationStep&) const = default;
};

struct ExplanationMetrics {
    std::size_t sequence_length = 0;
    /// Largest number of user constraints in one step; derived facts are not counted.
    std::size_t max_stepsize = 0;

    bool operator==(const ExplanationMetrics&) const = default;
};

struct ExplanationSequence {
    std::vector<ExplanationStep> steps;
    ExplanationMetrics metrics;

    /// User-level abstract proof with the same steps, for validity checks.
    [[nodiscard]] AbstractProof to_proof() const;

    bool operator==(const ExplanationSequence&) const = default;
};

ExplanationMetrics compute_metrics(const std::vector<ExplanationStep>& steps);

/// Merges steps with equal reason sets into the earliest one (never the final step).
ExplanationSequence merge_steps(const AbstractProof& proof);

struct StageRecord {
    std::string name;
    std::size_t size = 0; ///< number of steps after the stage
    double millis = 0;
};

struct PipelineOptions {
    /// Oracle-check every step of every intermediate proof.
    bool check_stages = false;
};

struct PipelineResult {
    ExplanationSequence explanation;
    std::vector<StageRecord> stages;
    std::uint64_t oracle_calls = 0;
};

/// simplify_aux_vars, lift, then trim or a first minimization, domain
/// reductions, an optional second minimization, and merging.
PipelineResult run_pipeline(
    const SolverModel& model, const AbstractProof& proof, PipelineVariant variant, Oracle& oracle, const PipelineOptions& options = {});

/// Text rendering of a fact, e.g. `a<=3` or `x in {0..2, 5..6}`.
std::string format_fact(const Body& fact, const SolverModel& model);
std::string format_explanation_text(const ExplanationSequence& e, const SolverModel& model);
std::string format_explanation_json(const ExplanationSequence& e, const SolverModel& model);
/// Reads the structured form back; throws ProofError on malformed input.
ExplanationSequence parse_explanation_json(std::string_view text, const SolverModel& model);

} // namespace p2s
