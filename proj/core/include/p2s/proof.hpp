#pragma once

#include "p2s/flatten.hpp"
#include "p2s/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace p2s {

class Oracle;

enum class ModelLevel : std::uint8_t { Solver, User };

/// A reason is either an input constraint of the proof's model level or a
/// constraint derived by an earlier step.
struct ReasonRef {
    enum class Kind : std::uint8_t { Input, Step };

    Kind kind = Kind::Input;
    std::size_t index = 0; ///< constraint index (Input) or step index (Step)
    std::size_t item = 0;  ///< position within the step's derived set

    static ReasonRef input(std::size_t constraint) { return {Kind::Input, constraint, 0}; }
    static ReasonRef step(std::size_t step, std::size_t item = 0) { return {Kind::Step, step, item}; }

    [[nodiscard]] bool is_input() const { return kind == Kind::Input; }
    [[nodiscard]] bool is_step() const { return kind == Kind::Step; }

    auto operator<=>(const ReasonRef&) const = default;
};

enum class StepKind : std::uint8_t { Inference, Nogood, Conclusion, Derived };

struct ProofStep {
    std::vector<Body> derived;
    std::vector<ReasonRef> reasons;
    StepKind kind = StepKind::Derived;

    bool operator==(const ProofStep&) const = default;
};

/// `d` hint that appeared after `after_steps` steps of the file.
struct DeletionHint {
    std::size_t after_steps = 0;
    std::size_t target = 0;

    bool operator==(const DeletionHint&) const = default;
};

struct AbstractProof {
    ModelLevel level = ModelLevel::Solver;
    std::vector<ProofStep> steps;
    std::vector<DeletionHint> deletions;

    /// Last step derives false.
    [[nodiscard]] bool is_refutation() const;

    bool operator==(const AbstractProof&) const = default;
};

class ProofError : public std::runtime_error {
public:
    enum class Kind : std::uint8_t { Syntax, DanglingReference, ForwardReference, UnknownConstraint, UnknownVariable, NotRefutation, Shape, LiftBeforeSimplify, InvalidStep };

    ProofError(Kind kind, const std::string& message, std::size_t line = 0);

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

/// `<var><op><int>` with op one of <=, >=, ==, !=.
Atomic parse_atom(std::string_view text, const SolverModel& model, std::size_t line = 0);

/// Parses the line-oriented DRCP-style text against a solver model.
/// A proof without a `c UNSAT` conclusion parses; `is_refutation()` reports it.
AbstractProof parse_drcp(std::string_view text, const SolverModel& model);

/// Inverse of parse_drcp for proofs made of inference, nogood and conclusion steps.
std::string serialize_proof(const AbstractProof& proof, const SolverModel& model);

/// Input constraint of the proof's level.
const Body& input_body(const AbstractProof& proof, const SolverModel& model, std::size_t index);
const std::string& input_id(const AbstractProof& proof, const SolverModel& model, std::size_t index);
const Body& resolve(const AbstractProof& proof, const SolverModel& model, const ReasonRef& ref);

/// Checks reference ordering: step refs point strictly backwards and exist.
void check_references(const AbstractProof& proof, const SolverModel& model);

struct StepCheck {
    enum class Status : std::uint8_t { Valid, Invalid, ResourceLimit };

    Status status = Status::Valid;
    std::optional<Assignment> witness;

    [[nodiscard]] bool valid() const { return status == Status::Valid; }
};

/// Valid iff the reasons together with the negated derived set are unsatisfiable
/// over the model's domains.
StepCheck check_step(const AbstractProof& proof, std::size_t step, const SolverModel& model, Oracle& oracle);

/// Backward reachability from the final step; unreferenced derived constraints are dropped.
AbstractProof trim(const AbstractProof& proof);

/// Every derived constraint of every non-final step is referenced by a later step.
bool is_trimmed(const AbstractProof& proof);

/// Keeps the listed steps (sorted, unique) and renumbers step references.
/// References into removed steps must not exist.
AbstractProof keep_steps(const AbstractProof& proof, std::span<const std::size_t> kept);

} // namespace p2s
