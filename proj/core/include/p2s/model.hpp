#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace p2s {

using Value = std::int64_t;

struct VarId {
    std::uint32_t index = 0;

    auto operator<=>(const VarId&) const = default;
};

/// Finite integer domain: an interval with excluded values ("holes").
class Domain {
public:
    Domain() = default;
    Domain(Value lower, Value upper);

    static Domain empty() { return {}; }

    [[nodiscard]] Value lower() const { return lower_; }
    [[nodiscard]] Value upper() const { return upper_; }
    [[nodiscard]] const std::vector<Value>& holes() const { return holes_; }
    [[nodiscard]] bool is_empty() const { return lower_ > upper_; }
    [[nodiscard]] bool contains(Value v) const;
    [[nodiscard]] std::uint64_t size() const;
    [[nodiscard]] std::vector<Value> values() const;

    /// Removes v, tightening the bounds when v sits on one of them.
    void remove(Value v);

    bool operator==(const Domain&) const = default;

private:
    Value lower_ = 0;
    Value upper_ = -1;
    std::vector<Value> holes_;
};

enum class RelOp : std::uint8_t { Le, Ge, Eq, Ne };

std::string_view to_string(RelOp op);
std::optional<RelOp> parse_rel_op(std::string_view text);
bool compare(Value lhs, RelOp op, Value rhs);

/// x <op> value
struct Atomic {
    VarId var;
    RelOp op = RelOp::Eq;
    Value value = 0;

    [[nodiscard]] bool holds(Value v) const { return compare(v, op, value); }
    auto operator<=>(const Atomic&) const = default;
};

/// Logical negation, always another atomic constraint.
Atomic negate(const Atomic& a);

struct Term {
    Value coeff = 1;
    VarId var;

    auto operator<=>(const Term&) const = default;
};

struct Linear {
    std::vector<Term> terms;
    RelOp op = RelOp::Le;
    Value rhs = 0;

    bool operator==(const Linear&) const = default;
};

/// Disjunction of atomic constraints. The empty clause is false.
struct Clause {
    std::vector<Atomic> atoms;

    bool operator==(const Clause&) const = default;
};

struct AllDifferent {
    std::vector<VarId> vars;

    bool operator==(const AllDifferent&) const = default;
};

struct HalfReified {
    Atomic guard;
    Linear then;

    bool operator==(const HalfReified&) const = default;
};

struct Body;

struct Disjunction {
    std::vector<Body> parts;

    bool operator==(const Disjunction&) const;
};

/// The empty conjunction is true.
struct Conjunction {
    std::vector<Body> parts;

    bool operator==(const Conjunction&) const;
};

struct Body {
    std::variant<Atomic, Clause, Linear, AllDifferent, HalfReified, Disjunction, Conjunction> node;

    Body() : node(Clause{}) {}
    template <typename T>
        requires(!std::is_same_v<std::remove_cvref_t<T>, Body>)
    Body(T&& alternative) : node(std::forward<T>(alternative)) {}

    bool operator==(const Body&) const = default;

    [[nodiscard]] bool is_false() const;
    [[nodiscard]] bool is_true() const;
};

inline Body falsity() { return Clause{}; }
inline Body truth() { return Conjunction{}; }

struct Constraint {
    std::string id;
    Body body;

    bool operator==(const Constraint&) const = default;
};

struct VarDecl {
    std::string name;
    Domain domain;

    bool operator==(const VarDecl&) const = default;
};

/// Total or partial map from variables to values.
class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::size_t var_count) : values_(var_count) {}

    void set(VarId v, Value value);
    void unset(VarId v);
    [[nodiscard]] std::optional<Value> get(VarId v) const;
    [[nodiscard]] Value at(VarId v) const;
    [[nodiscard]] std::size_t size() const { return values_.size(); }

    bool operator==(const Assignment&) const = default;

private:
    std::vector<std::optional<Value>> values_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variables occurring syntactically in the body, sorted and unique.
std::vector<VarId> scope(const Body& body);
std::vector<VarId> scope(std::span<const Body> bodies);

/// Throws EvalError when a scope variable is unassigned.
bool eval(const Body& body, const Assignment& assignment);

/// Clause atoms sorted, linear terms merged and sorted; used for syntactic comparison.
Body canonical(const Body& body);

struct UserModel {
    std::vector<VarDecl> vars;
    std::vector<Constraint> constraints;

    [[nodiscard]] std::optional<VarId> find_var(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> find_constraint(std::string_view id) const;

    bool operator==(const UserModel&) const = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column);

    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

UserModel parse_model(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string serialize_model(const UserModel& model);

std::string format_atom(const Atomic& a, std::span<const VarDecl> vars);
/// Renders in the model-file syntax (extended with `imp` and `and` for solver-internal forms).
std::string format_body(const Body& body, std::span<const VarDecl> vars);

} // namespace p2s
