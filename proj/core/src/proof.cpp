#include "p2s/proof.hpp"

#include "p2s/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace p2s {

ProofError::ProofError(Kind kind, const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), kind_(kind), line_(line)
{
}

bool AbstractProof::is_refutation() const
{
    if (steps.empty())
        return false;
    const auto& last = steps.back().derived;
    return std::any_of(last.begin(), last.end(), [](const Body& b) { return b.is_false(); });
}

Atomic parse_atom(std::string_view text, const SolverModel& model, std::size_t line)
{
    std::size_t pos = std::string_view::npos;
    for (std::string_view op : {"<=", ">=", "==", "!="}) {
        std::size_t p = text.find(op);
        if (p != std::string_view::npos && p < pos)
            pos = p;
    }
    if (pos == std::string_view::npos || pos == 0)
        throw ProofError(ProofError::Kind::Syntax, "bad atom '" + std::string(text) + "'", line);
    auto var = model.find_var(text.substr(0, pos));
    if (!var)
        throw ProofError(ProofError::Kind::UnknownVariable, "unknown variable '" + std::string(text.substr(0, pos)) + "'", line);
    RelOp op = *parse_rel_op(text.substr(pos, 2));
    std::string_view num = text.substr(pos + 2);
    Value value = 0;
    auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
    if (num.empty() || ec != std::errc() || end != num.data() + num.size())
        throw ProofError(ProofError::Kind::Syntax, "bad atom value '" + std::string(text) + "'", line);
    return {*var, op, value};
}

namespace {

    std::string_view trim_ws(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
            s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.remove_suffix(1);
        return s;
    }

    std::vector<std::string_view> split(std::string_view s, char sep)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        for (;;) {
            std::size_t pos = s.find(sep, start);
            out.push_back(trim_ws(s.substr(start, pos - start)));
            if (pos == std::string_view::npos)
                return out;
            start = pos + 1;
        }
    }

    std::vector<std::string_view> words(std::string_view s)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
                ++i;
            std::size_t start = i;
            while (i < s.size() && s[i] != ' ' && s[i] != '\t')
                ++i;
            if (i > start)
                out.push_back(s.substr(start, i - start));
        }
        return out;
    }

    struct RawLine {
        char kind;
        std::size_t line;
        std::string_view clause;
        std::string_view refs;
    };

    class DrcpParser {
    public:
        explicit DrcpParser(const SolverModel& model) : model_(model) {}

        AbstractProof parse(std::string_view text)
        {
            std::vector<RawLine> lines = scan(text);
            std::size_t total_steps = 0;
            for (const auto& l : lines)
                if (l.kind != 'd')
                    ++total_steps;

            AbstractProof proof;
            proof.level = ModelLevel::Solver;
            for (const auto& l : lines) {
                total_ = total_steps;
                current_ = proof.steps.size();
                if (!proof.steps.empty() && proof.steps.back().kind == StepKind::Conclusion)
                    throw ProofError(ProofError::Kind::Shape, "step after the UNSAT conclusion", l.line);
                switch (l.kind) {
                case 'i': {
                    ProofStep s;
                    s.kind = StepKind::Inference;
                    s.derived.emplace_back(parse_clause(l.clause, l.line));
                    std::string_view ref = l.refs;
                    if (!ref.starts_with("c:") || ref.find(',') != std::string_view::npos)
                        throw ProofError(ProofError::Kind::Shape, "inference step needs exactly one c:<id> reason", l.line);
                    s.reasons.push_back(constraint_ref(ref.substr(2), l.line));
                    proof.steps.push_back(std::move(s));
                    break;
                }
                case 'n': {
                    ProofStep s;
                    s.kind = StepKind::Nogood;
                    s.derived.emplace_back(parse_clause(l.clause, l.line));
                    for (auto r : split(l.refs, ',')) {
                        if (!r.starts_with("s:"))
                            throw ProofError(ProofError::Kind::Shape, "nogood step reasons must be s:<id>", l.line);
                        s.reasons.push_back(step_ref(r.substr(2), l.line));
                    }
                    proof.steps.push_back(std::move(s));
                    break;
                }
                case 'c': {
                    ProofStep s;
                    s.kind = StepKind::Conclusion;
                    s.derived.push_back(falsity());
                    if (!l.refs.empty())
                        for (auto r : split(l.refs, ',')) {
                            if (r.starts_with("s:"))
                                s.reasons.push_back(step_ref(r.substr(2), l.line));
                            else if (r.starts_with("c:"))
                                s.reasons.push_back(constraint_ref(r.substr(2), l.line));
                            else
                                throw ProofError(ProofError::Kind::Syntax, "bad reason '" + std::string(r) + "'", l.line);
                        }
                    proof.steps.push_back(std::move(s));
                    break;
                }
                case 'd': {
                    std::string_view r = l.refs;
                    if (!r.starts_with("s:"))
                        throw ProofError(ProofError::Kind::Syntax, "deletion needs s:<id>", l.line);
                    current_ = total_steps;
                    ReasonRef target = step_ref(r.substr(2), l.line);
                    if (target.index >= proof.steps.size())
                        throw ProofError(ProofError::Kind::ForwardReference, "deletion of a later step", l.line);
                    proof.deletions.push_back({proof.steps.size(), target.index});
                    break;
                }
                default: break;
                }
            }
            return proof;
        }

    private:
        std::vector<RawLine> scan(std::string_view text)
        {
            std::vector<RawLine> out;
            std::size_t line_no = 0;
            std::size_t start = 0;
            while (start <= text.size()) {
                std::size_t end = text.find('\n', start);
                if (end == std::string_view::npos)
                    end = text.size();
                std::string_view line = trim_ws(text.substr(start, end - start));
                start = end + 1;
                ++line_no;
                if (line.empty() || line.front() == '#')
                    continue;
                auto w = words(line);
                if (w.front() == "p") {
                    if (w.size() != 2 || w[1] != "drcp" || !out.empty())
                        throw ProofError(ProofError::Kind::Syntax, "bad header", line_no);
                    continue;
                }
                if (w.front().size() != 1)
                    throw ProofError(ProofError::Kind::Syntax, "unknown line kind '" + std::string(w.front()) + "'", line_no);
                char kind = w.front().front();
                switch (kind) {
                case 'i':
                case 'n':
                    if (w.size() != 3)
                        throw ProofError(ProofError::Kind::Syntax, "expected '<kind> <clause> <reasons>'", line_no);
                    out.push_back({kind, line_no, w[1], w[2]});
                    break;
                case 'd':
                    if (w.size() != 2)
                        throw ProofError(ProofError::Kind::Syntax, "expected 'd s:<id>'", line_no);
                    out.push_back({kind, line_no, {}, w[1]});
                    break;
                case 'c':
                    if (w.size() < 2 || w[1] != "UNSAT" || w.size() > 3)
                        throw ProofError(ProofError::Kind::Syntax, "expected 'c UNSAT <reasons>'", line_no);
                    out.push_back({kind, line_no, {}, w.size() == 3 ? w[2] : std::string_view{}});
                    break;
                default:
                    throw ProofError(ProofError::Kind::Syntax, "unknown line kind '" + std::string(1, kind) + "'", line_no);
                }
            }
            return out;
        }

        Clause parse_clause(std::string_view text, std::size_t line) const
        {
            Clause c;
            for (auto a : split(text, '|'))
                c.atoms.push_back(parse_atom(a, model_, line));
            return c;
        }

        ReasonRef constraint_ref(std::string_view id, std::size_t line) const
        {
            auto idx = model_.find_constraint(id);
            if (!idx)
                throw ProofError(ProofError::Kind::UnknownConstraint, "unknown constraint '" + std::string(id) + "'", line);
            return ReasonRef::input(*idx);
        }

        ReasonRef step_ref(std::string_view id, std::size_t line) const
        {
            std::size_t k = 0;
            auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), k);
            if (id.empty() || ec != std::errc() || end != id.data() + id.size())
                throw ProofError(ProofError::Kind::Syntax, "bad step id '" + std::string(id) + "'", line);
            if (k == 0 || k > total_)
                throw ProofError(ProofError::Kind::DanglingReference, "step " + std::to_string(k) + " does not exist", line);
            if (k > current_)
                throw ProofError(ProofError::Kind::ForwardReference, "step " + std::to_string(k) + " is not earlier", line);
            return ReasonRef::step(k - 1);
        }

        const SolverModel& model_;
        std::size_t total_ = 0;
        std::size_t current_ = 0;
    };

    std::string format_clause(const Body& body, const SolverModel& model, std::size_t step)
    {
        std::vector<Atomic> atoms;
        if (const auto* c = std::get_if<Clause>(&body.node))
            atoms = c->atoms;
        else if (const auto* a = std::get_if<Atomic>(&body.node))
            atoms = {*a};
        if (atoms.empty())
            throw ProofError(ProofError::Kind::Shape, "step " + std::to_string(step + 1) + " does not derive a clause");
        std::string out;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (i)
                out += '|';
            out += format_atom(atoms[i], model.vars);
        }
        return out;
    }

} // namespace

AbstractProof parse_drcp(std::string_view text, const SolverModel& model) { return DrcpParser(model).parse(text); }

std::string serialize_proof(const AbstractProof& proof, const SolverModel& model)
{
    if (proof.level != ModelLevel::Solver)
        throw ProofError(ProofError::Kind::Shape, "only solver-level proofs have a DRCP form");
    std::ostringstream out;
    out << "p drcp\n";
    std::size_t next_deletion = 0;
    auto flush_deletions = [&](std::size_t written) {
        while (next_deletion < proof.deletions.size() && proof.deletions[next_deletion].after_steps <= written)
            out << "d s:" << proof.deletions[next_deletion++].target + 1 << '\n';
    };
    auto ref_text = [&](const ReasonRef& r) {
        if (r.is_step())
            return "s:" + std::to_string(r.index + 1);
        return "c:" + model.constraints.at(r.index).id;
    };
    for (std::size_t i = 0; i < proof.steps.size(); ++i) {
        flush_deletions(i);
        const auto& s = proof.steps[i];
        std::string refs;
        for (std::size_t k = 0; k < s.reasons.size(); ++k) {
            if (k)
                refs += ',';
            refs += ref_text(s.reasons[k]);
        }
        switch (s.kind) {
        case StepKind::Inference:
        case StepKind::Nogood:
            if (s.derived.size() != 1)
                throw ProofError(ProofError::Kind::Shape, "step " + std::to_string(i + 1) + " derives more than one clause");
            out << (s.kind == StepKind::Inference ? "i " : "n ") << format_clause(s.derived.front(), model, i) << ' '
                << refs << '\n';
            break;
        case StepKind::Conclusion:
            out << "c UNSAT";
            if (!refs.empty())
                out << ' ' << refs;
            out << '\n';
            break;
        case StepKind::Derived:
            throw ProofError(ProofError::Kind::Shape, "step " + std::to_string(i + 1) + " has no DRCP form");
        }
    }
    flush_deletions(proof.steps.size());
    return out.str();
}

const Body& input_body(const AbstractProof& proof, const SolverModel& model, std::size_t index)
{
    if (proof.level == ModelLevel::Solver)
        return model.constraints.at(index).body;
    return model.source.constraints.at(index).body;
}

const std::string& input_id(const AbstractProof& proof, const SolverModel& model, std::size_t index)
{
    if (proof.level == ModelLevel::Solver)
        return model.constraints.at(index).id;
    return model.source.constraints.at(index).id;
}

const Body& resolve(const AbstractProof& proof, const SolverModel& model, const ReasonRef& ref)
{
    if (ref.is_input())
        return input_body(proof, model, ref.index);
    return proof.steps.at(ref.index).derived.at(ref.item);
}

void check_references(const AbstractProof& proof, const SolverModel& model)
{
    std::size_t inputs = proof.level == ModelLevel::Solver ? model.constraints.size() : model.source.constraints.size();
    for (std::size_t i = 0; i < proof.steps.size(); ++i)
        for (const auto& r : proof.steps[i].reasons) {
            if (r.is_input()) {
                if (r.index >= inputs)
                    throw ProofError(ProofError::Kind::UnknownConstraint,
                        "step " + std::to_string(i + 1) + " cites a missing input constraint");
                continue;
            }
            if (r.index >= i)
                throw ProofError(ProofError::Kind::ForwardReference,
                    "step " + std::to_string(i + 1) + " cites step " + std::to_string(r.index + 1));
            if (r.item >= proof.steps[r.index].derived.size())
                throw ProofError(ProofError::Kind::DanglingReference,
                    "step " + std::to_string(i + 1) + " cites a missing derivation of step " + std::to_string(r.index + 1));
        }
}

StepCheck check_step(const AbstractProof& proof, std::size_t step, const SolverModel& model, Oracle& oracle)
{
    const auto& s = proof.steps.at(step);
    std::vector<const Body*> hard;
    for (const auto& r : s.reasons)
        hard.push_back(&resolve(proof, model, r));
    Body negated = negate_conjunction(s.derived);
    hard.push_back(&negated);
    OracleResult result = oracle.solve(std::span<const Body* const>(hard), std::span<const Body* const>{});
    if (std::holds_alternative<Unsat>(result))
        return {StepCheck::Status::Valid, std::nullopt};
    if (auto* sat = std::get_if<Sat>(&result))
        return {StepCheck::Status::Invalid, std::move(sat->assignment)};
    return {StepCheck::Status::ResourceLimit, std::nullopt};
}

AbstractProof trim(const AbstractProof& proof)
{
    if (!proof.is_refutation())
        throw ProofError(ProofError::Kind::NotRefutation, "trimming needs a proof ending in false");
    std::size_t n = proof.steps.size();
    std::vector<std::vector<std::uint8_t>> used(n);
    for (std::size_t i = 0; i < n; ++i)
        used[i].assign(proof.steps[i].derived.size(), 0);
    std::fill(used[n - 1].begin(), used[n - 1].end(), 1);
    for (std::size_t i = n; i-- > 0;) {
        if (std::find(used[i].begin(), used[i].end(), 1) == used[i].end())
            continue;
        for (const auto& r : proof.steps[i].reasons)
            if (r.is_step())
                used[r.index].at(r.item) = 1;
    }

    AbstractProof out;
    out.level = proof.level;
    std::vector<std::size_t> new_index(n, n);
    std::vector<std::vector<std::size_t>> new_item(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = proof.steps[i];
        ProofStep kept;
        kept.kind = s.kind;
        new_item[i].assign(s.derived.size(), 0);
        for (std::size_t k = 0; k < s.derived.size(); ++k)
            if (used[i][k]) {
                new_item[i][k] = kept.derived.size();
                kept.derived.push_back(s.derived[k]);
            }
        if (kept.derived.empty())
            continue;
        for (const auto& r : s.reasons)
            kept.reasons.push_back(r.is_step() ? ReasonRef::step(new_index[r.index], new_item[r.index][r.item]) : r);
        new_index[i] = out.steps.size();
        out.steps.push_back(std::move(kept));
    }
    for (const auto& d : proof.deletions) {
        if (new_index[d.target] == n)
            continue;
        std::size_t after = 0;
        for (std::size_t i = 0; i < d.after_steps; ++i)
            after += new_index[i] != n;
        out.deletions.push_back({after, new_index[d.target]});
    }
    return out;
}

bool is_trimmed(const AbstractProof& proof)
{
    std::size_t n = proof.steps.size();
    std::vector<std::vector<std::uint8_t>> cited(n);
    for (std::size_t i = 0; i < n; ++i)
        cited[i].assign(proof.steps[i].derived.size(), 0);
    for (std::size_t j = 0; j < n; ++j)
        for (const auto& r : proof.steps[j].reasons)
            if (r.is_step() && r.index < j && r.item < cited[r.index].size())
                cited[r.index][r.item] = 1;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (std::find(cited[i].begin(), cited[i].end(), 0) != cited[i].end())
            return false;
    return true;
}

AbstractProof keep_steps(const AbstractProof& proof, std::span<const std::size_t> kept)
{
    std::size_t n = proof.steps.size();
    std::vector<std::size_t> new_index(n, n);
    for (std::size_t k = 0; k < kept.size(); ++k)
        new_index.at(kept[k]) = k;
    AbstractProof out;
    out.level = proof.level;
    for (auto i : kept) {
        ProofStep s = proof.steps[i];
        for (auto& r : s.reasons)
            if (r.is_step()) {
                if (new_index[r.index] == n)
                    throw std::logic_error("kept step cites a removed step");
                r.index = new_index[r.index];
            }
        out.steps.push_back(std::move(s));
    }
    for (const auto& d : proof.deletions) {
        if (new_index[d.target] == n)
            continue;
        std::size_t after = 0;
        for (std::size_t i = 0; i < d.after_steps && i < n; ++i)
            after += new_index[i] != n;
        out.deletions.push_back({after, new_index[d.target]});
    }
    return out;
}

} // namespace p2s
