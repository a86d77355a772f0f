#include "p2s/pipeline.hpp"

#include <json.hpp>

#include <sstream>

namespace p2s {

namespace {

    using nlohmann::json;

    std::vector<Atomic> atoms_of(const Body& b)
    {
        if (const auto* a = std::get_if<Atomic>(&b.node))
            return {*a};
        if (const auto* c = std::get_if<Clause>(&b.node))
            return c->atoms;
        return {};
    }

    std::string clause_text(const Body& fact, const SolverModel& model)
    {
        if (fact.is_false())
            return "false";
        auto atoms = atoms_of(fact);
        if (atoms.empty())
            throw ProofError(ProofError::Kind::Shape, "explanation fact is not a clause");
        std::string out;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (i)
                out += '|';
            out += format_atom(atoms[i], model.vars);
        }
        return out;
    }

    std::string value_ranges(const std::vector<Value>& values)
    {
        std::string out = "{";
        for (std::size_t i = 0; i < values.size();) {
            std::size_t j = i;
            while (j + 1 < values.size() && values[j + 1] == values[j] + 1)
                ++j;
            if (i)
                out += ", ";
            out += std::to_string(values[i]);
            if (j > i)
                out += ".." + std::to_string(values[j]);
            i = j + 1;
        }
        return out + "}";
    }

} // namespace

std::string format_fact(const Body& fact, const SolverModel& model)
{
    if (fact.is_false())
        return "false";
    auto atoms = atoms_of(fact);
    if (atoms.empty())
        return format_body(fact, model.vars);
    if (atoms.size() == 1)
        return format_atom(atoms.front(), model.vars);
    VarId v = atoms.front().var;
    bool unary = std::all_of(atoms.begin(), atoms.end(), [&](const Atomic& a) { return a.var == v; });
    if (!unary) {
        std::string out;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            out += (i ? " | " : "") + format_atom(atoms[i], model.vars);
        return out;
    }
    std::vector<Value> allowed;
    for (Value x : model.vars.at(v.index).domain.values())
        if (std::any_of(atoms.begin(), atoms.end(), [&](const Atomic& a) { return a.holds(x); }))
            allowed.push_back(x);
    return model.vars[v.index].name + " in " + value_ranges(allowed);
}

std::string format_explanation_text(const ExplanationSequence& e, const SolverModel& model)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < e.steps.size(); ++i) {
        const auto& s = e.steps[i];
        out << "Step " << i + 1 << ": ";
        for (std::size_t k = 0; k < s.facts.size(); ++k)
            out << (k ? ", " : "") << format_fact(s.facts[k], model);
        out << '\n';
        for (auto u : s.user_reasons) {
            const auto& c = model.source.constraints.at(u);
            out << "  because " << c.id << ": " << format_body(c.body, model.vars) << '\n';
        }
        for (const auto& r : s.fact_reasons)
            out << "  and " << format_fact(e.steps.at(r.index).facts.at(r.item), model) << " (step " << r.index + 1
                << ")\n";
    }
    return out.str();
}

std::string format_explanation_json(const ExplanationSequence& e, const SolverModel& model)
{
    json steps = json::array();
    for (const auto& s : e.steps) {
        json facts = json::array();
        for (const auto& f : s.facts)
            facts.push_back(clause_text(f, model));
        json constraints = json::array();
        for (auto u : s.user_reasons)
            constraints.push_back(model.source.constraints.at(u).id);
        json used = json::array();
        for (const auto& r : s.fact_reasons)
            used.push_back({{"step", r.index + 1}, {"fact", r.item}});
        steps.push_back({{"facts", facts}, {"constraints", constraints}, {"fact_reasons", used}});
    }
    json doc = {
        {"steps", steps},
        {"metrics",
            {{"sequence_length", e.metrics.sequence_length}, {"max_stepsize", e.metrics.max_stepsize},
                {"max_stepsize_counts", "user constraints only"}}},
    };
    return doc.dump(2) + "\n";
}

ExplanationSequence parse_explanation_json(std::string_view text, const SolverModel& model)
{
    ExplanationSequence out;
    try {
        json doc = json::parse(text);
        for (const auto& js : doc.at("steps")) {
            ExplanationStep s;
            for (const auto& f : js.at("facts")) {
                auto t = f.get<std::string>();
                if (t == "false") {
                    s.facts.push_back(falsity());
                    continue;
                }
                Clause c;
                std::size_t start = 0;
                for (;;) {
                    std::size_t bar = t.find('|', start);
                    c.atoms.push_back(parse_atom(std::string_view(t).substr(start, bar - start), model));
                    if (bar == std::string::npos)
                        break;
                    start = bar + 1;
                }
                if (c.atoms.size() == 1)
                    s.facts.emplace_back(c.atoms.front());
                else
                    s.facts.emplace_back(std::move(c));
            }
            for (const auto& c : js.at("constraints")) {
                auto idx = model.source.find_constraint(c.get<std::string>());
                if (!idx)
                    throw ProofError(ProofError::Kind::UnknownConstraint, "unknown constraint " + c.get<std::string>());
                s.user_reasons.push_back(*idx);
            }
            for (const auto& r : js.at("fact_reasons")) {
                auto step = r.at("step").get<std::size_t>();
                auto item = r.at("fact").get<std::size_t>();
                if (step == 0 || step > out.steps.size())
                    throw ProofError(ProofError::Kind::ForwardReference, "fact reason must cite an earlier step");
                if (item >= out.steps[step - 1].facts.size())
                    throw ProofError(ProofError::Kind::DanglingReference, "fact reason cites a missing fact");
                s.fact_reasons.push_back(ReasonRef::step(step - 1, item));
            }
            out.steps.push_back(std::move(s));
        }
        const auto& m = doc.at("metrics");
        out.metrics.sequence_length = m.at("sequence_length").get<std::size_t>();
        out.metrics.max_stepsize = m.at("max_stepsize").get<std::size_t>();
    }
    catch (const json::exception& e) {
        throw ProofError(ProofError::Kind::Syntax, std::string("malformed explanation: ") + e.what());
    }
    return out;
}

} // namespace p2s
