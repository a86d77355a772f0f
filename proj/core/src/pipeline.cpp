#include "p2s/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <map>

namespace p2s {

namespace {

    constexpr std::array<PipelineVariant, 7> variants{{
        {Minimization::None, Minimization::None},
        {Minimization::None, Minimization::Local},
        {Minimization::None, Minimization::Global},
        {Minimization::Local, Minimization::None},
        {Minimization::Global, Minimization::None},
        {Minimization::Local, Minimization::Local},
        {Minimization::Global, Minimization::Local},
    }};

    std::string_view min_name(Minimization m) { return m == Minimization::Local ? "minloc" : "minglob"; }

    void dedup_in_order(std::vector<ReasonRef>& refs)
    {
        std::vector<ReasonRef> out;
        for (const auto& r : refs)
            if (std::find(out.begin(), out.end(), r) == out.end())
                out.push_back(r);
        refs = std::move(out);
    }

    std::vector<DeletionHint> remap_deletions(
        const std::vector<DeletionHint>& hints, const std::vector<std::size_t>& new_index, std::size_t removed)
    {
        std::vector<DeletionHint> out;
        for (const auto& d : hints) {
            if (new_index[d.target] == removed)
                continue;
            std::size_t after = 0;
            for (std::size_t i = 0; i < d.after_steps && i < new_index.size(); ++i)
                after += new_index[i] != removed;
            out.push_back({after, new_index[d.target]});
        }
        return out;
    }

    std::vector<VarId> derived_scope(const ProofStep& s) { return scope(std::span<const Body>(s.derived)); }

    std::size_t input_count(const AbstractProof& proof, const SolverModel& model)
    {
        return proof.level == ModelLevel::Solver ? model.constraints.size() : model.source.constraints.size();
    }

    using Clock = std::chrono::steady_clock;

    double millis_since(Clock::time_point start)
    {
        return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }

} // namespace

std::string PipelineVariant::name() const
{
    std::string out = first == Minimization::None ? "trim" : std::string(min_name(first));
    if (second != Minimization::None)
        out += "+" + std::string(min_name(second));
    return out;
}

std::optional<PipelineVariant> PipelineVariant::parse(std::string_view name)
{
    for (const auto& v : variants)
        if (v.name() == name)
            return v;
    return std::nullopt;
}

std::span<const PipelineVariant> PipelineVariant::all() { return variants; }

AbstractProof simplify(const AbstractProof& proof, const std::function<bool(const ProofStep&)>& keep)
{
    std::size_t n = proof.steps.size();
    if (n == 0)
        return proof;
    if (!keep(proof.steps.back()))
        throw ProofError(ProofError::Kind::Shape, "the final step does not have the property");
    std::vector<std::size_t> new_index(n, n);
    std::vector<std::vector<ReasonRef>> expansion(n);
    AbstractProof out;
    out.level = proof.level;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& step = proof.steps[i];
        std::vector<ReasonRef> reasons;
        for (const auto& r : step.reasons) {
            if (r.is_input())
                reasons.push_back(r);
            else if (new_index[r.index] == n)
                reasons.insert(reasons.end(), expansion[r.index].begin(), expansion[r.index].end());
            else
                reasons.push_back(ReasonRef::step(new_index[r.index], r.item));
        }
        dedup_in_order(reasons);
        if (keep(step)) {
            new_index[i] = out.steps.size();
            out.steps.push_back({step.derived, std::move(reasons), step.kind});
        }
        else
            expansion[i] = std::move(reasons);
    }
    out.deletions = remap_deletions(proof.deletions, new_index, n);
    return out;
}

AbstractProof simplify_aux_vars(const AbstractProof& proof, const SolverModel& model)
{
    return simplify(proof, [&](const ProofStep& s) {
        auto vars = derived_scope(s);
        return std::none_of(vars.begin(), vars.end(), [&](VarId v) { return model.is_aux(v); });
    });
}

AbstractProof lift_to_user_level(const AbstractProof& proof, const SolverModel& model)
{
    if (proof.level != ModelLevel::Solver)
        throw ProofError(ProofError::Kind::Shape, "proof is already at the user level");
    AbstractProof out;
    out.level = ModelLevel::User;
    out.deletions = proof.deletions;
    for (std::size_t i = 0; i < proof.steps.size(); ++i) {
        const auto& step = proof.steps[i];
        for (auto v : derived_scope(step))
            if (model.is_aux(v))
                throw ProofError(ProofError::Kind::LiftBeforeSimplify,
                    "step " + std::to_string(i + 1) + " derives a constraint over auxiliary variable "
                        + model.vars[v.index].name);
        ProofStep lifted;
        lifted.derived = step.derived;
        lifted.kind = step.kind == StepKind::Conclusion ? StepKind::Conclusion : StepKind::Derived;
        for (const auto& r : step.reasons)
            lifted.reasons.push_back(r.is_input() ? ReasonRef::input(model.provenance.user_of(r.index)) : r);
        dedup_in_order(lifted.reasons);
        out.steps.push_back(std::move(lifted));
    }
    return out;
}

Body normalize_unary(const Body& body, const SolverModel& model)
{
    std::vector<Atomic> atoms;
    if (const auto* a = std::get_if<Atomic>(&body.node))
        atoms = {*a};
    else if (const auto* c = std::get_if<Clause>(&body.node))
        atoms = c->atoms;
    if (atoms.empty())
        return body;
    VarId v = atoms.front().var;
    for (const auto& a : atoms)
        if (a.var != v)
            return body;
    std::vector<Value> values = model.vars.at(v.index).domain.values();
    std::vector<Value> allowed;
    for (Value x : values)
        if (std::any_of(atoms.begin(), atoms.end(), [&](const Atomic& a) { return a.holds(x); }))
            allowed.push_back(x);
    if (allowed.empty() || allowed.size() == values.size())
        return canonical(body);
    if (allowed.size() == 1)
        return Atomic{v, RelOp::Eq, allowed.front()};
    if (std::equal(allowed.begin(), allowed.end(), values.begin()))
        return Atomic{v, RelOp::Le, allowed.back()};
    if (std::equal(allowed.rbegin(), allowed.rend(), values.rbegin()))
        return Atomic{v, RelOp::Ge, allowed.front()};
    if (allowed.size() + 1 == values.size()) {
        std::size_t k = 0;
        while (k < allowed.size() && allowed[k] == values[k])
            ++k;
        return Atomic{v, RelOp::Ne, values[k]};
    }
    return canonical(body);
}

AbstractProof simplify_to_domain_reductions(const AbstractProof& proof, const SolverModel& model)
{
    AbstractProof out = simplify(proof, [](const ProofStep& s) { return derived_scope(s).size() <= 1; });
    for (auto& step : out.steps)
        for (auto& b : step.derived)
            b = normalize_unary(b, model);
    return out;
}

AbstractProof minimize_reasons(const AbstractProof& proof, Minimization mode, const SolverModel& model, Oracle& oracle)
{
    if (mode == Minimization::None)
        return proof;
    if (!proof.is_refutation())
        throw ProofError(ProofError::Kind::NotRefutation, "minimization needs a proof ending in false");
    std::size_t n = proof.steps.size();
    std::vector<std::vector<std::uint8_t>> required(n);
    for (std::size_t i = 0; i < n; ++i)
        required[i].assign(proof.steps[i].derived.size(), 0);
    std::fill(required[n - 1].begin(), required[n - 1].end(), 1);
    std::vector<std::vector<ReasonRef>> reasons(n);
    std::size_t inputs = input_count(proof, model);

    for (std::size_t i = n; i-- > 0;) {
        const auto& step = proof.steps[i];
        std::vector<Body> derived;
        for (std::size_t k = 0; k < step.derived.size(); ++k)
            if (required[i][k])
                derived.push_back(step.derived[k]);
        if (derived.empty())
            continue;

        std::vector<ReasonRef> candidates;
        std::vector<std::uint64_t> weights;
        if (mode == Minimization::Local) {
            candidates = step.reasons;
            dedup_in_order(candidates);
            weights.assign(candidates.size(), 1);
        }
        else {
            std::vector<ReasonRef> facts;
            std::vector<Body> seen;
            for (std::size_t j = 0; j < i; ++j)
                for (std::size_t k = 0; k < proof.steps[j].derived.size(); ++k) {
                    Body c = canonical(proof.steps[j].derived[k]);
                    if (std::find(seen.begin(), seen.end(), c) != seen.end())
                        continue;
                    seen.push_back(std::move(c));
                    facts.push_back(ReasonRef::step(j, k));
                }
            for (std::size_t c = 0; c < inputs; ++c)
                candidates.push_back(ReasonRef::input(c));
            weights.assign(inputs, facts.size() + 1);
            candidates.insert(candidates.end(), facts.begin(), facts.end());
            weights.resize(candidates.size(), 1);
        }

        std::vector<const Body*> bodies;
        for (const auto& r : candidates)
            bodies.push_back(&resolve(proof, model, r));
        Body negated = negate_conjunction(derived);
        const Body* hard[] = {&negated};
        std::vector<std::size_t> mus;
        try {
            mus = extract_mus(bodies, weights, hard,
                mode == Minimization::Local ? MusMode::SubsetMinimal : MusMode::SmallestWeighted, oracle);
        }
        catch (const MusError& e) {
            if (e.kind() == MusError::Kind::SatInput)
                throw ProofError(ProofError::Kind::InvalidStep,
                    "step " + std::to_string(i + 1) + " is not implied by its reasons");
            throw;
        }
        for (auto m : mus) {
            const ReasonRef& r = candidates[m];
            reasons[i].push_back(r);
            if (r.is_step())
                required[r.index][r.item] = 1;
        }
    }

    AbstractProof out;
    out.level = proof.level;
    std::vector<std::size_t> new_index(n, n);
    std::vector<std::vector<std::size_t>> new_item(n);
    for (std::size_t i = 0; i < n; ++i) {
        ProofStep kept;
        kept.kind = proof.steps[i].kind;
        new_item[i].assign(proof.steps[i].derived.size(), 0);
        for (std::size_t k = 0; k < proof.steps[i].derived.size(); ++k)
            if (required[i][k]) {
                new_item[i][k] = kept.derived.size();
                kept.derived.push_back(proof.steps[i].derived[k]);
            }
        if (kept.derived.empty())
            continue;
        for (const auto& r : reasons[i])
            kept.reasons.push_back(r.is_step() ? ReasonRef::step(new_index[r.index], new_item[r.index][r.item]) : r);
        new_index[i] = out.steps.size();
        out.steps.push_back(std::move(kept));
    }
    out.deletions = remap_deletions(proof.deletions, new_index, n);
    return out;
}

ExplanationMetrics compute_metrics(const std::vector<ExplanationStep>& steps)
{
    ExplanationMetrics m;
    m.sequence_length = steps.size();
    for (const auto& s : steps)
        m.max_stepsize = std::max(m.max_stepsize, s.user_reasons.size());
    return m;
}

AbstractProof ExplanationSequence::to_proof() const
{
    AbstractProof p;
    p.level = ModelLevel::User;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        ProofStep s;
        s.derived = steps[i].facts;
        for (auto u : steps[i].user_reasons)
            s.reasons.push_back(ReasonRef::input(u));
        s.reasons.insert(s.reasons.end(), steps[i].fact_reasons.begin(), steps[i].fact_reasons.end());
        s.kind = i + 1 == steps.size() ? StepKind::Conclusion : StepKind::Derived;
        p.steps.push_back(std::move(s));
    }
    return p;
}

ExplanationSequence merge_steps(const AbstractProof& proof)
{
    if (proof.level != ModelLevel::User)
        throw ProofError(ProofError::Kind::Shape, "merging needs a user-level proof");
    using Key = std::pair<std::vector<std::size_t>, std::vector<ReasonRef>>;
    std::map<Key, std::size_t> first_with;
    std::vector<std::vector<ReasonRef>> where(proof.steps.size());
    ExplanationSequence out;
    for (std::size_t i = 0; i < proof.steps.size(); ++i) {
        const auto& step = proof.steps[i];
        std::vector<std::size_t> users;
        std::vector<ReasonRef> facts;
        for (const auto& r : step.reasons) {
            if (r.is_input())
                users.push_back(r.index);
            else
                facts.push_back(where.at(r.index).at(r.item));
        }
        std::sort(users.begin(), users.end());
        users.erase(std::unique(users.begin(), users.end()), users.end());
        std::sort(facts.begin(), facts.end());
        facts.erase(std::unique(facts.begin(), facts.end()), facts.end());

        bool final_step = i + 1 == proof.steps.size();
        Key key{users, facts};
        auto found = first_with.find(key);
        std::size_t target = 0;
        if (!final_step && found != first_with.end())
            target = found->second;
        else {
            target = out.steps.size();
            out.steps.push_back({{}, users, facts});
            if (!final_step)
                first_with.emplace(std::move(key), target);
        }
        auto& facts_at = out.steps[target].facts;
        for (const auto& d : step.derived) {
            auto pos = std::find(facts_at.begin(), facts_at.end(), d);
            std::size_t item = static_cast<std::size_t>(pos - facts_at.begin());
            if (pos == facts_at.end())
                facts_at.push_back(d);
            where[i].push_back(ReasonRef::step(target, item));
        }
    }
    out.metrics = compute_metrics(out.steps);
    return out;
}

PipelineResult run_pipeline(
    const SolverModel& model, const AbstractProof& proof, PipelineVariant variant, Oracle& oracle, const PipelineOptions& options)
{
    PipelineResult result;
    std::uint64_t calls_before = oracle.calls();
    std::optional<Oracle> checker;
    if (options.check_stages)
        checker.emplace(oracle.domains(), oracle.budget());

    auto check = [&](const AbstractProof& p, const std::string& stage) {
        if (!checker)
            return;
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
            StepCheck c = check_step(p, i, model, *checker);
            if (c.status == StepCheck::Status::ResourceLimit)
                throw MusError(MusError::Kind::BudgetExceeded, "oracle budget exceeded while checking " + stage);
            if (!c.valid())
                throw ProofError(ProofError::Kind::InvalidStep,
                    "step " + std::to_string(i + 1) + " is invalid after stage '" + stage + "'");
        }
    };
    auto stage = [&](const std::string& name, AbstractProof& p, auto&& fn) {
        auto start = Clock::now();
        p = fn(p);
        result.stages.push_back({name, p.steps.size(), millis_since(start)});
        check(p, name);
    };

    if (!proof.is_refutation())
        throw ProofError(ProofError::Kind::NotRefutation, "the proof does not derive false");
    result.stages.push_back({"Proof", proof.steps.size(), 0});
    AbstractProof p = proof;
    stage("No aux vars", p, [&](const AbstractProof& q) { return simplify_aux_vars(q, model); });
    stage("User cons", p, [&](const AbstractProof& q) { return lift_to_user_level(q, model); });
    if (variant.first == Minimization::None)
        stage("Trimmed", p, [&](const AbstractProof& q) { return trim(q); });
    else
        stage("Minimized 1", p, [&](const AbstractProof& q) { return minimize_reasons(q, variant.first, model, oracle); });
    stage("Domain reductions", p, [&](const AbstractProof& q) { return simplify_to_domain_reductions(q, model); });
    if (variant.second != Minimization::None)
        stage("Minimized 2", p, [&](const AbstractProof& q) { return minimize_reasons(q, variant.second, model, oracle); });

    auto start = Clock::now();
    result.explanation = merge_steps(p);
    result.stages.push_back({"Merged", result.explanation.steps.size(), millis_since(start)});
    check(result.explanation.to_proof(), "Merged");
    result.oracle_calls = oracle.calls() - calls_before;
    return result;
}

} // namespace p2s
