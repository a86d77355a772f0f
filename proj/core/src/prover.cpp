#include "p2s/prover.hpp"

#include "engine.hpp"

#include <sstream>
#include <stdexcept>
#include <vector>

namespace p2s {

namespace {

    class TextSink final : public detail::ProofSink {
    public:
        explicit TextSink(const SolverModel& model) : model_(model) { out_ << "p drcp\n"; }

        std::size_t inference(std::span<const Atomic> clause, std::uint32_t origin) override
        {
            // A constraint false on its own derives the empty clause, which the
            // grammar cannot state as a step. The conclusion cites it directly.
            if (clause.empty())
                return input_ref | origin;
            out_ << "i ";
            write_clause(clause);
            out_ << " c:" << model_.constraints.at(origin).id << '\n';
            return ++steps_;
        }

        std::size_t nogood(std::span<const Atomic> clause, std::span<const std::size_t> steps) override
        {
            for (std::size_t s : steps)
                if (s & input_ref)
                    throw std::logic_error("nogood cites an input constraint");
            out_ << "n ";
            write_clause(clause);
            out_ << ' ';
            write_refs(steps);
            out_ << '\n';
            return ++steps_;
        }

        void conclude(std::span<const std::size_t> steps) override
        {
            std::vector<std::size_t> derived;
            std::vector<std::size_t> inputs;
            for (std::size_t s : steps)
                (s & input_ref ? inputs : derived).push_back(s & ~input_ref);
            out_ << "c UNSAT";
            char sep = ' ';
            for (std::size_t s : derived) {
                out_ << sep << "s:" << s;
                sep = ',';
            }
            for (std::size_t c : inputs) {
                out_ << sep << "c:" << model_.constraints.at(c).id;
                sep = ',';
            }
            out_ << '\n';
            ++steps_;
        }

        [[nodiscard]] std::string text() const { return out_.str(); }

    private:
        void write_clause(std::span<const Atomic> clause)
        {
            for (std::size_t i = 0; i < clause.size(); ++i)
                out_ << (i ? "|" : "") << format_atom(clause[i], model_.vars);
        }

        void write_refs(std::span<const std::size_t> steps)
        {
            for (std::size_t i = 0; i < steps.size(); ++i)
                out_ << (i ? ",s:" : "s:") << steps[i];
        }

        static constexpr std::size_t input_ref = std::size_t{1} << (sizeof(std::size_t) * 8 - 1);

        const SolverModel& model_;
        std::ostringstream out_;
        std::size_t steps_ = 0;
    };

} // namespace

ProverResult solve_with_proof(const SolverModel& model, const ProverOptions& options)
{
    TextSink sink(model);
    detail::EngineOptions engine_options;
    engine_options.conflict_budget = options.budget;
    engine_options.sink = &sink;
    engine_options.log_all = options.log_all;
    auto domains = domains_of(model.vars);
    detail::Engine engine(domains, engine_options);
    for (std::size_t i = 0; i < model.constraints.size(); ++i)
        engine.add_body(model.constraints[i].body, static_cast<std::uint32_t>(i));

    ProverResult result;
    detail::SearchStatus status = engine.solve();
    result.conflicts = engine.conflicts();
    switch (status) {
    case detail::SearchStatus::Sat: {
        Assignment full = engine.assignment();
        Assignment a(model.vars.size());
        for (std::uint32_t v = 0; v < model.vars.size(); ++v)
            a.set(VarId{v}, full.at(VarId{v}));
        for (const auto& c : model.constraints)
            if (!eval(c.body, a))
                throw std::logic_error("prover assignment violates " + c.id);
        result.status = ProverResult::Status::Sat;
        result.assignment = std::move(a);
        result.proof = "p drcp\n";
        break;
    }
    case detail::SearchStatus::Unsat:
        result.status = ProverResult::Status::Unsat;
        result.proof = sink.text();
        break;
    case detail::SearchStatus::BudgetExceeded: result.status = ProverResult::Status::BudgetExceeded; break;
    }
    return result;
}

} // namespace p2s
