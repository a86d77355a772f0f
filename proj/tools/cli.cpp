#include "cli.hpp"

#include "bench.hpp"

#include "p2s/flatten.hpp"
#include "p2s/generate.hpp"
#include "p2s/mus.hpp"
#include "p2s/oracle.hpp"
#include "p2s/pipeline.hpp"
#include "p2s/proof.hpp"
#include "p2s/prover.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace p2s::cli {

namespace {

    /// Ends a command with the given exit code after printing the message.
    struct Exit {
        int code;
        std::string message;
    };

    std::string read_file(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Exit{parse_error, "cannot read " + path};
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    UserModel load_model(const std::string& path, std::ostream& err)
    {
        std::vector<std::string> warnings;
        try {
            UserModel m = parse_model(read_file(path), &warnings);
            for (const auto& w : warnings)
                err << path << ": warning: " << w << '\n';
            return m;
        }
        catch (const ParseError& e) {
            throw Exit{parse_error, path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": "
                    + e.what()};
        }
    }

    int proof_error_code(const ProofError& e)
    {
        return e.kind() == ProofError::Kind::Syntax ? parse_error : invalid_proof;
    }

    AbstractProof load_proof(const std::string& path, const SolverModel& model)
    {
        try {
            return parse_drcp(read_file(path), model);
        }
        catch (const ProofError& e) {
            throw Exit{proof_error_code(e), path + ": " + e.what()};
        }
    }

    PipelineVariant variant_named(const std::string& name)
    {
        auto v = PipelineVariant::parse(name);
        if (!v)
            throw Exit{parse_error, "unknown variant '" + name + "'"};
        return *v;
    }

    std::string format_witness(const Assignment& a, const SolverModel& model)
    {
        std::string out;
        for (std::uint32_t v = 0; v < a.size() && v < model.vars.size(); ++v)
            if (auto value = a.get(VarId{v}))
                out += (out.empty() ? "" : " ") + model.vars[v].name + "=" + std::to_string(*value);
        return out;
    }

    /// Runs `body`, translating library errors into exit codes.
    int guarded(std::ostream& err, const std::function<int()>& body)
    {
        try {
            return body();
        }
        catch (const Exit& e) {
            if (!e.message.empty())
                err << e.message << '\n';
            return e.code;
        }
        catch (const ParseError& e) {
            err << "line " << e.line() << ":" << e.column() << ": " << e.what() << '\n';
            return parse_error;
        }
        catch (const ProofError& e) {
            err << e.what() << '\n';
            return proof_error_code(e);
        }
        catch (const MusError& e) {
            err << e.what() << '\n';
            return e.kind() == MusError::Kind::BudgetExceeded ? budget_exceeded : invalid_proof;
        }
        catch (const GenerationError& e) {
            err << e.what() << '\n';
            return budget_exceeded;
        }
    }

    struct ExplainArgs {
        std::string model;
        std::string proof;
        bool solve = false;
        std::string variant = "trim+minglob";
        bool decompose_alldiff = false;
        bool selector_disjunctions = false;
        std::string format = "text";
        bool check = false;
        bool log_all = false;
    };

    int explain(const ExplainArgs& a, std::ostream& out, std::ostream& err)
    {
        PipelineVariant variant = variant_named(a.variant);
        UserModel user = load_model(a.model, err);
        SolverModel solver = flatten(user, {a.decompose_alldiff, a.selector_disjunctions});
        AbstractProof proof;
        if (a.solve) {
            ProverResult r = solve_with_proof(solver, {a.log_all, budget_from_env()});
            if (r.status == ProverResult::Status::Sat) {
                out << "model is satisfiable\n";
                return satisfiable;
            }
            if (r.status == ProverResult::Status::BudgetExceeded)
                throw Exit{budget_exceeded, "solver budget exceeded"};
            proof = parse_drcp(r.proof, solver);
        }
        else {
            if (a.proof.empty())
                throw Exit{parse_error, "give a proof file or --solve"};
            proof = load_proof(a.proof, solver);
        }
        if (!proof.is_refutation())
            throw Exit{invalid_proof, "proof does not derive false"};
        check_references(proof, solver);

        Oracle oracle(domains_of(solver.vars));
        PipelineResult r = run_pipeline(solver, proof, variant, oracle, {a.check});
        std::string metrics = "len=" + std::to_string(r.explanation.metrics.sequence_length)
            + " maxstep=" + std::to_string(r.explanation.metrics.max_stepsize);
        if (a.format == "structured") {
            out << format_explanation_json(r.explanation, solver);
            err << metrics << '\n';
        }
        else {
            out << format_explanation_text(r.explanation, solver);
            out << metrics << '\n';
        }
        return ok;
    }

    int proof_check(const std::string& proof_path, const std::string& model_path, std::ostream& out, std::ostream& err)
    {
        SolverModel solver = flatten(load_model(model_path, err));
        AbstractProof proof = load_proof(proof_path, solver);
        Oracle oracle(domains_of(solver.vars));
        std::size_t valid = 0;
        bool resource = false;
        for (std::size_t i = 0; i < proof.steps.size(); ++i) {
            StepCheck c = check_step(proof, i, solver, oracle);
            if (c.valid())
                ++valid;
            else if (c.status == StepCheck::Status::ResourceLimit) {
                resource = true;
                err << "step " << i + 1 << ": oracle budget exceeded\n";
            }
            else
                err << "step " << i + 1 << " invalid; witness: " << format_witness(*c.witness, solver) << '\n';
        }
        out << valid << '/' << proof.steps.size() << " steps valid\n";
        if (!proof.is_refutation())
            out << "proof does not derive false\n";
        if (valid == proof.steps.size())
            return ok;
        return resource ? budget_exceeded : invalid_proof;
    }

    int proof_trim(const std::string& proof_path, const std::string& model_path, std::ostream& out, std::ostream& err)
    {
        SolverModel solver = flatten(load_model(model_path, err));
        out << serialize_proof(trim(load_proof(proof_path, solver)), solver);
        return ok;
    }

    int proof_stats(const std::string& proof_path, const std::string& model_path, const std::string& variant_name,
        std::ostream& out, std::ostream& err)
    {
        PipelineVariant variant = variant_named(variant_name);
        SolverModel solver = flatten(load_model(model_path, err));
        AbstractProof proof = load_proof(proof_path, solver);
        Oracle oracle(domains_of(solver.vars));
        PipelineResult r = run_pipeline(solver, proof, variant, oracle);
        std::string header, sizes;
        for (std::size_t i = 0; i < r.stages.size(); ++i) {
            header += (i ? "," : "") + r.stages[i].name;
            sizes += (i ? "," : "") + std::to_string(r.stages[i].size);
        }
        out << header << '\n' << sizes << '\n';
        return ok;
    }

    int solve(const std::string& model_path, bool log_all, bool decompose, std::ostream& out, std::ostream& err)
    {
        SolverModel solver = flatten(load_model(model_path, err), {decompose, false});
        ProverResult r = solve_with_proof(solver, {log_all, budget_from_env()});
        switch (r.status) {
        case ProverResult::Status::Sat:
            out << "model is satisfiable\n" << format_witness(*r.assignment, solver) << '\n';
            return satisfiable;
        case ProverResult::Status::Unsat: out << r.proof; return ok;
        case ProverResult::Status::BudgetExceeded: break;
        }
        throw Exit{budget_exceeded, "solver budget exceeded"};
    }

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Turns unsatisfiability proofs of constraint models into step-wise explanations.", "p2s"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 model satisfiable, 2 parse error, 3 invalid proof, 4 budget exceeded.\n"
               "P2S_BUDGET overrides the oracle conflict budget.");

    ExplainArgs ea;
    auto* explain_cmd = app.add_subcommand("explain", "Explain why a model is unsatisfiable");
    explain_cmd->add_option("model", ea.model, "Model file")->required();
    explain_cmd->add_option("proof", ea.proof, "DRCP proof file");
    explain_cmd->add_flag("--solve", ea.solve, "Produce the proof with the built-in solver");
    explain_cmd->add_option("--variant", ea.variant, "trim, trim+minloc, trim+minglob, minloc, minglob, minloc+minloc, minglob+minloc")
        ->capture_default_str();
    explain_cmd->add_flag("--decompose-alldiff", ea.decompose_alldiff, "Flatten alldifferent into pairwise !=");
    explain_cmd->add_flag("--selector-disjunctions", ea.selector_disjunctions, "One selector per disjunct");
    explain_cmd->add_option("--format", ea.format, "text or structured")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();
    explain_cmd->add_flag("--check", ea.check, "Oracle-check every step of every stage");
    explain_cmd->add_flag("--log-all", ea.log_all, "With --solve, log every propagation");

    std::string proof_path, model_path, stats_variant = "trim+minglob";
    auto* proof_cmd = app.add_subcommand("proof", "Inspect a DRCP proof");
    proof_cmd->require_subcommand(1);
    auto* check_cmd = proof_cmd->add_subcommand("check", "Oracle-check every step");
    auto* trim_cmd = proof_cmd->add_subcommand("trim", "Print the trimmed proof");
    auto* stats_cmd = proof_cmd->add_subcommand("stats", "Proof size after each pipeline stage");
    for (auto* c : {check_cmd, trim_cmd, stats_cmd}) {
        c->add_option("proof", proof_path, "DRCP proof file")->required();
        c->add_option("model", model_path, "Model file")->required();
    }
    stats_cmd->add_option("--variant", stats_variant, "Pipeline variant")->capture_default_str();

    std::string suite = "sudoku4", variants = "trim,trim+minloc,trim+minglob";
    BenchOptions bo;
    bool summary_only = false;
    auto* bench_cmd = app.add_subcommand("bench", "Run a generated suite through pipeline variants");
    bench_cmd->add_option("--suite", suite, "sudoku4, sudoku9, jobshop or mutated")->capture_default_str();
    bench_cmd->add_option("-n", bo.n, "Number of instances")->capture_default_str();
    bench_cmd->add_option("--seed", bo.seed, "First seed")->capture_default_str();
    bench_cmd->add_option("--variants", variants, "Comma-separated variant names")->capture_default_str();
    bench_cmd->add_option("--jobs", bo.jobs, "Parallel workers")->capture_default_str();
    bench_cmd->add_flag("--check", bo.check, "Oracle-check every stage");
    bench_cmd->add_flag("--decompose-alldiff", bo.flatten.decompose_alldiff, "Flatten alldifferent into pairwise !=");
    bench_cmd->add_flag("--summary-only", summary_only, "Print only the aggregate table");

    std::string kind = "sudoku4";
    std::uint64_t gen_seed = 1;
    GenerateOptions go;
    auto* gen_cmd = app.add_subcommand("generate", "Print a generated unsatisfiable model");
    gen_cmd->add_option("--kind", kind, "sudoku4, sudoku9, jobshop or mutated")->capture_default_str();
    gen_cmd->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen_cmd->add_option("--jobs", go.jobs, "Jobshop jobs")->capture_default_str();
    gen_cmd->add_option("--tasks", go.tasks, "Jobshop tasks per job")->capture_default_str();

    std::string solve_model;
    bool solve_log_all = false, solve_decompose = false;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a model, printing a proof when unsatisfiable");
    solve_cmd->add_option("model", solve_model, "Model file")->required();
    solve_cmd->add_flag("--log-all", solve_log_all, "Log every propagation");
    solve_cmd->add_flag("--decompose-alldiff", solve_decompose, "Flatten alldifferent into pairwise !=");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e) {
        // --help and --version exit cleanly; every other usage error is a parse error.
        return app.exit(e, out, err) == 0 ? ok : parse_error;
    }

    return guarded(err, [&]() -> int {
        if (explain_cmd->parsed())
            return explain(ea, out, err);
        if (check_cmd->parsed())
            return proof_check(proof_path, model_path, out, err);
        if (trim_cmd->parsed())
            return proof_trim(proof_path, model_path, out, err);
        if (stats_cmd->parsed())
            return proof_stats(proof_path, model_path, stats_variant, out, err);
        if (bench_cmd->parsed()) {
            auto k = parse_instance_kind(suite);
            if (!k)
                throw Exit{parse_error, "unknown suite '" + suite + "'"};
            bo.suite = *k;
            std::stringstream names(variants);
            for (std::string v; std::getline(names, v, ',');)
                bo.variants.push_back(variant_named(v));
            auto rows = run_bench(bo);
            if (!summary_only)
                out << format_bench_rows(rows) << '\n';
            out << format_bench_summary(rows);
            return ok;
        }
        if (gen_cmd->parsed()) {
            auto k = parse_instance_kind(kind);
            if (!k)
                throw Exit{parse_error, "unknown kind '" + kind + "'"};
            out << serialize_model(generate_instance(*k, gen_seed, go));
            return ok;
        }
        return solve(solve_model, solve_log_all, solve_decompose, out, err);
    });
}

} // namespace p2s::cli
