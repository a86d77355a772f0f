#include "support.hpp"

#include "bench.hpp"
#include "cli.hpp"

#include "p2s/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace p2s {
namespace {

    struct Outcome {
        int code = 0;
        std::string out, err;
    };

    Outcome run(std::vector<std::string> args)
    {
        std::ostringstream out, err;
        Outcome r;
        r.code = cli::run(args, out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    class TempDir {
    public:
        TempDir()
        {
            path_ = std::filesystem::temp_directory_path() /
                ("p2s_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
                    ::testing::UnitTest::GetInstance()->current_test_info()->name());
            std::filesystem::create_directories(path_);
        }
        ~TempDir() { std::filesystem::remove_all(path_); }

        std::string write(const std::string& name, const std::string& text) const
        {
            auto p = path_ / name;
            std::ofstream(p) << text;
            return p.string();
        }

    private:
        std::filesystem::path path_;
    };

    const std::string model = testing::data_path("jobshop.mod");
    const std::string proof = testing::data_path("jobshop.drcp");

    TEST(Cli, ExplainGolden)
    {
        Outcome r = run({"explain", model, proof, "--variant", "trim+minglob", "--check"});
        ASSERT_EQ(r.code, cli::ok) << r.err;
        EXPECT_NE(r.out.find("Step 3: false"), std::string::npos) << r.out;
        EXPECT_EQ(r.out.find("Step 4"), std::string::npos);
        EXPECT_NE(r.out.find("len=3 maxstep="), std::string::npos);
    }

    TEST(Cli, ExplainAllVariants)
    {
        for (const auto& v : PipelineVariant::all()) {
            Outcome r = run({"explain", model, proof, "--variant", v.name(), "--check"});
            EXPECT_EQ(r.code, cli::ok) << v.name() << r.err;
        }
    }

    TEST(Cli, StructuredOutputRoundTrips)
    {
        Outcome r = run({"explain", model, proof, "--variant", "trim", "--format", "structured"});
        ASSERT_EQ(r.code, cli::ok) << r.err;
        EXPECT_EQ(r.err, "len=4 maxstep=1\n");
        SolverModel m = flatten(testing::golden_model());
        ExplanationSequence e = parse_explanation_json(r.out, m);
        EXPECT_EQ(e.metrics, (ExplanationMetrics{4, 1}));
        EXPECT_EQ(format_explanation_json(e, m), r.out);
    }

    TEST(Cli, ExplainSolvedSudoku)
    {
        TempDir dir;
        auto sudoku = dir.write("s.mod", serialize_model(generate_instance(InstanceKind::Sudoku4, 1)));
        Outcome r = run({"explain", sudoku, "--solve", "--variant", "trim+minloc", "--check"});
        EXPECT_EQ(r.code, cli::ok) << r.err;
        r = run({"explain", sudoku, "--solve", "--variant", "trim+minloc", "--decompose-alldiff", "--log-all", "--check"});
        EXPECT_EQ(r.code, cli::ok) << r.err;
    }

    TEST(Cli, SatisfiableModel)
    {
        TempDir dir;
        auto m = dir.write("m.mod", "var x 0..3\ncon a: clause x >= 2\n");
        Outcome r = run({"explain", m, "--solve", "--variant", "trim"});
        EXPECT_EQ(r.code, cli::satisfiable);
        EXPECT_EQ(r.out, "model is satisfiable\n");
        r = run({"solve", m});
        EXPECT_EQ(r.code, cli::satisfiable);
        EXPECT_NE(r.out.find("x="), std::string::npos);
    }

    TEST(Cli, ExitCodes)
    {
        TempDir dir;
        auto bad_model = dir.write("bad.mod", "var x 0..3\ncon a: clause y <= 1\n");
        Outcome r = run({"explain", bad_model, proof});
        EXPECT_EQ(r.code, cli::parse_error);
        EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;

        EXPECT_EQ(run({"explain", model, proof, "--variant", "nope"}).code, cli::parse_error);
        EXPECT_EQ(run({"explain", model}).code, cli::parse_error);
        EXPECT_EQ(run({"explain", model, dir.write("x.drcp", "q junk\n")}).code, cli::parse_error);
        EXPECT_EQ(run({"explain", model, dir.write("fwd.drcp", "n a<=3 s:2\n")}).code, cli::invalid_proof);
        EXPECT_EQ(run({"explain", model, dir.write("open.drcp", "i a<=3|b>=7 c:p1\n")}).code, cli::invalid_proof);
        EXPECT_EQ(run({"explain", "/nonexistent/file.mod", proof}).code, cli::parse_error);
        EXPECT_EQ(run({"frobnicate"}).code, cli::parse_error);
        EXPECT_EQ(run({}).code, cli::parse_error);
        EXPECT_EQ(run({"--help"}).code, cli::ok);

        // A wrong step is caught by --check.
        auto wrong = dir.write("wrong.drcp", "i a<=2 c:p1\nn a<=2 s:1\ni a<=-1|b>=3 c:p1\nn b>=3 s:3\n"
                                             "i c<=2|d>=2 c:p2\nc UNSAT s:2,s:4,s:5\n");
        EXPECT_EQ(run({"explain", model, wrong, "--variant", "trim", "--check"}).code, cli::invalid_proof);
        EXPECT_EQ(run({"proof", "check", wrong, model}).code, cli::invalid_proof);
    }

    TEST(Cli, BudgetExceeded)
    {
        TempDir dir;
        auto m = dir.write("p.mod", "var a 0..2\nvar b 0..2\nvar c 0..2\nvar d 0..2\ncon k: alldifferent(a, b, c, d)\n");
        ::setenv("P2S_BUDGET", "0", 1);
        Outcome r = run({"explain", m, "--solve", "--decompose-alldiff", "--variant", "trim"});
        ::unsetenv("P2S_BUDGET");
        EXPECT_EQ(r.code, cli::budget_exceeded) << r.err;
    }

    TEST(Cli, ProofCheckTrimStats)
    {
        Outcome r = run({"proof", "check", proof, model});
        EXPECT_EQ(r.code, cli::ok);
        EXPECT_EQ(r.out, "14/14 steps valid\n");

        r = run({"proof", "trim", proof, model});
        EXPECT_EQ(r.code, cli::ok);
        EXPECT_EQ(r.out, testing::golden_proof_text());

        r = run({"proof", "stats", proof, model, "--variant", "trim+minglob"});
        ASSERT_EQ(r.code, cli::ok) << r.err;
        EXPECT_EQ(r.out,
            "Proof,No aux vars,User cons,Trimmed,Domain reductions,Minimized 2,Merged\n14,8,8,8,5,3,3\n");
    }

    TEST(Cli, SolveThenCheck)
    {
        TempDir dir;
        Outcome r = run({"solve", model});
        ASSERT_EQ(r.code, cli::ok);
        auto p = dir.write("solved.drcp", r.out);
        Outcome c = run({"proof", "check", p, model});
        EXPECT_EQ(c.code, cli::ok) << c.err;
        Outcome t = run({"proof", "trim", p, model});
        EXPECT_EQ(run({"proof", "trim", dir.write("t.drcp", t.out), model}).out, t.out);
    }

    TEST(Cli, Generate)
    {
        Outcome r = run({"generate", "--kind", "mutated", "--seed", "4"});
        ASSERT_EQ(r.code, cli::ok);
        EXPECT_EQ(parse_model(r.out), generate_instance(InstanceKind::Mutated, 4));
        EXPECT_EQ(run({"generate", "--kind", "chess"}).code, cli::parse_error);
    }

    TEST(Cli, BenchRowsAndSummary)
    {
        Outcome r = run({"bench", "--suite", "jobshop", "-n", "3", "--seed", "2", "--variants", "trim,trim+minloc", "--jobs", "2"});
        ASSERT_EQ(r.code, cli::ok) << r.err;
        std::istringstream lines(r.out);
        std::string header;
        std::getline(lines, header);
        EXPECT_EQ(header, "suite,seed,variant,len,maxstep,stage_times_ms,oracle_calls");
        std::string row;
        std::getline(lines, row);
        EXPECT_EQ(row.rfind("jobshop,2,trim,", 0), 0u) << row;
        EXPECT_NE(row.find("solve="), std::string::npos);
        EXPECT_EQ(row.substr(row.rfind(',') + 1), "0");
        EXPECT_NE(r.out.find("suite,variant,instances,failures,avg_len"), std::string::npos);
        EXPECT_NE(r.out.find("jobshop,trim+minloc,3,0,"), std::string::npos);
        EXPECT_EQ(run({"bench", "--suite", "nope"}).code, cli::parse_error);
    }

    TEST(Bench, EmptyAndDeterministic)
    {
        cli::BenchOptions o;
        o.n = 0;
        o.variants = {*PipelineVariant::parse("trim")};
        EXPECT_TRUE(cli::run_bench(o).empty());

        o.n = 4;
        o.suite = InstanceKind::Mutated;
        o.variants = {*PipelineVariant::parse("trim"), *PipelineVariant::parse("trim+minglob")};
        auto a = cli::run_bench(o);
        o.jobs = 3;
        auto b = cli::run_bench(o);
        ASSERT_EQ(a.size(), 8u);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].seed, b[i].seed);
            EXPECT_EQ(a[i].variant, b[i].variant);
            EXPECT_EQ(a[i].metrics, b[i].metrics);
            EXPECT_EQ(a[i].oracle_calls, b[i].oracle_calls);
            EXPECT_TRUE(a[i].ok) << a[i].error;
        }
    }

} // namespace
} // namespace p2s
