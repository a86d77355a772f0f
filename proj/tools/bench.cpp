#include "bench.hpp"

#include "p2s/prover.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

namespace p2s::cli {

namespace {

    std::vector<BenchRow> run_instance(const BenchOptions& options, std::uint64_t seed)
    {
        std::vector<BenchRow> rows;
        auto fail_all = [&](const std::string& message) {
            for (const auto& v : options.variants)
                rows.push_back({to_string(options.suite), seed, v.name(), false, message, {}, 0, {}, 0});
            return rows;
        };
        UserModel model;
        try {
            model = generate_instance(options.suite, seed);
        }
        catch (const std::exception& e) {
            return fail_all(e.what());
        }
        SolverModel solver = flatten(model, options.flatten);
        auto start = std::chrono::steady_clock::now();
        ProverResult proved = solve_with_proof(solver);
        double solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (proved.status != ProverResult::Status::Unsat)
            return fail_all(proved.status == ProverResult::Status::Sat ? "model is satisfiable" : "budget exceeded");
        AbstractProof proof = parse_drcp(proved.proof, solver);
        for (const auto& v : options.variants) {
            BenchRow row{to_string(options.suite), seed, v.name(), false, {}, {}, solve_ms, {}, 0};
            try {
                Oracle oracle(domains_of(solver.vars));
                PipelineResult r = run_pipeline(solver, proof, v, oracle, {options.check});
                row.ok = true;
                row.metrics = r.explanation.metrics;
                row.stages = std::move(r.stages);
                row.oracle_calls = r.oracle_calls;
            }
            catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

    std::string short_stage(const std::string& name)
    {
        static const std::map<std::string, std::string> names{
            {"No aux vars", "simplify"},
            {"User cons", "lift"},
            {"Trimmed", "trim"},
            {"Minimized 1", "minimize1"},
            {"Domain reductions", "domain"},
            {"Minimized 2", "minimize2"},
            {"Merged", "merge"},
        };
        auto it = names.find(name);
        return it == names.end() ? name : it->second;
    }

    std::string ms(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }

    double median(std::vector<double> v)
    {
        if (v.empty())
            return 0;
        std::sort(v.begin(), v.end());
        std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
    }

} // namespace

std::vector<BenchRow> run_bench(const BenchOptions& options)
{
    std::vector<std::vector<BenchRow>> per_instance(options.n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < options.n; i = next++)
            per_instance[i] = run_instance(options, options.seed + i);
    };
    std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, options.n));
    if (jobs == 1)
        worker();
    else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    std::vector<BenchRow> rows;
    for (auto& r : per_instance)
        rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    return rows;
}

std::string format_bench_rows(const std::vector<BenchRow>& rows)
{
    std::ostringstream out;
    out << "suite,seed,variant,len,maxstep,stage_times_ms,oracle_calls\n";
    for (const auto& r : rows) {
        out << r.suite << ',' << r.seed << ',' << r.variant << ',';
        if (!r.ok) {
            std::string message = r.error;
            std::replace(message.begin(), message.end(), ',', ';');
            out << "error,," << message << ",\n";
            continue;
        }
        out << r.metrics.sequence_length << ',' << r.metrics.max_stepsize << ",solve=" << ms(r.solve_ms);
        for (const auto& s : r.stages)
            if (s.name != "Proof")
                out << ';' << short_stage(s.name) << '=' << ms(s.millis);
        out << ',' << r.oracle_calls << '\n';
    }
    return out.str();
}

std::string format_bench_summary(const std::vector<BenchRow>& rows)
{
    std::ostringstream out;
    out << "suite,variant,instances,failures,avg_len,median_len,avg_maxstep,median_maxstep\n";
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& r : rows)
        if (std::find(keys.begin(), keys.end(), std::pair(r.suite, r.variant)) == keys.end())
            keys.emplace_back(r.suite, r.variant);
    for (const auto& [suite, variant] : keys) {
        std::vector<double> len, step;
        std::size_t failures = 0;
        for (const auto& r : rows) {
            if (r.suite != suite || r.variant != variant)
                continue;
            if (!r.ok) {
                ++failures;
                continue;
            }
            len.push_back(static_cast<double>(r.metrics.sequence_length));
            step.push_back(static_cast<double>(r.metrics.max_stepsize));
        }
        auto avg = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v)
                s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%.2f,%.1f,%.2f,%.1f\n", suite.c_str(), variant.c_str(),
            len.size() + failures, failures, avg(len), median(len), avg(step), median(step));
        out << buf;
    }
    return out.str();
}

} // namespace p2s::cli
