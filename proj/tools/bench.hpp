#pragma once

#include "p2s/flatten.hpp"
#include "p2s/generate.hpp"
#include "p2s/pipeline.hpp"

#include <string>
#include <vector>

namespace p2s::cli {

struct BenchOptions {
    InstanceKind suite = InstanceKind::Sudoku4;
    std::size_t n = 10;
    std::uint64_t seed = 1;
    std::vector<PipelineVariant> variants;
    std::size_t jobs = 1;
    bool check = false;
    FlattenOptions flatten;
};

struct BenchRow {
    std::string suite;
    std::uint64_t seed = 0;
    std::string variant;
    bool ok = false;
    std::string error;
    ExplanationMetrics metrics;
    double solve_ms = 0;
    std::vector<StageRecord> stages;
    std::uint64_t oracle_calls = 0;
};

/// One row per instance and variant, ordered by seed then variant.
std::vector<BenchRow> run_bench(const BenchOptions& options);

std::string format_bench_rows(const std::vector<BenchRow>& rows);
/// Average and median of len and maxstep per suite and variant.
std::string format_bench_summary(const std::vector<BenchRow>& rows);

} // namespace p2s::cli
