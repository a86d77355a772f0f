#pragma once

#include "p2s/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace p2s {

enum class InstanceKind : std::uint8_t { Sudoku4, Sudoku9, Jobshop, Mutated };

std::string to_string(InstanceKind kind);
std::optional<InstanceKind> parse_instance_kind(std::string_view name);

struct GenerateOptions {
    std::size_t jobs = 3;
    std::size_t tasks = 2;
    std::size_t retries = 200;
};

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deterministic in (kind, seed). Every returned model is unsatisfiable
/// according to the oracle.
///  - sudoku: hints from a random solution plus one wrong hint that keeps
///    each row, column and block free of repeated hints
///  - jobshop: start-time domains cut to one below the optimal makespan
///  - mutated: tight random constraints around a planted solution with one
///    `<=` tightened by one; every constraint stays satisfiable on its own
UserModel generate_instance(InstanceKind kind, std::uint64_t seed, const GenerateOptions& options = {});

} // namespace p2s
