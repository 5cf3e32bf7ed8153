#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "../dataset.hpp"
#include "../error.hpp"
#include "../expression.hpp"

namespace usr::gp {

/// Everything that determines one GP run.
struct GPConfig {
    std::size_t population_size { 1000 };
    std::size_t max_generations { 150 };
    std::size_t tournament_group_size { 7 };
    std::size_t elitism_count { 1 };
    double mutation_rate { 0.15 };
    std::size_t max_size { 100 };
    std::size_t max_depth { 10 };
    std::vector<Opcode> function_set { default_function_set() };
    double constant_min { -20.0 };
    double constant_max { 20.0 };

    std::size_t target_column { 0 };
    std::vector<std::size_t> input_columns;
    Partition partition;
    std::uint64_t seed { 0 };
};

/// Symbols available to tree builders.
struct PrimitiveSet {
    std::vector<Opcode> functions;
    std::vector<std::size_t> variables;
    double constant_min { -20.0 };
    double constant_max { 20.0 };
};

inline PrimitiveSet primitives(const GPConfig& c)
{
    return { c.function_set, c.input_columns, c.constant_min, c.constant_max };
}

/// Checks that do not need the data.
inline void validate(const GPConfig& c)
{
    if (c.population_size == 0) {
        throw ConfigError("population_size", "must be positive");
    }
    if (c.tournament_group_size == 0) {
        throw ConfigError("tournament_group_size", "must be positive");
    }
    if (c.population_size < c.tournament_group_size) {
        throw ConfigError("population_size", "must be at least tournament_group_size (" + std::to_string(c.tournament_group_size) + ")");
    }
    if (c.elitism_count >= c.population_size) {
        throw ConfigError("elitism_count", "must be smaller than population_size");
    }
    if (!(c.mutation_rate >= 0.0 && c.mutation_rate <= 1.0)) {
        throw ConfigError("mutation_rate", "must lie in [0, 1]");
    }
    if (c.max_size == 0) {
        throw ConfigError("max_size", "must be positive");
    }
    if (c.max_depth == 0) {
        throw ConfigError("max_depth", "must be positive");
    }
    for (auto op : c.function_set) {
        if (is_terminal(op)) {
            throw ConfigError("function_set", std::string(opcode_name(op)) + " is not a function");
        }
    }
    if (!(c.constant_min <= c.constant_max) || !std::isfinite(c.constant_min) || !std::isfinite(c.constant_max)) {
        throw ConfigError("constant_range", "needs finite bounds with min <= max");
    }
    if (c.input_columns.empty()) {
        throw ConfigError("input_columns", "at least one input variable is required");
    }
    if (std::find(c.input_columns.begin(), c.input_columns.end(), c.target_column) != c.input_columns.end()) {
        throw ConfigError("input_columns", "must not contain the target column");
    }
}

/// Full validation against the table, including the zero-variance target check on every range.
inline void validate(const GPConfig& c, const Dataset& data)
{
    validate(c);
    if (c.target_column >= data.cols()) {
        throw ConfigError("target_column", "column " + std::to_string(c.target_column) + " does not exist");
    }
    for (auto col : c.input_columns) {
        if (col >= data.cols()) {
            throw ConfigError("input_columns", "column " + std::to_string(col) + " does not exist");
        }
    }
    validate_partition(c.partition, data.rows());
    const std::pair<const char*, RowRange> ranges[] = { { "fitness", c.partition.fitness },
        { "validation", c.partition.validation },
        { "test", c.partition.test } };
    for (const auto& [label, rows] : ranges) {
        auto y = data.column(c.target_column, rows);
        if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
            throw ConfigError("target_column", "target '" + data.name(c.target_column) + "' is constant on the " + label + " rows " + to_string(rows) + "; R^2 is undefined");
        }
    }
}

} // namespace usr::gp
