#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "expression.hpp"

namespace usr {

// Frequency-based variable relevance. A population is any range whose elements are
// expression trees or carry one in a `tree` member.

template <class T>
concept HasTree = requires(const T& t) {
    { t.tree } -> std::convertible_to<const ExpressionTree&>;
};

inline const ExpressionTree& tree_of(const ExpressionTree& t) noexcept { return t; }

template <HasTree T>
const ExpressionTree& tree_of(const T& t) noexcept
{
    return t.tree;
}

template <class R>
concept Population = std::ranges::input_range<R> && requires(const std::ranges::range_value_t<R>& m) {
    { tree_of(m) } -> std::same_as<const ExpressionTree&>;
};

/// Sum of count_refs(column, m) over every model m of the population.
template <Population R>
std::size_t population_frequency(std::size_t column, const R& population)
{
    std::size_t total = 0;
    for (const auto& m : population) {
        total += count_refs(column, tree_of(m));
    }
    return total;
}

/// Share of all variable references (restricted to `inputs`) that point at each input.
/// Populations without any reference yield the all-zero vector.
template <Population R>
std::vector<double> relative_frequency(const R& population, std::span<const std::size_t> inputs)
{
    if (inputs.empty()) {
        throw Error("relative_frequency: no input columns");
    }
    std::vector<std::size_t> counts(inputs.size(), 0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        counts[i] = population_frequency(inputs[i], population);
    }
    std::size_t total = 0;
    for (auto c : counts) {
        total += c;
    }
    std::vector<double> rel(inputs.size(), 0.0);
    if (total == 0) {
        return rel;
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        rel[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return rel;
}

struct GenerationRelevance {
    std::size_t generation { 0 };
    std::vector<double> relative_frequency;
};

/// Component-wise mean of the relative frequencies over all snapshots of a run.
inline std::vector<double> run_relevance(std::span<const std::vector<double>> trajectory)
{
    if (trajectory.empty()) {
        throw Error("run_relevance: empty trajectory");
    }
    const std::size_t n = trajectory.front().size();
    std::vector<double> sum(n, 0.0);
    for (const auto& snapshot : trajectory) {
        if (snapshot.size() != n) {
            throw Error("run_relevance: snapshot has " + std::to_string(snapshot.size()) + " entries, expected " + std::to_string(n));
        }
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += snapshot[i];
        }
    }
    for (auto& s : sum) {
        s /= static_cast<double>(trajectory.size());
    }
    return sum;
}

inline std::vector<double> run_relevance(std::span<const GenerationRelevance> trajectory)
{
    std::vector<std::vector<double>> rows;
    rows.reserve(trajectory.size());
    for (const auto& g : trajectory) {
        rows.push_back(g.relative_frequency);
    }
    return run_relevance(std::span<const std::vector<double>>(rows));
}

struct AggregatedRelevance {
    std::string target;
    std::size_t target_column { 0 };
    std::vector<std::string> inputs; // dataset column order, target excluded
    std::vector<double> mean;
    std::vector<double> stddev; // sample standard deviation; 0 for a single run
    std::size_t repetitions { 0 };
};

/// Mean and sample standard deviation of per-run relevance vectors, reduced in the given order.
inline AggregatedRelevance aggregate_runs(std::span<const std::vector<double>> runs)
{
    if (runs.empty()) {
        throw Error("aggregate_runs: no runs");
    }
    const std::size_t n = runs.front().size();
    for (const auto& r : runs) {
        if (r.size() != n) {
            throw Error("aggregate_runs: run relevance vectors differ in length (" + std::to_string(r.size()) + " vs " + std::to_string(n) + ")");
        }
    }
    AggregatedRelevance agg;
    agg.repetitions = runs.size();
    agg.mean.assign(n, 0.0);
    agg.stddev.assign(n, 0.0);
    for (const auto& r : runs) {
        for (std::size_t i = 0; i < n; ++i) {
            agg.mean[i] += r[i];
        }
    }
    for (auto& m : agg.mean) {
        m /= static_cast<double>(runs.size());
    }
    if (runs.size() > 1) {
        for (const auto& r : runs) {
            for (std::size_t i = 0; i < n; ++i) {
                const double d = r[i] - agg.mean[i];
                agg.stddev[i] += d * d;
            }
        }
        for (auto& s : agg.stddev) {
            s = std::sqrt(s / static_cast<double>(runs.size() - 1));
        }
    }
    return agg;
}

inline AggregatedRelevance aggregate_runs(std::string target, std::size_t target_column, std::vector<std::string> inputs, std::span<const std::vector<double>> runs)
{
    auto agg = aggregate_runs(runs);
    if (inputs.size() != agg.mean.size()) {
        throw Error("aggregate_runs: " + std::to_string(inputs.size()) + " input names for " + std::to_string(agg.mean.size()) + " relevance entries");
    }
    agg.target = std::move(target);
    agg.target_column = target_column;
    agg.inputs = std::move(inputs);
    return agg;
}

} // namespace usr
