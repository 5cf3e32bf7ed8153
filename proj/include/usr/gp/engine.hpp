#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "../dataset.hpp"
#include "../evaluate.hpp"
#include "../random.hpp"
#include "../relevance.hpp"
#include "config.hpp"
#include "creator.hpp"
#include "fitness.hpp"
#include "selection.hpp"
#include "variation.hpp"

namespace usr::gp {

struct GenerationSnapshot {
    std::size_t generation { 0 }; // 0 = initial population
    double best_fitness { 0.0 };
    double mean_fitness { 0.0 };
    std::vector<double> relative_frequency; // indexed like GPConfig::input_columns
};

/// The validation-selected model after linear scaling: prediction = offset + slope * tree.
struct ScaledModel {
    ExpressionTree tree;
    LinearScaling scaling;
    std::size_t generation { 0 }; // generation whose champion was selected
    double fitness { 0.0 };       // R^2 on the fitness rows
    double validation_r2 { 0.0 };
    double test_r2 { 0.0 };
};

struct RunResult {
    GPConfig config;
    ScaledModel best;
    std::vector<GenerationSnapshot> snapshots; // max_generations + 1 entries

    /// Mean relative frequency over every snapshot, initial population included.
    std::vector<double> relevance() const
    {
        std::vector<std::vector<double>> rows;
        rows.reserve(snapshots.size());
        for (const auto& s : snapshots) {
            rows.push_back(s.relative_frequency);
        }
        return run_relevance(std::span<const std::vector<double>>(rows));
    }
};

/// Called with (generation, population) for the initial population and after every replacement.
using GenerationObserver = std::function<void(std::size_t, std::span<const Individual>)>;

namespace detail {
    inline std::size_t best_index(std::span<const Individual> pop)
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < pop.size(); ++i) {
            if (pop[i].fitness > pop[best].fitness) {
                best = i;
            }
        }
        return best;
    }

    inline GenerationSnapshot snapshot(std::size_t generation, std::span<const Individual> pop, std::span<const std::size_t> inputs)
    {
        GenerationSnapshot s;
        s.generation = generation;
        s.best_fitness = pop[best_index(pop)].fitness;
        double sum = 0.0;
        for (const auto& ind : pop) {
            sum += ind.fitness;
        }
        s.mean_fitness = sum / static_cast<double>(pop.size());
        s.relative_frequency = relative_frequency(pop, inputs);
        return s;
    }

    inline double scaled_r2(const ExpressionTree& tree, LinearScaling scaling, const Dataset& data, RowRange rows, std::size_t target)
    {
        auto out = evaluate(tree, data, rows);
        for (auto& v : out.values) {
            v = scaling(v);
        }
        return squared_correlation(out.values, data.column(target, rows));
    }
} // namespace detail

/// One generational GP run. Deterministic in (config, data): all randomness flows from
/// config.seed through a single sequential stream.
inline RunResult run(const GPConfig& config, const Dataset& data, const GenerationObserver& observer = {})
{
    validate(config, data);

    Rng rng(config.seed);
    const auto ps = primitives(config);
    FitnessEvaluator score(data, config.partition.fitness, config.target_column);

    std::vector<Individual> population(config.population_size);
    for (auto& ind : population) {
        ind.tree = ptc2_create(rng, config.max_size, config.max_depth, ps);
        ind.fitness = score(ind.tree);
    }

    RunResult result;
    result.config = config;
    result.snapshots.reserve(config.max_generations + 1);

    std::vector<Individual> champions; // fitness-best of every generation
    champions.reserve(config.max_generations + 1);

    auto record = [&](std::size_t generation) {
        if (observer) {
            observer(generation, population);
        }
        result.snapshots.push_back(detail::snapshot(generation, population, config.input_columns));
        champions.push_back(population[detail::best_index(population)]);
    };
    record(0);

    std::vector<std::size_t> order(population.size());
    std::vector<Individual> next;
    next.reserve(population.size());
    for (std::size_t g = 1; g <= config.max_generations; ++g) {
        std::iota(order.begin(), order.end(), std::size_t { 0 });
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.elitism_count), order.end(), [&](std::size_t i, std::size_t j) {
            return population[i].fitness > population[j].fitness || (population[i].fitness == population[j].fitness && i < j);
        });

        next.clear();
        for (std::size_t e = 0; e < config.elitism_count; ++e) {
            next.push_back(population[order[e]]);
        }
        while (next.size() < population.size()) {
            const auto& mother = population[tournament_select(rng, population, config.tournament_group_size)];
            const auto& father = population[tournament_select(rng, population, config.tournament_group_size)];
            auto child = subtree_crossover(rng, mother.tree, father.tree, config.max_size, config.max_depth);
            child = mutate(rng, child, config);
            const double f = score(child);
            next.push_back({ std::move(child), f });
        }
        population.swap(next);
        record(g);
    }

    // best on validation among the generation champions; earliest generation wins ties
    FitnessEvaluator validation(data, config.partition.validation, config.target_column);
    std::size_t chosen = 0;
    double chosen_r2 = -1.0;
    for (std::size_t g = 0; g < champions.size(); ++g) {
        const double r2 = validation(champions[g].tree);
        if (r2 > chosen_r2) {
            chosen = g;
            chosen_r2 = r2;
        }
    }

    auto& best = result.best;
    best.tree = champions[chosen].tree;
    best.generation = chosen;
    best.fitness = champions[chosen].fitness;
    best.scaling = linear_scale(best.tree, data, config.partition.fitness, config.target_column);
    best.validation_r2 = detail::scaled_r2(best.tree, best.scaling, data, config.partition.validation, config.target_column);
    best.test_r2 = detail::scaled_r2(best.tree, best.scaling, data, config.partition.test, config.target_column);
    return result;
}

} // namespace usr::gp
