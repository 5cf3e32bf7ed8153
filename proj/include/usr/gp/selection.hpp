#pragma once

#include <cstddef>
#include <span>

#include "../expression.hpp"
#include "../random.hpp"

namespace usr::gp {

struct Individual {
    ExpressionTree tree;
    double fitness { 0.0 };
};

/// Draws `group_size` indices uniformly with replacement and returns the fittest.
/// Ties go to the contestant drawn first, so equal fitness means uniform selection.
inline std::size_t tournament_select(Rng& rng, std::span<const Individual> population, std::size_t group_size)
{
    std::size_t best = rng.index(population.size());
    for (std::size_t i = 1; i < group_size; ++i) {
        const std::size_t cand = rng.index(population.size());
        if (population[cand].fitness > population[best].fitness) {
            best = cand;
        }
    }
    return best;
}

} // namespace usr::gp
