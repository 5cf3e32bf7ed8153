#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "../expression.hpp"
#include "../random.hpp"
#include "config.hpp"
#include "creator.hpp"

namespace usr::gp {

inline constexpr std::size_t kCrossoverRetries = 10;

/// Replaces a uniformly chosen node of a copy of `a` by a uniformly chosen subtree of `b`.
/// A child breaking the size or depth cap is discarded and a fresh point pair is drawn,
/// up to kCrossoverRetries times; after that the unmodified copy of `a` is returned.
inline ExpressionTree subtree_crossover(Rng& rng, const ExpressionTree& a, const ExpressionTree& b, std::size_t max_size, std::size_t max_depth)
{
    for (std::size_t attempt = 0; attempt <= kCrossoverRetries; ++attempt) {
        const std::size_t cut = rng.index(a.size());
        const std::size_t donor = rng.index(b.size());
        const std::size_t new_size = a.size() - a.subtree_size(cut) + b.subtree_size(donor);
        if (new_size > max_size) {
            continue;
        }
        auto child = a.replace_subtree(cut, b.subtree(donor));
        if (child.depth() <= max_depth) {
            return child;
        }
    }
    return a;
}

/// Changes a single node in place: a function becomes another function of the same arity,
/// a constant gets N(0,1) noise, a variable switches to another input.
inline ExpressionTree one_point_mutation(Rng& rng, const ExpressionTree& tree, const PrimitiveSet& ps)
{
    const std::size_t at = rng.index(tree.size());
    const Symbol& s = tree[at];
    switch (s.kind) {
    case Opcode::Constant:
        return tree.replace_symbol(at, Symbol::constant(s.value + rng.normal()));
    case Opcode::Variable: {
        std::vector<std::size_t> others;
        std::copy_if(ps.variables.begin(), ps.variables.end(), std::back_inserter(others), [&](std::size_t c) { return c != s.column; });
        if (others.empty()) {
            return tree;
        }
        return tree.replace_symbol(at, Symbol::variable(others[rng.index(others.size())]));
    }
    default: {
        std::vector<Opcode> same;
        std::copy_if(ps.functions.begin(), ps.functions.end(), std::back_inserter(same), [&](Opcode op) { return op != s.kind && arity(op) == s.arity(); });
        if (same.empty()) {
            return tree;
        }
        return tree.replace_symbol(at, Symbol::function(same[rng.index(same.size())]));
    }
    }
}

/// Swaps a uniformly chosen subtree for a fresh PTC2 tree sized so that the whole tree
/// stays within the caps.
inline ExpressionTree subtree_replacement_mutation(Rng& rng, const ExpressionTree& tree, const GPConfig& config)
{
    const std::size_t at = rng.index(tree.size());
    const std::size_t rest = tree.size() - tree.subtree_size(at);
    const std::size_t level = tree.levels()[at];
    const std::size_t size_budget = config.max_size > rest ? config.max_size - rest : 1;
    const std::size_t depth_budget = config.max_depth >= level ? config.max_depth - level + 1 : 1;
    auto fresh = ptc2_create(rng, size_budget, depth_budget, primitives(config));
    return tree.replace_subtree(at, fresh.nodes());
}

/// With probability mutation_rate applies one of the two operators, chosen 50/50.
inline ExpressionTree mutate(Rng& rng, const ExpressionTree& tree, const GPConfig& config)
{
    if (!rng.bernoulli(config.mutation_rate)) {
        return tree;
    }
    if (rng.bernoulli(0.5)) {
        return one_point_mutation(rng, tree, primitives(config));
    }
    return subtree_replacement_mutation(rng, tree, config);
}

} // namespace usr::gp
