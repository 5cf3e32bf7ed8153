#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "../expression.hpp"
#include "../random.hpp"
#include "config.hpp"

namespace usr::gp {

/// Variable (uniform over inputs) or constant (uniform over the constant range), 50/50.
inline Symbol random_terminal(Rng& rng, const PrimitiveSet& ps)
{
    const bool use_variable = rng.bernoulli(0.5);
    if (use_variable && !ps.variables.empty()) {
        return Symbol::variable(ps.variables[rng.index(ps.variables.size())]);
    }
    return Symbol::constant(rng.uniform(ps.constant_min, ps.constant_max));
}

/// PTC2 growth toward an explicit goal size. The tree starts as a single open slot; while
/// the node count (placed plus open) is below `goal`, a random open slot that may still
/// hold a function is filled with a random function whose arity fits the remaining budget.
/// All slots left open become terminals. The result never exceeds `max_size` nodes or
/// `max_depth` levels.
inline ExpressionTree ptc2_create_sized(Rng& rng, std::size_t goal, std::size_t max_size, std::size_t max_depth, const PrimitiveSet& ps)
{
    goal = std::clamp<std::size_t>(goal, 1, std::max<std::size_t>(1, max_size));

    struct Proto {
        Symbol symbol;
        std::size_t level;
        std::size_t first_child { 0 }; // index into `children`
    };
    struct Slot {
        std::size_t parent; // index into `protos`, or npos for the root
        std::size_t level;
        std::size_t child_slot; // position inside children[]
    };
    constexpr auto npos = static_cast<std::size_t>(-1);

    std::vector<Proto> protos;
    std::vector<std::size_t> children; // proto index for each child position
    std::vector<Slot> open { { npos, 1, npos } };
    std::size_t root = npos;
    std::size_t total = 1;

    auto place = [&](const Slot& slot, Symbol sym) {
        const std::size_t id = protos.size();
        protos.push_back({ sym, slot.level, children.size() });
        if (slot.parent == npos) {
            root = id;
        } else {
            children[slot.child_slot] = id;
        }
        const std::size_t base = children.size();
        children.resize(base + sym.arity(), npos);
        for (std::size_t k = 0; k < sym.arity(); ++k) {
            open.push_back({ id, slot.level + 1, base + k });
        }
    };

    std::vector<std::size_t> expandable;
    std::vector<Opcode> fitting;
    while (total < goal && !ps.functions.empty()) {
        expandable.clear();
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (open[i].level < max_depth) {
                expandable.push_back(i);
            }
        }
        if (expandable.empty()) {
            break;
        }
        // prefer functions that do not overshoot the goal; otherwise any that fit max_size
        fitting.clear();
        for (auto op : ps.functions) {
            if (total + arity(op) <= goal) {
                fitting.push_back(op);
            }
        }
        if (fitting.empty()) {
            for (auto op : ps.functions) {
                if (total + arity(op) <= max_size) {
                    fitting.push_back(op);
                }
            }
        }
        if (fitting.empty()) {
            break;
        }
        const std::size_t pick = expandable[rng.index(expandable.size())];
        const Slot slot = open[pick];
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
        place(slot, Symbol::function(fitting[rng.index(fitting.size())]));
        total += protos.back().symbol.arity();
    }
    for (const auto slot : std::vector<Slot>(open)) {
        place(slot, random_terminal(rng, ps));
    }

    std::vector<Symbol> prefix;
    prefix.reserve(protos.size());
    std::vector<std::size_t> stack { root };
    while (!stack.empty()) {
        const auto& p = protos[stack.back()];
        stack.pop_back();
        prefix.push_back(p.symbol);
        for (std::size_t k = p.symbol.arity(); k-- > 0;) {
            stack.push_back(children[p.first_child + k]);
        }
    }
    return ExpressionTree(std::move(prefix));
}

/// Probabilistic tree creation 2 with a goal size drawn uniformly from [1, max_size].
inline ExpressionTree ptc2_create(Rng& rng, std::size_t max_size, std::size_t max_depth, const PrimitiveSet& ps)
{
    const std::size_t goal = rng.between(1, std::max<std::size_t>(1, max_size));
    return ptc2_create_sized(rng, goal, max_size, max_depth, ps);
}

} // namespace usr::gp
