#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace usr {

enum class Opcode : std::uint8_t { Add, Sub, Mul, Div, Avg, Log, Exp, Constant, Variable };

constexpr std::size_t arity(Opcode op) noexcept
{
    switch (op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Div:
    case Opcode::Avg:
        return 2;
    case Opcode::Log:
    case Opcode::Exp:
        return 1;
    case Opcode::Constant:
    case Opcode::Variable:
        return 0;
    }
    return 0;
}

constexpr bool is_terminal(Opcode op) noexcept { return arity(op) == 0; }

constexpr std::string_view opcode_name(Opcode op) noexcept
{
    switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Avg: return "avg";
    case Opcode::Log: return "log";
    case Opcode::Exp: return "exp";
    case Opcode::Constant: return "constant";
    case Opcode::Variable: return "variable";
    }
    return "?";
}

/// The full function set: + - * / avg log exp.
inline std::vector<Opcode> default_function_set()
{
    return { Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div, Opcode::Avg, Opcode::Log, Opcode::Exp };
}

struct Symbol {
    Opcode kind { Opcode::Constant };
    double value { 0.0 };     // Constant only
    std::size_t column { 0 }; // Variable only; dataset column index

    static Symbol constant(double v) { return { Opcode::Constant, v, 0 }; }
    static Symbol variable(std::size_t c) { return { Opcode::Variable, 0.0, c }; }
    static Symbol function(Opcode op) { return { op, 0.0, 0 }; }

    std::size_t arity() const noexcept { return usr::arity(kind); }
    bool is_variable(std::size_t c) const noexcept { return kind == Opcode::Variable && column == c; }

    bool operator==(const Symbol&) const = default;
};

/// Operator tree stored as a prefix (pre-order) sequence of symbols. Every subtree is a
/// contiguous slice; the root is element 0. Immutable after construction.
class ExpressionTree {
public:
    ExpressionTree() = default;

    explicit ExpressionTree(std::vector<Symbol> prefix)
        : nodes_(std::move(prefix))
    {
        check_arity();
    }

    std::span<const Symbol> nodes() const noexcept { return nodes_; }
    const Symbol& operator[](std::size_t i) const { return nodes_[i]; }
    const Symbol& root() const { return nodes_.front(); }
    bool empty() const noexcept { return nodes_.empty(); }

    /// Total node count.
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Longest root-to-leaf path counted in nodes; a single leaf has depth 1.
    std::size_t depth() const
    {
        std::vector<std::size_t> stack;
        stack.reserve(nodes_.size());
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            std::size_t d = 0;
            for (std::size_t k = 0; k < it->arity(); ++k) {
                d = std::max(d, stack.back());
                stack.pop_back();
            }
            stack.push_back(d + 1);
        }
        return stack.empty() ? 0 : stack.back();
    }

    /// One past the last node of the subtree rooted at `i`.
    std::size_t subtree_end(std::size_t i) const
    {
        std::size_t open = 1;
        while (open > 0) {
            open = open - 1 + nodes_[i].arity();
            ++i;
        }
        return i;
    }

    std::size_t subtree_size(std::size_t i) const { return subtree_end(i) - i; }

    std::span<const Symbol> subtree(std::size_t i) const
    {
        return std::span<const Symbol>(nodes_).subspan(i, subtree_size(i));
    }

    /// Level of every node (root = 1).
    std::vector<std::size_t> levels() const
    {
        std::vector<std::size_t> level(nodes_.size());
        // pending[k] = number of children still to be attached to the k-th open ancestor
        std::vector<std::pair<std::size_t, std::size_t>> pending;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            level[i] = pending.empty() ? 1 : pending.back().first + 1;
            if (!pending.empty() && --pending.back().second == 0) {
                pending.pop_back();
            }
            if (nodes_[i].arity() > 0) {
                pending.emplace_back(level[i], nodes_[i].arity());
            }
        }
        return level;
    }

    /// Copy with the subtree at `at` replaced by `donor` (itself a complete prefix tree).
    ExpressionTree replace_subtree(std::size_t at, std::span<const Symbol> donor) const
    {
        const auto end = subtree_end(at);
        std::vector<Symbol> out;
        out.reserve(nodes_.size() - (end - at) + donor.size());
        out.insert(out.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(at));
        out.insert(out.end(), donor.begin(), donor.end());
        out.insert(out.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
        return ExpressionTree(std::move(out));
    }

    /// Copy with the symbol at `at` swapped for one of identical arity.
    ExpressionTree replace_symbol(std::size_t at, Symbol s) const
    {
        if (s.arity() != nodes_[at].arity()) {
            throw StructureError("replace_symbol: arity mismatch");
        }
        auto copy = nodes_;
        copy[at] = s;
        ExpressionTree t;
        t.nodes_ = std::move(copy);
        return t;
    }

    bool operator==(const ExpressionTree&) const = default;

private:
    void check_arity() const
    {
        if (nodes_.empty()) {
            throw StructureError("expression tree must have at least one node");
        }
        std::size_t open = 1;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (open == 0) {
                throw StructureError("trailing nodes after complete expression at position " + std::to_string(i));
            }
            open = open - 1 + nodes_[i].arity();
        }
        if (open != 0) {
            throw StructureError("expression is missing " + std::to_string(open) + " operand(s)");
        }
    }

    std::vector<Symbol> nodes_;
};

inline std::size_t size(const ExpressionTree& tree) noexcept { return tree.size(); }
inline std::size_t depth(const ExpressionTree& tree) { return tree.depth(); }

namespace detail {
    // Reference count of the subtree starting at `i`: one for the node itself when it is the
    // variable, plus the counts of its child subtrees. Returns (count, subtree end).
    inline std::pair<std::size_t, std::size_t> count_refs_from(std::size_t column, std::span<const Symbol> nodes, std::size_t i)
    {
        std::size_t count = nodes[i].is_variable(column) ? 1 : 0;
        std::size_t next = i + 1;
        for (std::size_t k = 0; k < nodes[i].arity(); ++k) {
            auto [c, end] = count_refs_from(column, nodes, next);
            count += c;
            next = end;
        }
        return { count, next };
    }
} // namespace detail

/// Number of nodes whose symbol is Variable(column), accumulated over the subtrees.
inline std::size_t count_refs(std::size_t column, const ExpressionTree& tree)
{
    if (tree.empty()) {
        return 0;
    }
    return detail::count_refs_from(column, tree.nodes(), 0).first;
}

/// Largest column index referenced, if the tree has any variable node.
inline std::optional<std::size_t> max_column(const ExpressionTree& tree) noexcept
{
    std::optional<std::size_t> m;
    for (const auto& s : tree.nodes()) {
        if (s.kind == Opcode::Variable && (!m || s.column > *m)) {
            m = s.column;
        }
    }
    return m;
}

/// Small builders so trees can be written the way they read: add(variable(0), constant(1)).
namespace expr {

    inline ExpressionTree constant(double v) { return ExpressionTree({ Symbol::constant(v) }); }
    inline ExpressionTree variable(std::size_t column) { return ExpressionTree({ Symbol::variable(column) }); }

    inline ExpressionTree apply(Opcode op, std::initializer_list<ExpressionTree> args)
    {
        if (args.size() != arity(op)) {
            throw StructureError(std::string(opcode_name(op)) + " expects " + std::to_string(arity(op)) + " operand(s)");
        }
        std::vector<Symbol> prefix { Symbol::function(op) };
        for (const auto& a : args) {
            prefix.insert(prefix.end(), a.nodes().begin(), a.nodes().end());
        }
        return ExpressionTree(std::move(prefix));
    }

    inline ExpressionTree add(const ExpressionTree& a, const ExpressionTree& b) { return apply(Opcode::Add, { a, b }); }
    inline ExpressionTree sub(const ExpressionTree& a, const ExpressionTree& b) { return apply(Opcode::Sub, { a, b }); }
    inline ExpressionTree mul(const ExpressionTree& a, const ExpressionTree& b) { return apply(Opcode::Mul, { a, b }); }
    inline ExpressionTree div(const ExpressionTree& a, const ExpressionTree& b) { return apply(Opcode::Div, { a, b }); }
    inline ExpressionTree avg(const ExpressionTree& a, const ExpressionTree& b) { return apply(Opcode::Avg, { a, b }); }
    inline ExpressionTree log(const ExpressionTree& a) { return apply(Opcode::Log, { a }); }
    inline ExpressionTree exp(const ExpressionTree& a) { return apply(Opcode::Exp, { a }); }

} // namespace expr

} // namespace usr
