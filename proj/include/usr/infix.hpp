#pragma once

#include <charconv>
#include <span>
#include <string>
#include <vector>

#include "expression.hpp"

namespace usr {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_real(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace detail {
    inline std::size_t render(const ExpressionTree& tree, std::size_t i, std::span<const std::string> names, std::string& out)
    {
        const Symbol& s = tree[i];
        switch (s.kind) {
        case Opcode::Constant:
            if (s.value < 0) {
                out += "(" + format_real(s.value) + ")";
            } else {
                out += format_real(s.value);
            }
            return i + 1;
        case Opcode::Variable:
            out += s.column < names.size() ? names[s.column] : "x" + std::to_string(s.column);
            return i + 1;
        case Opcode::Log:
        case Opcode::Exp:
        case Opcode::Avg: {
            out += opcode_name(s.kind);
            out += "(";
            std::size_t next = render(tree, i + 1, names, out);
            if (s.kind == Opcode::Avg) {
                out += ", ";
                next = render(tree, next, names, out);
            }
            out += ")";
            return next;
        }
        default: {
            const char* op = s.kind == Opcode::Add ? " + " : s.kind == Opcode::Sub ? " - " : s.kind == Opcode::Mul ? " * " : " / ";
            out += "(";
            std::size_t next = render(tree, i + 1, names, out);
            out += op;
            next = render(tree, next, names, out);
            out += ")";
            return next;
        }
        }
    }
} // namespace detail

/// Fully parenthesized infix text; variables print as their column names.
inline std::string to_infix(const ExpressionTree& tree, std::span<const std::string> names = {})
{
    std::string out;
    if (!tree.empty()) {
        detail::render(tree, 0, names, out);
    }
    return out;
}

} // namespace usr
