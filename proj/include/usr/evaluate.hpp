#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "error.hpp"
#include "expression.hpp"

namespace usr {

struct EvaluationResult {
    std::vector<double> values;
    bool finite { true };
};

/// Stack interpreter over blocks of rows. Each row sees exactly the same sequence of
/// floating-point operations as a one-row-at-a-time recursive evaluation; blocks only
/// amortize the dispatch. Arithmetic is unprotected: x/0, log(x<=0) and exp overflow
/// produce inf/nan.
class Interpreter {
public:
    static constexpr std::size_t kBlock = 64;

    /// Writes one value per row of `rows` into `out`; returns true iff all are finite.
    bool evaluate(const ExpressionTree& tree, const Dataset& data, RowRange rows, std::span<double> out)
    {
        check(tree, data, rows);
        if (out.size() != rows.size()) {
            throw Error("evaluate: output buffer has " + std::to_string(out.size()) + " slots for " + std::to_string(rows.size()) + " rows");
        }
        const auto nodes = tree.nodes();
        stack_.resize(nodes.size());

        bool finite = true;
        for (std::size_t start = rows.begin; start < rows.end; start += kBlock) {
            const std::size_t len = std::min(kBlock, rows.end - start);
            std::size_t top = 0; // number of occupied stack slots
            for (std::size_t i = nodes.size(); i-- > 0;) {
                const Symbol& s = nodes[i];
                switch (s.kind) {
                case Opcode::Constant: {
                    auto& r = stack_[top++];
                    std::fill_n(r.begin(), len, s.value);
                    break;
                }
                case Opcode::Variable: {
                    auto& r = stack_[top++];
                    const double* src = data.column(s.column).data() + start;
                    std::copy_n(src, len, r.begin());
                    break;
                }
                case Opcode::Log: {
                    auto& a = stack_[top - 1];
                    for (std::size_t k = 0; k < len; ++k) a[k] = std::log(a[k]);
                    break;
                }
                case Opcode::Exp: {
                    auto& a = stack_[top - 1];
                    for (std::size_t k = 0; k < len; ++k) a[k] = std::exp(a[k]);
                    break;
                }
                default: {
                    // first operand is on top, second below it
                    const auto& a = stack_[top - 1];
                    auto& b = stack_[top - 2];
                    binary(s.kind, a, b, len);
                    --top;
                    break;
                }
                }
            }
            const auto& result = stack_[0];
            for (std::size_t k = 0; k < len; ++k) {
                out[start - rows.begin + k] = result[k];
                finite = finite && std::isfinite(result[k]);
            }
        }
        return finite;
    }

    EvaluationResult evaluate(const ExpressionTree& tree, const Dataset& data, RowRange rows)
    {
        EvaluationResult r;
        r.values.resize(rows.size());
        check(tree, data, rows);
        r.finite = evaluate(tree, data, rows, r.values);
        return r;
    }

private:
    using Block = std::array<double, kBlock>;

    static void binary(Opcode op, const Block& a, Block& b, std::size_t len)
    {
        switch (op) {
        case Opcode::Add:
            for (std::size_t k = 0; k < len; ++k) b[k] = a[k] + b[k];
            break;
        case Opcode::Sub:
            for (std::size_t k = 0; k < len; ++k) b[k] = a[k] - b[k];
            break;
        case Opcode::Mul:
            for (std::size_t k = 0; k < len; ++k) b[k] = a[k] * b[k];
            break;
        case Opcode::Div:
            for (std::size_t k = 0; k < len; ++k) b[k] = a[k] / b[k];
            break;
        case Opcode::Avg:
            for (std::size_t k = 0; k < len; ++k) b[k] = (a[k] + b[k]) / 2.0;
            break;
        default:
            break;
        }
    }

    static void check(const ExpressionTree& tree, const Dataset& data, RowRange rows)
    {
        if (tree.empty()) {
            throw StructureError("cannot evaluate an empty expression");
        }
        if (rows.empty()) {
            throw Error("evaluate: empty row range " + to_string(rows));
        }
        if (rows.end > data.rows()) {
            throw Error("evaluate: row range " + to_string(rows) + " exceeds " + std::to_string(data.rows()) + " rows");
        }
        if (auto m = max_column(tree); m && *m >= data.cols()) {
            throw StructureError("expression references column " + std::to_string(*m) + " but the dataset has " + std::to_string(data.cols()) + " columns");
        }
    }

    std::vector<Block> stack_;
};

inline EvaluationResult evaluate(const ExpressionTree& tree, const Dataset& data, RowRange rows)
{
    Interpreter interp;
    return interp.evaluate(tree, data, rows);
}

} // namespace usr
