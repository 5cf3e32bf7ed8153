#pragma once

// Test-only helpers: synthetic tables, random populations, and brute-force oracles that do
// not share code paths with the library functions they check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "usr/usr.hpp"

namespace usr::testkit {

/// x1..x_inputs uniform on [0,1), last column y = 3*x1 + 2*x2.
inline Dataset linear_dataset(std::size_t rows, std::size_t inputs, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols(inputs + 1, std::vector<double>(rows));
    for (std::size_t i = 0; i < inputs; ++i) {
        names.push_back("x" + std::to_string(i + 1));
    }
    names.push_back("y");
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < inputs; ++i) {
            cols[i][r] = rng.unit();
        }
        cols[inputs][r] = 3.0 * cols[0][r] + 2.0 * cols[1][r];
    }
    return Dataset(std::move(names), std::move(cols));
}

inline gp::PrimitiveSet full_primitives(std::size_t n_inputs)
{
    gp::PrimitiveSet ps;
    ps.functions = default_function_set();
    for (std::size_t i = 0; i < n_inputs; ++i) {
        ps.variables.push_back(i);
    }
    return ps;
}

inline std::vector<ExpressionTree> random_population(Rng& rng, std::size_t n, std::size_t n_inputs, std::size_t max_size = 100, std::size_t max_depth = 10)
{
    const auto ps = full_primitives(n_inputs);
    std::vector<ExpressionTree> pop;
    for (std::size_t i = 0; i < n; ++i) {
        pop.push_back(gp::ptc2_create(rng, max_size, max_depth, ps));
    }
    return pop;
}

inline gp::GPConfig small_config(const Dataset& data, std::size_t target, std::uint64_t seed)
{
    gp::GPConfig c;
    c.population_size = 100;
    c.max_generations = 10;
    c.target_column = target;
    for (std::size_t i = 0; i < data.cols(); ++i) {
        if (i != target) {
            c.input_columns.push_back(i);
        }
    }
    c.partition = default_partition(data.rows());
    c.seed = seed;
    return c;
}

namespace oracle {

    /// Flat scan: how many nodes carry Variable(column).
    inline std::size_t count_refs(std::size_t column, const ExpressionTree& tree)
    {
        std::size_t n = 0;
        for (const auto& s : tree.nodes()) {
            if (s.kind == Opcode::Variable && s.column == column) {
                ++n;
            }
        }
        return n;
    }

    /// Pointer tree rebuilt from the prefix sequence, for size and depth recounts.
    struct Node {
        Symbol symbol;
        std::vector<std::unique_ptr<Node>> children;
    };

    inline std::unique_ptr<Node> rebuild(std::span<const Symbol> prefix, std::size_t& pos)
    {
        auto n = std::make_unique<Node>();
        n->symbol = prefix[pos++];
        for (std::size_t k = 0; k < n->symbol.arity(); ++k) {
            n->children.push_back(rebuild(prefix, pos));
        }
        return n;
    }

    inline std::size_t node_count(const Node& n)
    {
        std::size_t c = 1;
        for (const auto& ch : n.children) {
            c += node_count(*ch);
        }
        return c;
    }

    inline std::size_t node_depth(const Node& n)
    {
        std::size_t d = 0;
        for (const auto& ch : n.children) {
            d = std::max(d, node_depth(*ch));
        }
        return d + 1;
    }

    /// Direct per-row recursive evaluation.
    inline double eval_row(const Node& n, const Dataset& data, std::size_t row)
    {
        switch (n.symbol.kind) {
        case Opcode::Constant: return n.symbol.value;
        case Opcode::Variable: return data.column(n.symbol.column)[row];
        case Opcode::Log: return std::log(eval_row(*n.children[0], data, row));
        case Opcode::Exp: return std::exp(eval_row(*n.children[0], data, row));
        default: break;
        }
        const double a = eval_row(*n.children[0], data, row);
        const double b = eval_row(*n.children[1], data, row);
        switch (n.symbol.kind) {
        case Opcode::Add: return a + b;
        case Opcode::Sub: return a - b;
        case Opcode::Mul: return a * b;
        case Opcode::Div: return a / b;
        default: return (a + b) / 2.0;
        }
    }

    /// Least squares through the uncentred normal equations [n Sx; Sx Sxx][a b]' = [Sy Sxy]',
    /// solved by Cramer's rule in quad precision.
    inline std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y)
    {
#ifdef __SIZEOF_FLOAT128__
        using quad = __float128;
#else
        using quad = long double;
#endif
        quad n = static_cast<quad>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += static_cast<quad>(x[i]) * x[i];
            sxy += static_cast<quad>(x[i]) * y[i];
        }
        const quad det = n * sxx - sx * sx;
        const quad a = (sy * sxx - sx * sxy) / det;
        const quad b = (n * sxy - sx * sy) / det;
        return { static_cast<double>(a), static_cast<double>(b) };
    }

    /// Quantile by explicit order statistics: h = (n-1)p, x_floor(h) + (h - floor(h)) (x_ceil(h) - x_floor(h)).
    inline double quantile(std::vector<double> v, double p)
    {
        std::sort(v.begin(), v.end());
        const long double h = static_cast<long double>(v.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(h);
        const auto hi = static_cast<std::size_t>(std::ceil(h));
        return static_cast<double>(v[lo] + (h - static_cast<long double>(lo)) * (static_cast<long double>(v[hi]) - v[lo]));
    }

} // namespace oracle

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("usr_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_csv(const std::filesystem::path& path, const Dataset& data)
{
    std::string text;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        text += (c ? "," : "") + data.name(c);
    }
    text += "\n";
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            text += (c ? "," : "") + format_real(data.column(c)[r]);
        }
        text += "\n";
    }
    write_text(path, text);
}

} // namespace usr::testkit
