#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "../dataset.hpp"
#include "../evaluate.hpp"
#include "../expression.hpp"

namespace usr::gp {

namespace detail {
    inline bool all_finite(std::span<const double> v)
    {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    }

    inline bool all_equal(std::span<const double> v)
    {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    }

    inline double mean(std::span<const double> v)
    {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }
} // namespace detail

/// Squared Pearson correlation of `output` against `target`, in [0, 1]. Degenerate inputs
/// (non-finite outputs, zero variance on either side, overflow) give exactly 0.
inline double squared_correlation(std::span<const double> output, std::span<const double> target)
{
    if (output.empty() || output.size() != target.size()) {
        return 0.0;
    }
    if (!detail::all_finite(output) || detail::all_equal(output) || detail::all_equal(target)) {
        return 0.0;
    }
    const double mx = detail::mean(output);
    const double my = detail::mean(target);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double dx = output[i] - mx;
        const double dy = target[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        return 0.0;
    }
    const double r2 = (sxy / sxx) * (sxy / syy);
    if (!std::isfinite(r2)) {
        return 0.0;
    }
    return std::clamp(r2, 0.0, 1.0);
}

/// target ~ offset + slope * output.
struct LinearScaling {
    double offset { 0.0 };
    double slope { 1.0 };

    double operator()(double output) const noexcept { return offset + slope * output; }
};

namespace detail {
#ifdef __SIZEOF_FLOAT128__
    using wide = __float128;
#else
    using wide = long double;
#endif
} // namespace detail

/// Least-squares offset and slope. Constant or non-finite outputs fall back to
/// slope 0 and offset mean(target). Sums are accumulated in quad precision (long double
/// where unavailable): evolved models often produce huge outputs with a small spread, and
/// the offset then cancels badly in double.
inline LinearScaling fit_linear_scaling(std::span<const double> output, std::span<const double> target)
{
    using detail::wide;
    const double my_fallback = detail::mean(target);
    if (!detail::all_finite(output) || detail::all_equal(output)) {
        return { my_fallback, 0.0 };
    }
    const wide n = static_cast<wide>(output.size());
    wide sx = 0, sy = 0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        sx += output[i];
        sy += target[i];
    }
    const wide mx = sx / n, my = sy / n;
    wide sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const wide dx = output[i] - mx;
        sxx += dx * dx;
        sxy += dx * (target[i] - my);
    }
    if (!(sxx > 0)) {
        return { my_fallback, 0.0 };
    }
    const wide slope = sxy / sxx;
    const auto offset = static_cast<double>(my - slope * mx);
    const auto b = static_cast<double>(slope);
    if (!std::isfinite(b) || !std::isfinite(offset)) {
        return { my_fallback, 0.0 };
    }
    return { offset, b };
}

/// R^2 fitness of `tree` on `rows`.
inline double evaluate_fitness(const ExpressionTree& tree, const Dataset& data, RowRange rows, std::size_t target)
{
    auto result = evaluate(tree, data, rows);
    if (!result.finite) {
        return 0.0;
    }
    return squared_correlation(result.values, data.column(target, rows));
}

inline LinearScaling linear_scale(const ExpressionTree& tree, const Dataset& data, RowRange rows, std::size_t target)
{
    auto result = evaluate(tree, data, rows);
    return fit_linear_scaling(result.values, data.column(target, rows));
}

/// Reusable scorer for one (dataset, rows, target) triple; keeps its evaluation buffers.
class FitnessEvaluator {
public:
    FitnessEvaluator(const Dataset& data, RowRange rows, std::size_t target)
        : data_(&data)
        , rows_(rows)
        , target_(data.column(target, rows))
        , buffer_(rows.size())
    {
    }

    double operator()(const ExpressionTree& tree)
    {
        if (!interp_.evaluate(tree, *data_, rows_, buffer_)) {
            return 0.0;
        }
        return squared_correlation(buffer_, target_);
    }

private:
    const Dataset* data_;
    RowRange rows_;
    std::span<const double> target_;
    std::vector<double> buffer_;
    Interpreter interp_;
};

} // namespace usr::gp
