#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace usr {

/// Description of the quantile rule, echoed into report metadata.
inline constexpr const char* kQuantileMethod = "linear interpolation between order statistics at position p*(n-1)";

/// Quantile of already sorted data, linear interpolation at position p*(n-1).
inline double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty()) {
        throw Error("quantile of an empty sample");
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct BoxplotStats {
    std::size_t count { 0 };
    double median { 0.0 };
    double q1 { 0.0 };
    double q3 { 0.0 };
    double iqr { 0.0 };
    double lower_fence { 0.0 }; // q1 - factor * iqr
    double upper_fence { 0.0 }; // q3 + factor * iqr
    double lower_whisker { 0.0 }; // smallest sample not below the lower fence
    double upper_whisker { 0.0 }; // largest sample not above the upper fence
    std::vector<double> outliers; // ascending; samples strictly outside the fences
};

/// Box-plot summary with whiskers at `whisker_factor` interquartile ranges (4 by default).
inline BoxplotStats boxplot_stats(std::span<const double> samples, double whisker_factor = 4.0)
{
    if (samples.empty()) {
        throw Error("boxplot_stats: no samples");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    BoxplotStats s;
    s.count = sorted.size();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.iqr = s.q3 - s.q1;
    s.lower_fence = s.q1 - whisker_factor * s.iqr;
    s.upper_fence = s.q3 + whisker_factor * s.iqr;
    s.lower_whisker = s.median;
    s.upper_whisker = s.median;
    bool any_inside = false;
    for (double v : sorted) {
        if (v < s.lower_fence || v > s.upper_fence) {
            s.outliers.push_back(v);
        } else {
            s.lower_whisker = any_inside ? std::min(s.lower_whisker, v) : v;
            s.upper_whisker = any_inside ? std::max(s.upper_whisker, v) : v;
            any_inside = true;
        }
    }
    return s;
}

} // namespace usr
