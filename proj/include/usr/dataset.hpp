#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"

namespace usr {

/// Half-open row interval [begin, end).
struct RowRange {
    std::size_t begin { 0 };
    std::size_t end { 0 };

    std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
    bool empty() const noexcept { return end <= begin; }
    bool operator==(const RowRange&) const = default;
};

inline std::string to_string(RowRange r)
{
    return "[" + std::to_string(r.begin) + "," + std::to_string(r.end) + ")";
}

/// Column-major numeric table with unique column names. Immutable once built.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
        : names_(std::move(names))
        , columns_(std::move(columns))
    {
        if (names_.size() != columns_.size()) {
            throw DataError("dataset has " + std::to_string(names_.size()) + " names but " + std::to_string(columns_.size()) + " columns");
        }
        std::unordered_set<std::string> seen;
        for (const auto& n : names_) {
            if (n.empty()) {
                throw DataError("empty column name");
            }
            if (!seen.insert(n).second) {
                throw DataError("duplicate column name '" + n + "'");
            }
        }
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            if (columns_[c].size() != columns_.front().size()) {
                throw DataError("column '" + names_[c] + "' has " + std::to_string(columns_[c].size()) + " rows, expected " + std::to_string(columns_.front().size()));
            }
            for (std::size_t r = 0; r < columns_[c].size(); ++r) {
                if (!std::isfinite(columns_[c][r])) {
                    throw DataError("non-finite value in column '" + names_[c] + "' at row " + std::to_string(r + 1));
                }
            }
        }
    }

    std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
    std::size_t cols() const noexcept { return columns_.size(); }

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t column) const { return names_.at(column); }

    std::span<const double> column(std::size_t c) const { return columns_.at(c); }
    std::span<const double> column(std::size_t c, RowRange rows) const { return column(c).subspan(rows.begin, rows.size()); }

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        auto it = std::find(names_.begin(), names_.end(), name);
        if (it == names_.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - names_.begin());
    }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

struct CsvOptions {
    char separator { ',' };
};

namespace detail {

    inline std::string_view trim(std::string_view s)
    {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
            s.remove_suffix(1);
        }
        return s;
    }

    // Splits one record; double-quoted fields may contain the separator and "" escapes.
    inline std::vector<std::string> split_record(std::string_view line, char sep)
    {
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    cur += ch;
                }
            } else if (ch == '"' && trim(cur).empty()) {
                cur.clear();
                quoted = true;
            } else if (ch == sep) {
                fields.emplace_back(trim(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.emplace_back(trim(cur));
        return fields;
    }

    inline std::optional<double> parse_real(std::string_view s)
    {
        if (!s.empty() && s.front() == '+') {
            s.remove_prefix(1);
        }
        double v {};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
            return std::nullopt;
        }
        return v;
    }

} // namespace detail

/// Parses a header-first numeric table. Rows and columns in error messages are 1-based;
/// "row" counts data rows, so row 1 is the first line after the header.
inline Dataset parse_csv(std::istream& in, const CsvOptions& options = {})
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            names = detail::split_record(line, options.separator);
            break;
        }
    }
    if (names.empty()) {
        throw DataError("missing header row");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (names[c].empty()) {
            throw DataError("missing header name for column " + std::to_string(c + 1));
        }
        if (!seen.insert(names[c]).second) {
            throw DataError("duplicate header '" + names[c] + "' (column " + std::to_string(c + 1) + ")");
        }
    }

    std::vector<std::vector<double>> columns(names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        ++row;
        auto fields = detail::split_record(line, options.separator);
        if (fields.size() != names.size()) {
            throw DataError("ragged row " + std::to_string(row) + " (line " + std::to_string(line_no) + "): expected " + std::to_string(names.size()) + " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto v = detail::parse_real(fields[c]);
            if (!v) {
                throw DataError("non-numeric cell '" + fields[c] + "' at row " + std::to_string(row) + ", column " + std::to_string(c + 1) + " ('" + names[c] + "', line " + std::to_string(line_no) + ")");
            }
            columns[c].push_back(*v);
        }
    }
    return Dataset(std::move(names), std::move(columns));
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {})
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return parse_csv(in, options);
}

/// Temporally ordered, disjoint row ranges: fitness < validation < test.
struct Partition {
    RowRange fitness;
    RowRange validation;
    RowRange test;

    bool operator==(const Partition&) const = default;
};

inline void validate_partition(const Partition& p, std::size_t n_rows)
{
    const std::array<std::pair<const char*, RowRange>, 3> ranges { { { "partition.fitness", p.fitness },
        { "partition.validation", p.validation },
        { "partition.test", p.test } } };
    for (const auto& [field, r] : ranges) {
        if (r.empty()) {
            throw ConfigError(field, "empty row range " + to_string(r));
        }
        if (r.end > n_rows) {
            throw ConfigError(field, "range " + to_string(r) + " exceeds table of " + std::to_string(n_rows) + " rows");
        }
    }
    if (p.fitness.end > p.validation.begin) {
        throw ConfigError("partition.validation", "must start at or after the end of the fitness range");
    }
    if (p.validation.end > p.test.begin) {
        throw ConfigError("partition.test", "must start at or after the end of the validation range");
    }
}

/// Smallest row count accepted for each range of a default partition.
inline constexpr std::size_t kMinPartitionRows = 20;

/// Boundaries 100 / 1950 / 3800 / 5400 of a 5500-row table, scaled to `n_rows` with
/// round-half-up. A 5500-row table maps to fitness [100,1950), validation [1950,3800),
/// test [3800,5400).
inline Partition default_partition(std::size_t n_rows)
{
    constexpr std::array<std::size_t, 4> reference { 100, 1950, 3800, 5400 };
    constexpr std::size_t reference_rows = 5500;
    std::array<std::size_t, 4> b {};
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = (2 * n_rows * reference[i] + reference_rows) / (2 * reference_rows);
    }
    Partition p { { b[0], b[1] }, { b[1], b[2] }, { b[2], b[3] } };
    for (auto r : { p.fitness, p.validation, p.test }) {
        if (r.size() < kMinPartitionRows) {
            throw ConfigError("partition", "table of " + std::to_string(n_rows) + " rows is too small for the default split (range " + to_string(r) + " has fewer than " + std::to_string(kMinPartitionRows) + " rows)");
        }
    }
    return p;
}

} // namespace usr
