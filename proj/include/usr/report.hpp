#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxplot.hpp"
#include "error.hpp"
#include "gp/engine.hpp"
#include "infix.hpp"
#include "relevance.hpp"

namespace usr {

using json = nlohmann::ordered_json;

inline constexpr const char* kRunFormat = "usr-run/1";

/// One finished run together with its place in the experiment grid.
struct RunRecord {
    std::size_t target_index { 0 };
    std::size_t repetition { 0 };
    std::string target;
    std::vector<std::string> inputs; // names, parallel to config.input_columns
    gp::RunResult result;
};

inline std::uint64_t fnv1a64(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {
    inline json range_json(RowRange r) { return json::array({ r.begin, r.end }); }

    inline RowRange range_from(const json& j) { return { j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>() }; }

    inline Opcode opcode_from(std::string_view name)
    {
        for (auto op : { Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div, Opcode::Avg, Opcode::Log, Opcode::Exp, Opcode::Constant, Opcode::Variable }) {
            if (opcode_name(op) == name) {
                return op;
            }
        }
        throw Error("unknown symbol '" + std::string(name) + "'");
    }

    inline json prefix_json(const ExpressionTree& tree)
    {
        json out = json::array();
        for (const auto& s : tree.nodes()) {
            if (s.kind == Opcode::Constant) {
                out.push_back(json::array({ "constant", s.value }));
            } else if (s.kind == Opcode::Variable) {
                out.push_back(json::array({ "variable", s.column }));
            } else {
                out.push_back(json::array({ opcode_name(s.kind) }));
            }
        }
        return out;
    }

    inline ExpressionTree prefix_from(const json& j)
    {
        std::vector<Symbol> nodes;
        for (const auto& n : j) {
            const auto op = opcode_from(n.at(0).get<std::string>());
            if (op == Opcode::Constant) {
                nodes.push_back(Symbol::constant(n.at(1).get<double>()));
            } else if (op == Opcode::Variable) {
                nodes.push_back(Symbol::variable(n.at(1).get<std::size_t>()));
            } else {
                nodes.push_back(Symbol::function(op));
            }
        }
        return ExpressionTree(std::move(nodes));
    }
} // namespace detail

/// Parameters of a run, excluding its seed and data placement.
inline json gp_parameters_json(const gp::GPConfig& c)
{
    json fs = json::array();
    for (auto op : c.function_set) {
        fs.push_back(opcode_name(op));
    }
    return json {
        { "population_size", c.population_size },
        { "max_generations", c.max_generations },
        { "tournament_group_size", c.tournament_group_size },
        { "elitism_count", c.elitism_count },
        { "mutation_rate", c.mutation_rate },
        { "max_size", c.max_size },
        { "max_depth", c.max_depth },
        { "function_set", fs },
        { "constant_range", json::array({ c.constant_min, c.constant_max }) },
    };
}

inline void apply_gp_parameters(const json& j, gp::GPConfig& c)
{
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(key, e.what());
            }
        }
    };
    take("population_size", c.population_size);
    take("max_generations", c.max_generations);
    take("tournament_group_size", c.tournament_group_size);
    take("elitism_count", c.elitism_count);
    take("mutation_rate", c.mutation_rate);
    take("max_size", c.max_size);
    take("max_depth", c.max_depth);
    if (j.contains("function_set")) {
        c.function_set.clear();
        for (const auto& n : j.at("function_set")) {
            try {
                c.function_set.push_back(detail::opcode_from(n.get<std::string>()));
            } catch (const std::exception& e) {
                throw ConfigError("function_set", e.what());
            }
        }
    }
    if (j.contains("constant_range")) {
        const auto& r = j.at("constant_range");
        if (!r.is_array() || r.size() != 2) {
            throw ConfigError("constant_range", "expected [min, max]");
        }
        c.constant_min = r.at(0).get<double>();
        c.constant_max = r.at(1).get<double>();
    }
    for (const auto& [key, value] : j.items()) {
        static const std::set<std::string> known { "population_size", "max_generations", "tournament_group_size", "elitism_count",
            "mutation_rate", "max_size", "max_depth", "function_set", "constant_range" };
        if (!known.count(key)) {
            throw ConfigError("gp." + key, "unknown parameter");
        }
    }
}

inline json partition_json(const Partition& p)
{
    return json {
        { "fitness", detail::range_json(p.fitness) },
        { "validation", detail::range_json(p.validation) },
        { "test", detail::range_json(p.test) },
    };
}

inline Partition partition_from(const json& j)
{
    try {
        return { detail::range_from(j.at("fitness")), detail::range_from(j.at("validation")), detail::range_from(j.at("test")) };
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("partition", std::string("expected {fitness:[b,e], validation:[b,e], test:[b,e]}: ") + e.what());
    }
}

inline json config_json(const gp::GPConfig& c)
{
    json j = gp_parameters_json(c);
    j["target_column"] = c.target_column;
    j["input_columns"] = c.input_columns;
    j["partition"] = partition_json(c.partition);
    j["seed"] = c.seed;
    return j;
}

inline std::string config_hash(const gp::GPConfig& c) { return hex64(fnv1a64(config_json(c).dump())); }

inline json to_json(const RunRecord& rec)
{
    const auto& r = rec.result;
    const auto& m = r.best;
    json gens = json::array();
    for (const auto& s : r.snapshots) {
        gens.push_back(json {
            { "generation", s.generation },
            { "best_fitness", s.best_fitness },
            { "mean_fitness", s.mean_fitness },
            { "relative_frequency", s.relative_frequency },
        });
    }
    std::vector<std::string> names(r.config.input_columns.empty() ? 0 : *std::max_element(r.config.input_columns.begin(), r.config.input_columns.end()) + 1);
    for (std::size_t i = 0; i < rec.inputs.size() && i < r.config.input_columns.size(); ++i) {
        names[r.config.input_columns[i]] = rec.inputs[i];
    }
    return json {
        { "format", kRunFormat },
        { "target", rec.target },
        { "target_index", rec.target_index },
        { "repetition", rec.repetition },
        { "seed", r.config.seed },
        { "inputs", rec.inputs },
        { "config", config_json(r.config) },
        { "config_hash", config_hash(r.config) },
        { "relevance_snapshots", r.snapshots.size() },
        { "relevance_includes_initial_population", true },
        { "relevance", r.snapshots.empty() ? std::vector<double> {} : r.relevance() },
        { "model", json {
                       { "infix", to_infix(m.tree, names) },
                       { "prefix", detail::prefix_json(m.tree) },
                       { "offset", m.scaling.offset },
                       { "slope", m.scaling.slope },
                       { "generation", m.generation },
                       { "fitness", m.fitness },
                       { "validation_r2", m.validation_r2 },
                       { "test_r2", m.test_r2 },
                   } },
        { "generations", gens },
    };
}

inline RunRecord run_record_from_json(const json& j)
{
    if (j.value("format", std::string {}) != kRunFormat) {
        throw Error("not a run report (format tag missing or unknown)");
    }
    RunRecord rec;
    rec.target = j.at("target").get<std::string>();
    rec.target_index = j.at("target_index").get<std::size_t>();
    rec.repetition = j.at("repetition").get<std::size_t>();
    rec.inputs = j.at("inputs").get<std::vector<std::string>>();

    auto& c = rec.result.config;
    const auto& cj = j.at("config");
    apply_gp_parameters(json {
                            { "population_size", cj.at("population_size") },
                            { "max_generations", cj.at("max_generations") },
                            { "tournament_group_size", cj.at("tournament_group_size") },
                            { "elitism_count", cj.at("elitism_count") },
                            { "mutation_rate", cj.at("mutation_rate") },
                            { "max_size", cj.at("max_size") },
                            { "max_depth", cj.at("max_depth") },
                            { "function_set", cj.at("function_set") },
                            { "constant_range", cj.at("constant_range") },
                        },
        c);
    c.target_column = cj.at("target_column").get<std::size_t>();
    c.input_columns = cj.at("input_columns").get<std::vector<std::size_t>>();
    c.partition = partition_from(cj.at("partition"));
    c.seed = cj.at("seed").get<std::uint64_t>();

    for (const auto& g : j.at("generations")) {
        rec.result.snapshots.push_back({
            g.at("generation").get<std::size_t>(),
            g.at("best_fitness").get<double>(),
            g.at("mean_fitness").get<double>(),
            g.at("relative_frequency").get<std::vector<double>>(),
        });
    }
    const auto& mj = j.at("model");
    auto& m = rec.result.best;
    m.tree = detail::prefix_from(mj.at("prefix"));
    m.scaling = { mj.at("offset").get<double>(), mj.at("slope").get<double>() };
    m.generation = mj.at("generation").get<std::size_t>();
    m.fitness = mj.at("fitness").get<double>();
    m.validation_r2 = mj.at("validation_r2").get<double>();
    m.test_r2 = mj.at("test_r2").get<double>();
    return rec;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

/// One row per snapshot, one column per input variable.
inline std::string trajectory_csv(const RunRecord& rec)
{
    std::string out = "generation";
    for (const auto& n : rec.inputs) {
        out += "," + csv_field(n);
    }
    out += "\n";
    for (const auto& s : rec.result.snapshots) {
        out += std::to_string(s.generation);
        for (double v : s.relative_frequency) {
            out += "," + format_real(v);
        }
        out += "\n";
    }
    return out;
}

inline std::string relevance_csv(std::span<const AggregatedRelevance> aggregates)
{
    std::string out = "target,input,mean,std,repetitions\n";
    for (const auto& a : aggregates) {
        for (std::size_t i = 0; i < a.inputs.size(); ++i) {
            out += csv_field(a.target) + "," + csv_field(a.inputs[i]) + "," + format_real(a.mean[i]) + "," + format_real(a.stddev[i]) + "," + std::to_string(a.repetitions) + "\n";
        }
    }
    return out;
}

struct TargetBoxplot {
    std::string target;
    BoxplotStats stats;
};

inline std::string boxplot_csv(std::span<const TargetBoxplot> rows)
{
    std::string out = "target,median,q1,q3,lo_whisker,hi_whisker,outliers,n\n";
    for (const auto& [target, s] : rows) {
        std::string outliers = "[";
        for (std::size_t i = 0; i < s.outliers.size(); ++i) {
            outliers += (i ? "," : "") + format_real(s.outliers[i]);
        }
        outliers += "]";
        out += csv_field(target) + "," + format_real(s.median) + "," + format_real(s.q1) + "," + format_real(s.q3) + "," + format_real(s.lower_whisker) + "," + format_real(s.upper_whisker) + "," + csv_field(outliers) + "," + std::to_string(s.count) + "\n";
    }
    return out;
}

} // namespace usr
