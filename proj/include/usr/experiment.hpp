#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "boxplot.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "gp/engine.hpp"
#include "network.hpp"
#include "random.hpp"
#include "relevance.hpp"
#include "report.hpp"

namespace usr {

inline constexpr const char* kExperimentFormat = "usr-experiment/1";
inline constexpr double kWhiskerFactor = 4.0;

/// Full unguided symbolic regression experiment: every target is modelled from all other
/// columns, `repetitions` times each.
struct ExperimentConfig {
    std::filesystem::path data;
    char separator { ',' };
    std::optional<Partition> partition; // default split when absent
    gp::GPConfig gp;                    // parameter template; target, inputs, partition and seed are set per run
    std::size_t repetitions { 30 };
    std::vector<std::string> targets; // empty = every column
    std::uint64_t master_seed { 0 };
    std::size_t workers { 1 }; // 0 = hardware concurrency
    std::filesystem::path out;
    std::size_t top_k { 3 };
    std::optional<double> min_target_r2;
    bool resume { false };
};

/// Per-run seed. Injective in (target_index, repetition) for a fixed master seed because
/// mix64 is a bijection and the packed index is unique below 2^32 each.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::size_t target_index, std::size_t repetition)
{
    if (target_index >= (std::uint64_t { 1 } << 32) || repetition >= (std::uint64_t { 1 } << 32)) {
        throw ConfigError("repetitions", "index too large for seed derivation");
    }
    const std::uint64_t packed = (static_cast<std::uint64_t>(target_index) << 32) | static_cast<std::uint64_t>(repetition);
    return mix64(master_seed + packed);
}

struct PlannedRun {
    std::size_t target_index { 0 }; // dataset column of the target
    std::size_t repetition { 0 };
    std::string target;
    std::vector<std::string> inputs;
    gp::GPConfig config;

    std::string stem() const
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "run_t%03zu_r%03zu", target_index, repetition);
        return buf;
    }
};

inline Partition resolve_partition(const ExperimentConfig& config, const Dataset& data)
{
    return config.partition ? *config.partition : default_partition(data.rows());
}

/// Target column indices in dataset order.
inline std::vector<std::size_t> resolve_targets(const ExperimentConfig& config, const Dataset& data)
{
    std::vector<std::size_t> targets;
    if (config.targets.empty()) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            targets.push_back(c);
        }
        return targets;
    }
    for (const auto& name : config.targets) {
        auto idx = data.index_of(name);
        if (!idx) {
            throw ConfigError("targets", "unknown column '" + name + "'");
        }
        if (std::find(targets.begin(), targets.end(), *idx) == targets.end()) {
            targets.push_back(*idx);
        }
    }
    std::sort(targets.begin(), targets.end());
    return targets;
}

/// One GP configuration per (target, repetition), ordered by target column then repetition.
/// Every configuration is validated against the data before anything runs.
inline std::vector<PlannedRun> plan_runs(const ExperimentConfig& config, const Dataset& data)
{
    if (config.repetitions == 0) {
        throw ConfigError("repetitions", "must be at least 1");
    }
    if (config.top_k == 0) {
        throw ConfigError("top_k", "must be at least 1");
    }
    if (data.cols() < 2) {
        throw ConfigError("data", "need at least two columns");
    }
    const auto partition = resolve_partition(config, data);
    std::vector<PlannedRun> plan;
    for (auto t : resolve_targets(config, data)) {
        gp::GPConfig base = config.gp;
        base.target_column = t;
        base.input_columns.clear();
        std::vector<std::string> inputs;
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c != t) {
                base.input_columns.push_back(c);
                inputs.push_back(data.name(c));
            }
        }
        base.partition = partition;
        gp::validate(base, data);
        for (std::size_t r = 0; r < config.repetitions; ++r) {
            PlannedRun run { t, r, data.name(t), inputs, base };
            run.config.seed = derive_seed(config.master_seed, t, r);
            plan.push_back(std::move(run));
        }
    }
    return plan;
}

/// Runs `job(i)` for i in [0, n) on up to `workers` threads. The first failure (lowest
/// index) is rethrown after all threads stop; no new jobs start once one has failed.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job)
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::atomic<std::size_t> next { 0 };
    std::atomic<bool> failed { false };
    std::mutex m;
    std::map<std::size_t, std::exception_ptr> errors;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) {
                return;
            }
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(m);
                errors.emplace(i, std::current_exception());
                failed = true;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (!errors.empty()) {
        std::rethrow_exception(errors.begin()->second);
    }
}

/// Aggregated view over finished runs.
struct ExperimentSummary {
    std::vector<RunRecord> runs; // sorted by target column, then repetition
    std::vector<AggregatedRelevance> aggregates;
    std::vector<TargetBoxplot> boxplots;
    std::map<std::string, double> median_test_r2;
    InteractionNetwork network;
};

struct ExperimentReport {
    ExperimentSummary summary;
    json manifest;
    std::filesystem::path out;
};

/// Sorts runs, reduces relevances per target in repetition order, and builds the network.
inline ExperimentSummary summarize(std::vector<RunRecord> runs, const NetworkOptions& options)
{
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::pair(a.target_index, a.repetition) < std::pair(b.target_index, b.repetition);
    });
    ExperimentSummary s;
    for (std::size_t i = 0; i < runs.size();) {
        std::size_t j = i;
        std::vector<std::vector<double>> relevances;
        std::vector<double> test_r2;
        while (j < runs.size() && runs[j].target_index == runs[i].target_index) {
            relevances.push_back(runs[j].result.relevance());
            test_r2.push_back(runs[j].result.best.test_r2);
            ++j;
        }
        s.aggregates.push_back(aggregate_runs(runs[i].target, runs[i].target_index, runs[i].inputs, relevances));
        auto box = boxplot_stats(test_r2, kWhiskerFactor);
        s.median_test_r2[runs[i].target] = box.median;
        s.boxplots.push_back({ runs[i].target, std::move(box) });
        i = j;
    }
    s.network = build_network(s.aggregates, options, s.median_test_r2);
    s.runs = std::move(runs);
    return s;
}

inline std::filesystem::path runs_dir(const std::filesystem::path& out) { return out / "runs"; }
inline std::filesystem::path trajectories_dir(const std::filesystem::path& out) { return out / "trajectories"; }

inline RunRecord read_run_file(const std::filesystem::path& path)
{
    try {
        return run_record_from_json(json::parse(read_text(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed run report '" + path.string() + "': " + e.what());
    } catch (const Error& e) {
        throw Error("malformed run report '" + path.string() + "': " + e.what());
    }
}

/// Every run report under <out>/runs, sorted by target column then repetition.
inline std::vector<RunRecord> load_run_directory(const std::filesystem::path& out)
{
    const auto dir = runs_dir(out);
    if (!std::filesystem::is_directory(dir)) {
        throw Error("no run reports: '" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> runs;
    for (const auto& f : files) {
        runs.push_back(read_run_file(f));
    }
    if (runs.empty()) {
        throw Error("no run reports in '" + dir.string() + "'");
    }
    return runs;
}

inline void write_network_files(const std::filesystem::path& out, const InteractionNetwork& net)
{
    write_text(out / "network.dot", export_dot(net));
    write_text(out / "network.graphml", export_graphml(net));
}

/// Everything that identifies the experiment's results. Worker count and output location are
/// left out so that reports do not depend on them.
inline json experiment_echo(const ExperimentConfig& config, const Dataset& data, const Partition& partition)
{
    json targets = json::array();
    for (auto t : resolve_targets(config, data)) {
        targets.push_back(data.name(t));
    }
    return json {
        { "data", config.data.generic_string() },
        { "separator", std::string(1, config.separator) },
        { "rows", data.rows() },
        { "columns", data.names() },
        { "partition", partition_json(partition) },
        { "partition_source", config.partition ? "explicit" : "default" },
        { "gp", gp_parameters_json(config.gp) },
        { "repetitions", config.repetitions },
        { "targets", targets },
        { "master_seed", config.master_seed },
        { "top_k", config.top_k },
        { "min_target_r2", config.min_target_r2 ? json(*config.min_target_r2) : json(nullptr) },
    };
}

using ProgressCallback = std::function<void(const PlannedRun&, const RunRecord&, bool resumed)>;

namespace detail {
    inline std::optional<RunRecord> resumable(const std::filesystem::path& file, const PlannedRun& run)
    {
        if (!std::filesystem::exists(file)) {
            return std::nullopt;
        }
        try {
            auto j = json::parse(read_text(file));
            if (j.at("config_hash").get<std::string>() != config_hash(run.config)) {
                return std::nullopt;
            }
            auto rec = run_record_from_json(j);
            if (rec.target_index != run.target_index || rec.repetition != run.repetition || rec.result.snapshots.size() != run.config.max_generations + 1) {
                return std::nullopt;
            }
            return rec;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    inline void write_atomically(const std::filesystem::path& path, const std::string& text)
    {
        auto tmp = path;
        tmp += ".tmp";
        write_text(tmp, text);
        std::filesystem::rename(tmp, path);
    }
} // namespace detail

/// Runs the whole experiment and writes into config.out:
///   manifest.json, runs/<stem>.json, trajectories/<stem>.csv, relevance.csv, boxplot.csv,
///   network.dot, network.graphml, and timings.json (the only file that varies between
///   identical invocations).
inline ExperimentReport execute(const ExperimentConfig& config, const ProgressCallback& progress = {})
{
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    if (config.out.empty()) {
        throw ConfigError("out", "output directory is required");
    }
    const Dataset data = load_csv(config.data, { config.separator });
    const auto partition = resolve_partition(config, data);
    const auto plan = plan_runs(config, data);

    std::error_code ec;
    std::filesystem::create_directories(runs_dir(config.out), ec);
    std::filesystem::create_directories(trajectories_dir(config.out), ec);
    if (ec || !std::filesystem::is_directory(runs_dir(config.out))) {
        throw ConfigError("out", "cannot create output directory '" + config.out.string() + "'");
    }

    json echo = experiment_echo(config, data, partition);
    json manifest {
        { "format", kExperimentFormat },
        { "status", "running" },
        { "config_hash", hex64(fnv1a64(echo.dump())) },
        { "config", echo },
        { "quantile_method", kQuantileMethod },
        { "whisker_factor", kWhiskerFactor },
        { "relevance", "mean of per-generation relative frequencies over max_generations + 1 snapshots (initial population included)" },
    };
    json seeds = json::array();
    for (const auto& run : plan) {
        seeds.push_back(json {
            { "target", run.target },
            { "target_index", run.target_index },
            { "repetition", run.repetition },
            { "seed", run.config.seed },
            { "file", "runs/" + run.stem() + ".json" },
        });
    }
    manifest["runs"] = seeds;

    const std::size_t workers = config.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.workers;
    std::vector<double> seconds(plan.size(), 0.0);
    std::vector<char> resumed(plan.size(), 0);
    std::mutex progress_mutex;

    try {
        parallel_for(plan.size(), workers, [&](std::size_t i) {
            const auto& run = plan[i];
            const auto file = runs_dir(config.out) / (run.stem() + ".json");
            const auto t0 = clock::now();
            std::optional<RunRecord> rec;
            if (config.resume) {
                rec = detail::resumable(file, run);
                resumed[i] = rec.has_value();
            }
            try {
                if (!rec) {
                    rec = RunRecord { run.target_index, run.repetition, run.target, run.inputs, gp::run(run.config, data) };
                    detail::write_atomically(file, to_json(*rec).dump(2) + "\n");
                }
                detail::write_atomically(trajectories_dir(config.out) / (run.stem() + ".csv"), trajectory_csv(*rec));
            } catch (const std::exception& e) {
                throw Error("run failed (target '" + run.target + "', repetition " + std::to_string(run.repetition) + ", seed " + std::to_string(run.config.seed) + "): " + e.what());
            }
            seconds[i] = std::chrono::duration<double>(clock::now() - t0).count();
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(run, *rec, resumed[i] != 0);
            }
        });
    } catch (const std::exception& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        write_text(config.out / "manifest.json", manifest.dump(2) + "\n");
        throw;
    }

    // re-read what was written so that aggregation sees exactly the persisted values
    std::vector<RunRecord> records;
    records.reserve(plan.size());
    for (const auto& run : plan) {
        records.push_back(read_run_file(runs_dir(config.out) / (run.stem() + ".json")));
    }
    ExperimentReport report;
    report.out = config.out;
    report.summary = summarize(std::move(records), { config.top_k, config.min_target_r2 });

    write_text(config.out / "relevance.csv", relevance_csv(report.summary.aggregates));
    write_text(config.out / "boxplot.csv", boxplot_csv(report.summary.boxplots));
    write_network_files(config.out, report.summary.network);

    manifest["status"] = "complete";
    manifest["outputs"] = { "relevance.csv", "boxplot.csv", "network.dot", "network.graphml", "runs/", "trajectories/" };
    write_text(config.out / "manifest.json", manifest.dump(2) + "\n");
    report.manifest = manifest;

    json timings {
        { "workers", workers },
        { "total_seconds", std::chrono::duration<double>(clock::now() - started).count() },
    };
    json per_run = json::array();
    for (std::size_t i = 0; i < plan.size(); ++i) {
        per_run.push_back(json { { "file", "runs/" + plan[i].stem() + ".json" }, { "seconds", seconds[i] }, { "resumed", resumed[i] != 0 } });
    }
    timings["runs"] = per_run;
    write_text(config.out / "timings.json", timings.dump(2) + "\n");
    return report;
}

/// Reads an experiment config file (JSON) on top of `base`; keys present in the file win.
/// Relative paths resolve against the file's directory.
inline ExperimentConfig load_experiment_config(const std::filesystem::path& path, ExperimentConfig base = {})
{
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", "cannot parse '" + path.string() + "': " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config", "top level must be an object");
    }
    ExperimentConfig c = std::move(base);
    const auto dir = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_relative() ? dir / fp : fp;
    };
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "data") {
                c.data = resolve(value.get<std::string>());
            } else if (key == "separator") {
                auto s = value.get<std::string>();
                if (s.size() != 1) {
                    throw ConfigError("separator", "must be a single character");
                }
                c.separator = s[0];
            } else if (key == "partition") {
                c.partition = partition_from(value);
            } else if (key == "gp") {
                apply_gp_parameters(value, c.gp);
            } else if (key == "repetitions") {
                c.repetitions = value.get<std::size_t>();
            } else if (key == "targets") {
                c.targets = value.get<std::vector<std::string>>();
            } else if (key == "seed") {
                c.master_seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                c.workers = value.get<std::size_t>();
            } else if (key == "out") {
                c.out = resolve(value.get<std::string>());
            } else if (key == "top_k") {
                c.top_k = value.get<std::size_t>();
            } else if (key == "min_target_r2") {
                if (!value.is_null()) {
                    c.min_target_r2 = value.get<double>();
                }
            } else if (key == "resume") {
                c.resume = value.get<bool>();
            } else {
                throw ConfigError(key, "unknown configuration key");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key, e.what());
        }
    }
    return c;
}

} // namespace usr
