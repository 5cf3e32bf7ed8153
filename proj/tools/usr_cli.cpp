// usr: unguided symbolic regression from the command line.
//
//   usr run     --data table.csv --out results/ [--reps 30] [--seed 1] [--workers 4]
//   usr single  --data table.csv --targets y [--seed 1]
//   usr network --out results/ [--top-k 3] [--min-target-r2 0.5]
//   usr stats   --out results/
//
// Precedence: flags > --config file > USR_WORKERS (workers only) > built-in defaults.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "usr/usr.hpp"

namespace {

struct Flags {
    std::string config;
    std::string data;
    std::string separator;
    std::vector<std::string> targets;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string out;
    std::optional<std::size_t> top_k;
    std::optional<double> min_target_r2;
    bool resume { false };
    std::optional<std::size_t> population;
    std::optional<std::size_t> generations;
    std::string fitness_rows;
    std::string validation_rows;
    std::string test_rows;
};

usr::RowRange parse_range(const std::string& field, const std::string& text)
{
    auto colon = text.find(':');
    usr::RowRange r;
    auto bad = [&] { return usr::ConfigError(field, "expected begin:end, got '" + text + "'"); };
    if (colon == std::string::npos) {
        throw bad();
    }
    auto [p1, e1] = std::from_chars(text.data(), text.data() + colon, r.begin);
    auto [p2, e2] = std::from_chars(text.data() + colon + 1, text.data() + text.size(), r.end);
    if (e1 != std::errc() || e2 != std::errc() || p1 != text.data() + colon || p2 != text.data() + text.size()) {
        throw bad();
    }
    return r;
}

std::size_t env_workers()
{
    if (const char* v = std::getenv("USR_WORKERS")) {
        std::size_t n = 0;
        std::string_view s(v);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw usr::ConfigError("USR_WORKERS", "not a non-negative integer: '" + std::string(s) + "'");
        }
        return n;
    }
    return 1;
}

usr::ExperimentConfig resolve(const Flags& f)
{
    usr::ExperimentConfig c;
    c.workers = env_workers();
    if (!f.config.empty()) {
        c = usr::load_experiment_config(f.config, c);
    }
    if (!f.data.empty()) c.data = f.data;
    if (!f.separator.empty()) {
        if (f.separator.size() != 1) {
            throw usr::ConfigError("separator", "must be a single character");
        }
        c.separator = f.separator[0];
    }
    if (!f.targets.empty()) c.targets = f.targets;
    if (f.reps) c.repetitions = *f.reps;
    if (f.seed) c.master_seed = *f.seed;
    if (f.workers) c.workers = *f.workers;
    if (!f.out.empty()) c.out = f.out;
    if (f.top_k) c.top_k = *f.top_k;
    if (f.min_target_r2) c.min_target_r2 = *f.min_target_r2;
    if (f.resume) c.resume = true;
    if (f.population) c.gp.population_size = *f.population;
    if (f.generations) c.gp.max_generations = *f.generations;
    const bool any_range = !f.fitness_rows.empty() || !f.validation_rows.empty() || !f.test_rows.empty();
    if (any_range) {
        if (f.fitness_rows.empty() || f.validation_rows.empty() || f.test_rows.empty()) {
            throw usr::ConfigError("partition", "--fitness-rows, --validation-rows and --test-rows must be given together");
        }
        c.partition = usr::Partition { parse_range("fitness-rows", f.fitness_rows), parse_range("validation-rows", f.validation_rows), parse_range("test-rows", f.test_rows) };
    }
    if (c.data.empty()) {
        throw usr::ConfigError("data", "no dataset given (--data or config file)");
    }
    return c;
}

void add_experiment_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "Experiment config file (JSON)");
    cmd->add_option("--data", f.data, "CSV dataset with header row");
    cmd->add_option("--separator", f.separator, "Field separator (default ',')");
    cmd->add_option("--targets", f.targets, "Target columns (default: every column)")->delimiter(',');
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--population-size", f.population, "Population size");
    cmd->add_option("--generations", f.generations, "Number of generations");
    cmd->add_option("--fitness-rows", f.fitness_rows, "Fitness rows begin:end (half-open)");
    cmd->add_option("--validation-rows", f.validation_rows, "Validation rows begin:end (half-open)");
    cmd->add_option("--test-rows", f.test_rows, "Test rows begin:end (half-open)");
}

void add_network_flags(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--top-k", f.top_k, "Inbound arrows per target (default 3)");
    cmd->add_option("--min-target-r2", f.min_target_r2, "Drop arrows into targets whose median test R^2 is lower");
}

int cmd_run(const Flags& f)
{
    auto c = resolve(f);
    if (c.out.empty()) {
        throw usr::ConfigError("out", "output directory is required (--out or config file)");
    }
    auto report = usr::execute(c, [](const usr::PlannedRun& run, const usr::RunRecord& rec, bool resumed) {
        std::cerr << run.stem() << "  " << run.target << "  test R2 " << rec.result.best.test_r2 << (resumed ? "  (resumed)" : "") << "\n";
    });
    for (const auto& b : report.summary.boxplots) {
        std::cout << b.target << ": median test R2 " << b.stats.median << " over " << b.stats.count << " runs\n";
    }
    std::cout << "wrote " << report.out.string() << "\n";
    return 0;
}

int cmd_single(const Flags& f)
{
    auto c = resolve(f);
    if (c.targets.size() != 1) {
        throw usr::ConfigError("targets", "single needs exactly one target");
    }
    c.repetitions = 1;
    const auto data = usr::load_csv(c.data, { c.separator });
    auto plan = usr::plan_runs(c, data);
    auto& run = plan.front();
    usr::RunRecord rec { run.target_index, 0, run.target, run.inputs, usr::gp::run(run.config, data) };
    const auto& m = rec.result.best;
    std::cout << run.target << " = " << usr::format_real(m.scaling.offset) << " + " << usr::format_real(m.scaling.slope) << " * "
              << usr::to_infix(m.tree, data.names()) << "\n";
    std::cout << "seed " << run.config.seed << "\n";
    std::cout << "fitness R2 " << m.fitness << "\nvalidation R2 " << m.validation_r2 << "\ntest R2 " << m.test_r2 << "\n";
    if (!c.out.empty()) {
        std::filesystem::create_directories(c.out);
        usr::write_text(std::filesystem::path(c.out) / (run.stem() + ".json"), usr::to_json(rec).dump(2) + "\n");
    }
    return 0;
}

int cmd_network(const Flags& f)
{
    if (f.out.empty()) {
        throw usr::ConfigError("out", "experiment directory is required");
    }
    usr::NetworkOptions opts;
    if (f.top_k) opts.top_k = *f.top_k;
    opts.min_target_r2 = f.min_target_r2;
    auto summary = usr::summarize(usr::load_run_directory(f.out), opts);
    usr::write_text(std::filesystem::path(f.out) / "relevance.csv", usr::relevance_csv(summary.aggregates));
    usr::write_network_files(f.out, summary.network);
    std::cout << summary.network.edges.size() << " edges, " << summary.network.bidirectional.size() << " bidirectional pairs\n";
    return 0;
}

int cmd_stats(const Flags& f)
{
    if (f.out.empty()) {
        throw usr::ConfigError("out", "experiment directory is required");
    }
    auto summary = usr::summarize(usr::load_run_directory(f.out), {});
    usr::write_text(std::filesystem::path(f.out) / "boxplot.csv", usr::boxplot_csv(summary.boxplots));
    std::cout << usr::boxplot_csv(summary.boxplots);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Unguided symbolic regression: variable relevance and interaction networks" };
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "Full experiment: every target, repeated seeded runs, all reports");
    add_experiment_flags(run, f);
    add_network_flags(run, f);
    run->add_option("--reps", f.reps, "Repetitions per target (default 30)");
    run->add_option("--workers", f.workers, "Concurrent runs (0 = all cores; default $USR_WORKERS or 1)");
    run->add_option("--out", f.out, "Output directory");
    run->add_flag("--resume", f.resume, "Skip runs whose report already exists and matches");

    auto* single = app.add_subcommand("single", "One target, one seed: print the scaled model and its R2");
    add_experiment_flags(single, f);
    single->add_option("--out", f.out, "Optional directory for the run report");

    auto* network = app.add_subcommand("network", "Rebuild relevance.csv and the network from existing run reports");
    network->add_option("--out", f.out, "Experiment directory")->required();
    add_network_flags(network, f);

    auto* stats = app.add_subcommand("stats", "Write boxplot.csv from existing run reports");
    stats->add_option("--out", f.out, "Experiment directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(f);
        if (single->parsed()) return cmd_single(f);
        if (network->parsed()) return cmd_network(f);
        if (stats->parsed()) return cmd_stats(f);
    } catch (const usr::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
