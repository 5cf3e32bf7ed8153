#include <set>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace usr;
namespace fs = std::filesystem;

namespace {
Dataset table_with_columns(std::size_t n)
{
    std::vector<std::string> names;
    std::vector<std::vector<double>> cols(n, std::vector<double>(200));
    Rng rng(5);
    for (std::size_t c = 0; c < n; ++c) {
        names.push_back("v" + std::to_string(c));
        for (auto& v : cols[c]) v = rng.unit();
    }
    return Dataset(names, cols);
}

ExperimentConfig tiny_experiment(const fs::path& dir, std::uint64_t seed = 7)
{
    auto data = testkit::linear_dataset(300, 4, 11);
    testkit::write_csv(dir / "data.csv", data);
    ExperimentConfig c;
    c.data = dir / "data.csv";
    c.gp.population_size = 30;
    c.gp.max_generations = 4;
    c.repetitions = 2;
    c.master_seed = seed;
    c.out = dir / "out";
    return c;
}

std::map<std::string, std::string> files_under(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).generic_string()] = read_text(e.path());
        }
    }
    return out;
}
} // namespace

TEST(Plan, TwentyThreeTargetsThirtyRepetitions)
{
    auto data = table_with_columns(23);
    ExperimentConfig c;
    c.gp.population_size = 10;
    auto plan = plan_runs(c, data);
    ASSERT_EQ(plan.size(), 690u);
    std::set<std::uint64_t> seeds;
    for (const auto& r : plan) {
        seeds.insert(r.config.seed);
        ASSERT_EQ(r.config.input_columns.size(), 22u);
        ASSERT_EQ(std::count(r.config.input_columns.begin(), r.config.input_columns.end(), r.target_index), 0);
    }
    EXPECT_EQ(seeds.size(), 690u);
}

TEST(Plan, SingleTargetSingleRepetition)
{
    auto data = table_with_columns(5);
    ExperimentConfig c;
    c.gp.population_size = 10;
    c.repetitions = 1;
    c.targets = { "v2" };
    auto plan = plan_runs(c, data);
    ASSERT_EQ(plan.size(), 1u);
    EXPECT_EQ(plan[0].inputs, (std::vector<std::string> { "v0", "v1", "v3", "v4" }));
    EXPECT_EQ(plan[0].config.input_columns, (std::vector<std::size_t> { 0, 1, 3, 4 }));
    EXPECT_EQ(plan[0].stem(), "run_t002_r000");
}

TEST(Plan, UnknownTargetAndBadCounts)
{
    auto data = table_with_columns(3);
    ExperimentConfig c;
    c.gp.population_size = 10;
    c.targets = { "nope" };
    try {
        plan_runs(c, data);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "targets");
    }
    c.targets.clear();
    c.repetitions = 0;
    EXPECT_THROW(plan_runs(c, data), ConfigError);
}

TEST(Seeds, DeterministicAndInjective)
{
    EXPECT_EQ(derive_seed(42, 3, 7), derive_seed(42, 3, 7));
    EXPECT_NE(derive_seed(42, 3, 7), derive_seed(43, 3, 7));
    std::set<std::uint64_t> seen;
    for (std::size_t t = 0; t < 100; ++t)
        for (std::size_t r = 0; r < 100; ++r) seen.insert(derive_seed(42, t, r));
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(ParallelFor, RunsEveryIndexAndRethrowsLowestFailure)
{
    std::vector<int> hit(50, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i]++; });
    EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
    try {
        parallel_for(10, 1, [](std::size_t i) {
            if (i >= 3) throw Error("job " + std::to_string(i));
        });
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "job 3");
    }
}

TEST(Report, RunRecordJsonRoundTrip)
{
    auto data = testkit::linear_dataset(300, 3, 12);
    auto c = testkit::small_config(data, 3, 5);
    RunRecord rec { 3, 1, "y", { "x1", "x2", "x3" }, gp::run(c, data) };
    const auto j = to_json(rec);
    EXPECT_EQ(j.at("format"), kRunFormat);
    EXPECT_EQ(j.at("generations").size(), c.max_generations + 1);
    auto back = run_record_from_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_EQ(back.result.best.tree, rec.result.best.tree);
    EXPECT_EQ(back.result.relevance(), rec.result.relevance());
    EXPECT_EQ(config_hash(back.result.config), config_hash(c));
}

TEST(Report, CsvHeaders)
{
    auto data = testkit::linear_dataset(300, 3, 13);
    auto c = testkit::small_config(data, 3, 5);
    RunRecord rec { 3, 0, "y", { "x1", "x2", "x3" }, gp::run(c, data) };
    auto traj = trajectory_csv(rec);
    EXPECT_EQ(traj.substr(0, traj.find('\n')), "generation,x1,x2,x3");
    EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), static_cast<long>(c.max_generations + 2));

    std::vector<std::vector<double>> runs { rec.result.relevance() };
    std::vector<AggregatedRelevance> aggs { aggregate_runs("y", 3, rec.inputs, runs) };
    auto rel = relevance_csv(aggs);
    EXPECT_EQ(rel.substr(0, rel.find('\n')), "target,input,mean,std,repetitions");

    std::vector<double> samples { 1, 2, 3, 4, 100 };
    std::vector<TargetBoxplot> boxes { { "y", boxplot_stats(samples) } };
    auto box = boxplot_csv(boxes);
    EXPECT_EQ(box.substr(0, box.find('\n')), "target,median,q1,q3,lo_whisker,hi_whisker,outliers,n");
    EXPECT_NE(box.find("\ny,3,2,4,1,4,[100],5\n"), std::string::npos);
    EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
}

TEST(Report, UnknownGpParameter)
{
    gp::GPConfig c;
    try {
        apply_gp_parameters(json { { "population", 5 } }, c);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "gp.population");
    }
    apply_gp_parameters(json { { "population_size", 5 }, { "function_set", { "add", "mul" } } }, c);
    EXPECT_EQ(c.population_size, 5u);
    EXPECT_EQ(c.function_set, (std::vector<Opcode> { Opcode::Add, Opcode::Mul }));
}

TEST(ConfigFile, KeysAndRelativePaths)
{
    auto dir = testkit::scratch_dir("config_file");
    write_text(dir / "exp.json", R"({"data": "d.csv", "gp": {"population_size": 50}, "repetitions": 3, "targets": ["y"], "seed": 9, "out": "res", "top_k": 2})");
    auto c = load_experiment_config(dir / "exp.json");
    EXPECT_EQ(c.data, dir / "d.csv");
    EXPECT_EQ(c.out, dir / "res");
    EXPECT_EQ(c.gp.population_size, 50u);
    EXPECT_EQ(c.gp.max_generations, 150u);
    EXPECT_EQ(c.repetitions, 3u);
    EXPECT_EQ(c.master_seed, 9u);
    EXPECT_EQ(c.top_k, 2u);

    write_text(dir / "bad.json", R"({"repetitons": 3})");
    try {
        load_experiment_config(dir / "bad.json");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "repetitons");
    }
    write_text(dir / "type.json", R"({"repetitions": "many"})");
    EXPECT_THROW(load_experiment_config(dir / "type.json"), ConfigError);
}

TEST(Execute, WritesEveryOutput)
{
    auto dir = testkit::scratch_dir("execute_outputs");
    auto c = tiny_experiment(dir);
    auto report = execute(c);
    EXPECT_EQ(report.summary.runs.size(), 10u);
    EXPECT_EQ(report.summary.aggregates.size(), 5u);
    for (const char* f : { "manifest.json", "relevance.csv", "boxplot.csv", "network.dot", "network.graphml", "timings.json" }) {
        EXPECT_TRUE(fs::exists(c.out / f)) << f;
    }
    EXPECT_TRUE(fs::exists(c.out / "runs" / "run_t004_r001.json"));
    EXPECT_TRUE(fs::exists(c.out / "trajectories" / "run_t000_r000.csv"));
    auto manifest = json::parse(read_text(c.out / "manifest.json"));
    EXPECT_EQ(manifest.at("status"), "complete");
    EXPECT_EQ(manifest.at("runs").size(), 10u);
    EXPECT_EQ(manifest.at("whisker_factor"), 4.0);
    for (const auto& agg : report.summary.aggregates) {
        double sum = 0;
        for (double m : agg.mean) sum += m;
        EXPECT_LE(sum, 1.0 + 1e-9);
    }
}

TEST(Execute, WorkerCountDoesNotChangeReports)
{
    auto dir = testkit::scratch_dir("execute_workers");
    auto c = tiny_experiment(dir);
    c.out = dir / "one";
    c.workers = 1;
    execute(c);
    c.out = dir / "two";
    c.workers = 2;
    execute(c);
    auto a = files_under(dir / "one"), b = files_under(dir / "two");
    a.erase("timings.json");
    b.erase("timings.json");
    EXPECT_EQ(a, b);
}

TEST(Execute, DifferentSeedSameSchema)
{
    auto dir = testkit::scratch_dir("execute_seed");
    auto c = tiny_experiment(dir, 1);
    c.out = dir / "s1";
    execute(c);
    c.master_seed = 2;
    c.out = dir / "s2";
    execute(c);
    auto a = files_under(dir / "s1"), b = files_under(dir / "s2");
    std::set<std::string> ka, kb;
    for (const auto& [k, v] : a) ka.insert(k);
    for (const auto& [k, v] : b) kb.insert(k);
    EXPECT_EQ(ka, kb);
    EXPECT_NE(a.at("runs/run_t000_r000.json"), b.at("runs/run_t000_r000.json"));
}

TEST(Execute, ResumeSkipsFinishedRuns)
{
    auto dir = testkit::scratch_dir("execute_resume");
    auto c = tiny_experiment(dir);
    execute(c);
    const auto first = files_under(c.out);
    fs::remove(c.out / "runs" / "run_t001_r000.json");
    c.resume = true;
    std::size_t resumed = 0, fresh = 0;
    execute(c, [&](const PlannedRun&, const RunRecord&, bool was_resumed) { (was_resumed ? resumed : fresh)++; });
    EXPECT_EQ(resumed, 9u);
    EXPECT_EQ(fresh, 1u);
    auto second = files_under(c.out);
    second.erase("timings.json");
    auto expected = first;
    expected.erase("timings.json");
    EXPECT_EQ(second, expected);
}

TEST(Execute, FailureIsRecordedInManifest)
{
    auto dir = testkit::scratch_dir("execute_failure");
    auto c = tiny_experiment(dir);
    c.targets = { "x2" };
    // a directory squatting on the run file makes the write fail
    fs::create_directories(c.out / "runs" / "run_t001_r001.json" / "blocker");
    EXPECT_THROW(execute(c), Error);
    auto manifest = json::parse(read_text(c.out / "manifest.json"));
    EXPECT_EQ(manifest.at("status"), "failed");
    const auto msg = manifest.at("error").get<std::string>();
    EXPECT_NE(msg.find("'x2'"), std::string::npos);
    EXPECT_NE(msg.find("repetition 1"), std::string::npos);
    EXPECT_NE(msg.find("seed " + std::to_string(derive_seed(c.master_seed, 1, 1))), std::string::npos);
}

TEST(Execute, MissingOutputDirectoryOption)
{
    auto dir = testkit::scratch_dir("execute_no_out");
    auto c = tiny_experiment(dir);
    c.out.clear();
    EXPECT_THROW(execute(c), ConfigError);
}
