#include <numeric>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace usr;
using namespace usr::expr;

TEST(PopulationFrequency, HandCountedExample)
{
    std::vector<ExpressionTree> pop { add(variable(0), variable(1)), mul(variable(0), variable(0)) };
    EXPECT_EQ(population_frequency(0, pop), 3u);
    EXPECT_EQ(population_frequency(1, pop), 1u);
    EXPECT_EQ(population_frequency(2, pop), 0u);
}

TEST(PopulationFrequency, WorksOnIndividuals)
{
    std::vector<gp::Individual> pop { { add(variable(0), variable(1)), 0.5 }, { mul(variable(0), variable(0)), 0.1 } };
    EXPECT_EQ(population_frequency(0, pop), 3u);
}

TEST(RelativeFrequency, HandCountedExample)
{
    std::vector<ExpressionTree> pop { add(variable(0), variable(1)), mul(variable(0), variable(0)) };
    const std::vector<std::size_t> inputs { 0, 1 };
    auto rf = relative_frequency(pop, inputs);
    EXPECT_DOUBLE_EQ(rf[0], 0.75);
    EXPECT_DOUBLE_EQ(rf[1], 0.25);
}

TEST(RelativeFrequency, AllConstantPopulationIsAllZero)
{
    std::vector<ExpressionTree> pop { constant(1), add(constant(2), constant(3)) };
    const std::vector<std::size_t> inputs { 0, 1, 2 };
    EXPECT_EQ(relative_frequency(pop, inputs), (std::vector<double> { 0, 0, 0 }));
}

TEST(RelativeFrequency, EmptyInputsRejected)
{
    std::vector<ExpressionTree> pop { variable(0) };
    EXPECT_THROW(relative_frequency(pop, std::span<const std::size_t> {}), Error);
}

TEST(RelativeFrequency, MatchesOracleAndSumsToOne)
{
    Rng rng(21);
    const std::vector<std::size_t> inputs { 0, 1, 2, 3, 4 };
    for (int trial = 0; trial < 100; ++trial) {
        auto pop = testkit::random_population(rng, 20, inputs.size());
        std::vector<std::size_t> counts;
        std::size_t total = 0;
        for (auto c : inputs) {
            std::size_t n = 0;
            for (const auto& t : pop) n += testkit::oracle::count_refs(c, t);
            ASSERT_EQ(population_frequency(c, pop), n);
            counts.push_back(n);
            total += n;
        }
        auto rf = relative_frequency(pop, inputs);
        double sum = 0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double expected = total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
            ASSERT_NEAR(rf[i], expected, 1e-12);
            sum += rf[i];
        }
        if (total) {
            ASSERT_NEAR(sum, 1.0, 1e-9);
        }
    }
}

TEST(RelativeFrequency, InvariantUnderPopulationDuplication)
{
    Rng rng(22);
    const std::vector<std::size_t> inputs { 0, 1, 2 };
    auto pop = testkit::random_population(rng, 30, inputs.size());
    auto doubled = pop;
    doubled.insert(doubled.end(), pop.begin(), pop.end());
    auto a = relative_frequency(pop, inputs);
    auto b = relative_frequency(doubled, inputs);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i], b[i], 1e-12);
    }
}

TEST(RunRelevance, MeanOverGenerations)
{
    std::vector<std::vector<double>> traj { { 1.0, 0.0 }, { 0.5, 0.5 } };
    EXPECT_EQ(run_relevance(traj), (std::vector<double> { 0.75, 0.25 }));
    std::vector<std::vector<double>> with_zero { { 0.6, 0.4 }, { 0.0, 0.0 } };
    auto r = run_relevance(with_zero);
    EXPECT_DOUBLE_EQ(r[0], 0.3);
    EXPECT_DOUBLE_EQ(r[1], 0.2);
}

TEST(RunRelevance, MatchesSummationOracle)
{
    Rng rng(23);
    std::vector<GenerationRelevance> traj;
    for (std::size_t g = 0; g < 151; ++g) {
        std::vector<double> v(6);
        for (auto& x : v) x = rng.unit();
        traj.push_back({ g, v });
    }
    auto r = run_relevance(traj);
    for (std::size_t i = 0; i < 6; ++i) {
        long double s = 0;
        for (const auto& g : traj) s += g.relative_frequency[i];
        ASSERT_NEAR(r[i], static_cast<double>(s / 151.0L), 1e-12);
    }
}

TEST(RunRelevance, Errors)
{
    EXPECT_THROW(run_relevance(std::span<const std::vector<double>> {}), Error);
    std::vector<std::vector<double>> ragged { { 1.0, 0.0 }, { 1.0 } };
    EXPECT_THROW(run_relevance(ragged), Error);
}

TEST(Aggregate, MeanAndSampleStd)
{
    std::vector<std::vector<double>> runs { { 0.2, 0.8 }, { 0.4, 0.6 } };
    auto agg = aggregate_runs("y", 2, { "a", "b" }, runs);
    EXPECT_NEAR(agg.mean[0], 0.3, 1e-15);
    EXPECT_NEAR(agg.mean[1], 0.7, 1e-15);
    EXPECT_NEAR(agg.stddev[0], 0.1414213562373095, 1e-12);
    EXPECT_EQ(agg.repetitions, 2u);
    EXPECT_EQ(agg.target, "y");

    std::vector<std::vector<double>> one { { 0.5, 0.5 } };
    EXPECT_EQ(aggregate_runs(one).stddev, (std::vector<double> { 0.0, 0.0 }));
}

TEST(Aggregate, MatchesWelfordOracle)
{
    Rng rng(24);
    std::vector<std::vector<double>> runs(30, std::vector<double>(4));
    for (auto& r : runs)
        for (auto& v : r) v = rng.unit();
    auto agg = aggregate_runs(runs);
    for (std::size_t i = 0; i < 4; ++i) {
        double mean = 0, m2 = 0;
        std::size_t n = 0;
        for (const auto& r : runs) {
            ++n;
            const double d = r[i] - mean;
            mean += d / static_cast<double>(n);
            m2 += d * (r[i] - mean);
        }
        ASSERT_NEAR(agg.mean[i], mean, 1e-12);
        ASSERT_NEAR(agg.stddev[i], std::sqrt(m2 / static_cast<double>(n - 1)), 1e-12);
    }
}

TEST(Aggregate, Errors)
{
    std::vector<std::vector<double>> ragged { { 0.5, 0.5 }, { 1.0 } };
    EXPECT_THROW(aggregate_runs(ragged), Error);
    EXPECT_THROW(aggregate_runs(std::span<const std::vector<double>> {}), Error);
    std::vector<std::vector<double>> ok { { 0.5, 0.5 } };
    EXPECT_THROW(aggregate_runs("y", 0, { "a" }, ok), Error);
}
