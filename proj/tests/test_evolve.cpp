// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "stackevo/error.hpp"
#include "stackevo/evolve.hpp"
#include "test_util.hpp"

using namespace stackevo;
using stackevo::testing::random_dataset;

namespace {

Registry tiny_registry()
{
    std::vector<LearnerSpec> e;
    for (const char* n : { "mean", "pls-l2", "pls-l3", "knn-k10-a10-manhattan", "knn-k20-a20-euclidean", "rf-n5",
                           "rf-n10", "nn-max20-eps0.001-h3" }) {
        e.push_back(LearnerSpec::parse(n));
    }
    return Registry(std::move(e));
}

Individual genome(std::size_t l2, int folds, std::vector<bool> bits) { return { l2, folds, std::move(bits) }; }

} // namespace

TEST(Registry, DefaultEnumeratesTheGrid)
{
    const auto r = build_default_registry();
    ASSERT_EQ(r.size(), 104u);
    std::map<LearnerKind, int> counts;
    std::set<std::string> names;
    for (const auto& e : r.entries()) {
        ++counts[e.kind()];
        names.insert(e.name());
    }
    EXPECT_EQ(names.size(), 104u);
    EXPECT_EQ(counts[LearnerKind::Mean], 1);
    EXPECT_EQ(counts[LearnerKind::Pls], 9);
    EXPECT_EQ(counts[LearnerKind::Knn], 24);
    EXPECT_EQ(counts[LearnerKind::RandomForest], 6);
    EXPECT_EQ(counts[LearnerKind::NeuralNet], 16);
    EXPECT_EQ(counts[LearnerKind::BaggedNeuralNet], 48);
    EXPECT_EQ(r.at(0).name(), "mean");
    EXPECT_EQ(r.find("bagnn-t60-max500-eps0.005-h20"), 103u);
    EXPECT_FALSE(r.find("svm").has_value());
}

TEST(Registry, RejectsDuplicates)
{
    EXPECT_THROW(Registry({ LearnerSpec::parse("mean"), LearnerSpec::parse("mean") }), ConfigError);
}

TEST(Individual, EncodeDecode)
{
    const auto g = genome(3, 4, { true, false, false, true, false, false, false, true });
    EXPECT_EQ(g.encode(), "l2=4;folds=4;members=1+4+8");
    EXPECT_EQ(Individual::decode(g.encode(), 8), g);
    EXPECT_THROW(Individual::decode("l2=9;folds=4;members=1", 8), ConfigError);
    EXPECT_THROW(Individual::decode("l2=1;folds=7;members=1", 8), ConfigError);
    EXPECT_THROW(Individual::decode("l2=1;folds=4;members=", 8), ConfigError);
    EXPECT_THROW(Individual::decode("l2=1;folds=4;members=0", 8), ConfigError);
    EXPECT_THROW(Individual::decode("garbage", 8), ConfigError);
}

TEST(Operators, CrossoverTakesPrefixFromFirstParent)
{
    Rng rng(1);
    const auto p = genome(1, 3, { true, true, true, true, false, false, false, false });
    const auto q = genome(5, 6, { false, false, false, false, true, true, true, true });
    for (std::size_t cut = 1; cut <= 8; ++cut) {
        const auto c = crossover_at(p, q, cut, rng);
        EXPECT_EQ(c.level2, 1u);
        EXPECT_EQ(c.folds, 3);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(c.members[i], i < cut ? p.members[i] : q.members[i]);
    }
}

TEST(Operators, CrossoverRepairsEmptyChild)
{
    Rng rng(2);
    const auto p = genome(0, 2, { false, false, false, false, true, false, false, false });
    const auto q = genome(0, 2, { true, false, false, false, false, false, false, false });
    const auto c = crossover_at(p, q, 2, rng);
    EXPECT_EQ(c.popcount(), 1u);
}

TEST(Operators, MutateMChangesOneField)
{
    Rng rng(3);
    const auto g = genome(2, 3, { true, false, true, false, false, false, false, false });
    int level2_changes = 0, fold_changes = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto m = mutate_m(g, 8, rng);
        EXPECT_EQ(m.members, g.members);
        EXPECT_FALSE(m.level2 != g.level2 && m.folds != g.folds);
        EXPECT_GE(m.folds, kMinFolds);
        EXPECT_LE(m.folds, kMaxFolds);
        level2_changes += m.level2 != g.level2;
        fold_changes += m.folds != g.folds;
    }
    EXPECT_NEAR(level2_changes / 2000.0, 0.5 * 7.0 / 8.0, 0.04);
    EXPECT_NEAR(fold_changes / 2000.0, 0.5 * 4.0 / 5.0, 0.04);
}

TEST(Operators, MutateVFlipsOneBit)
{
    Rng rng(4);
    const auto g = genome(0, 2, { true, true, false, false, false, false, false, false });
    for (int i = 0; i < 200; ++i) {
        const auto m = mutate_v(g, rng);
        int diff = 0;
        for (std::size_t b = 0; b < 8; ++b) diff += m.members[b] != g.members[b];
        EXPECT_EQ(diff, 1);
    }
    const auto single = genome(0, 2, { false, false, true, false, false, false, false, false });
    for (int i = 0; i < 200; ++i) EXPECT_GE(mutate_v(single, rng).popcount(), 1u);
}

TEST(Operators, SizeLimit)
{
    Rng rng(5);
    const auto g = genome(0, 2, std::vector<bool>(8, true));
    for (std::size_t limit = 1; limit <= 9; ++limit) {
        const auto c = enforce_size_limit(g, limit, rng);
        EXPECT_EQ(c.popcount(), std::min<std::size_t>(limit, 8));
    }
}

TEST(Operators, RouletteFrequencies)
{
    Rng rng(6);
    const std::vector<double> f { 1.0, 2.0, 3.0, 4.0 };
    const auto picks = roulette_select(f, 100000, rng);
    std::vector<int> counts(4, 0);
    for (auto p : picks) ++counts[p];
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(counts[i] / 100000.0, f[i] / 10.0, 0.01);
    const std::vector<double> zero { 1.0, 0.0 };
    EXPECT_THROW(roulette_select(zero, 1, rng), ConfigError);
}

TEST(Operators, RandomIndividualRespectsLimit)
{
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_individual(104, 5, rng);
        EXPECT_NO_THROW(validate_individual(g, 104, 5));
    }
}

TEST(Genome, DecodeAndBack)
{
    const auto reg = build_default_registry();
    const auto g = genome(40, 4, [] {
        std::vector<bool> b(104, false);
        b[0] = b[2] = b[103] = true;
        return b;
    }());
    const auto spec = decode_genome(g, reg);
    EXPECT_EQ(spec.folds, 4);
    ASSERT_EQ(spec.ensemble.size(), 3u);
    EXPECT_EQ(std::get<LearnerSpec>(spec.ensemble[1].node).name(), "pls-l3");
    EXPECT_EQ(genome_from_spec(spec, reg), g);
    const auto text = describe_genome(g, reg);
    EXPECT_NE(text.find("[104] bagnn-t60-max500-eps0.005-h20"), std::string::npos) << text;
}

TEST(Fitness, MemoizedAndDeterministic)
{
    const auto reg = tiny_registry();
    Rng rng(8);
    auto d = random_dataset(60, 3, rng);
    GAConfig cfg;
    cfg.cv_folds = 3;
    FitnessCache cache;
    const auto g = genome(1, 3, { true, true, false, false, false, true, false, false });
    const double a = fitness(g, d, cfg, reg, cache);
    const double b = fitness(g, d, cfg, reg, cache);
    EXPECT_EQ(a, b);
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_EQ(cache.hits(), 1u);
    FitnessCache fresh;
    EXPECT_EQ(fitness(g, d, cfg, reg, fresh), a);
}

TEST(GeneticAlgorithm, FullEliteIsFixedPoint)
{
    Rng rng(9);
    GAConfig cfg;
    cfg.population = 5;
    cfg.elite = 5;
    cfg.pm_m = 0.0;
    cfg.pm_v = 0.0;
    cfg.validate(8);
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < 5; ++i) pop.push_back(random_individual(8, std::nullopt, rng));
    const std::vector<double> errors { 3.0, 1.0, 2.0, 5.0, 4.0 };
    auto next = next_generation(pop, errors, cfg, 8, rng);
    auto a = pop, b = next;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(next.front(), pop[1]);
    cfg.elite = 6;
    EXPECT_THROW(cfg.validate(8), ConfigError);
}

TEST(GeneticAlgorithm, OddChildCountFillsPopulation)
{
    Rng rng(13);
    GAConfig cfg;
    cfg.population = 16;
    cfg.elite = 1;
    cfg.size_limit = 3;
    std::vector<Individual> pop;
    std::vector<double> errors;
    for (std::size_t i = 0; i < 16; ++i) {
        pop.push_back(random_individual(104, 3, rng));
        errors.push_back(1.0 + static_cast<double>(i));
    }
    const auto next = next_generation(pop, errors, cfg, 104, rng);
    ASSERT_EQ(next.size(), 16u);
    EXPECT_EQ(next.front(), pop.front());
    for (const auto& g : next) EXPECT_NO_THROW(validate_individual(g, 104, 3));
}

TEST(GeneticAlgorithm, TraceShapeAndElitism)
{
    const auto reg = tiny_registry();
    Rng rng(10);
    auto d = random_dataset(60, 3, rng);
    GAConfig cfg;
    cfg.population = 6;
    cfg.elite = 1;
    cfg.max_iterations = 8;
    cfg.cv_folds = 3;
    cfg.seed = 11;
    const auto trace = ga_run(d, cfg, reg, Exec::Serial);
    ASSERT_EQ(trace.iterations.size(), 8u);
    for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
        EXPECT_LE(trace.iterations[i].best_rmse, trace.iterations[i - 1].best_rmse);
        EXPECT_GE(trace.iterations[i].mean_rmse, trace.iterations[i].best_rmse);
    }
    EXPECT_EQ(trace.best_rmse, trace.iterations.back().best_rmse);

    const auto again = ga_run(d, cfg, reg, Exec::Parallel);
    std::ostringstream a, b;
    write_trace_csv(trace, a);
    write_trace_csv(again, b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "iteration,best_rmse,mean_rmse,best_genome");
}

TEST(GeneticAlgorithm, SeededGenomeIsEvaluatedFirst)
{
    const auto reg = tiny_registry();
    Rng rng(12);
    auto d = random_dataset(40, 2, rng);
    GAConfig cfg;
    cfg.population = 2;
    cfg.elite = 1;
    cfg.max_iterations = 1;
    cfg.cv_folds = 2;
    cfg.initial.push_back(genome(0, 2, { true, false, false, false, false, false, false, false }));
    const auto trace = ga_run(d, cfg, reg, Exec::Serial);
    FitnessCache cache;
    const double seeded = genome_rmse(cfg.initial[0], d, cfg, reg, cache, evaluation_seed(cfg));
    EXPECT_LE(trace.best_rmse, seeded);
}

TEST(GeneticAlgorithm, ConfigValidation)
{
    GAConfig cfg;
    cfg.pm_m = 1.5;
    EXPECT_THROW(cfg.validate(8), ConfigError);
    cfg = {};
    cfg.population = 1;
    EXPECT_THROW(cfg.validate(8), ConfigError);
    cfg = {};
    cfg.size_limit = 0;
    EXPECT_THROW(cfg.validate(8), ConfigError);
    cfg = {};
    cfg.fitness_fraction = 0.0;
    EXPECT_THROW(cfg.validate(8), ConfigError);
}
