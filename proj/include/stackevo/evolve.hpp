// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stackevo/ensembles.hpp"

namespace stackevo {

// Ordered base-learner set. Positions are stable for the lifetime of a
// run; text output numbers entries from 1.
class Registry {
public:
    Registry() = default;
    explicit Registry(std::vector<LearnerSpec> entries);

    std::size_t size() const { return entries_.size(); }
    const LearnerSpec& at(std::size_t i) const { return entries_.at(i); }
    const std::vector<LearnerSpec>& entries() const { return entries_; }
    std::optional<std::size_t> find(std::string_view name) const;

private:
    std::vector<LearnerSpec> entries_;
};

// Mean, PLS, k-NN, random forest, neural net and bagged neural net
// families over the standard hyperparameter grid (104 entries).
Registry build_default_registry();

// GA genome: level-2 learner, stacking fold count and level-1 membership.
struct Individual {
    std::size_t level2 = 0; // zero-based registry position
    int folds = 2;
    std::vector<bool> members;

    std::size_t popcount() const;
    std::vector<std::size_t> member_indices() const;

    // "l2=<i>;folds=<f>;members=<a>+<b>+..." with 1-based positions.
    std::string encode() const;
    static Individual decode(std::string_view text, std::size_t registry_size);

    bool operator==(const Individual&) const = default;
    bool operator<(const Individual& o) const;
};

inline constexpr int kMinFolds = 2;
inline constexpr int kMaxFolds = 6;

void validate_individual(const Individual& ind, std::size_t registry_size,
                         std::optional<std::size_t> size_limit = std::nullopt);

enum class FitnessMode { CrossValidation, ProportionalSplit };

struct GAConfig {
    std::size_t population = 16;
    std::size_t elite = 1;
    int max_iterations = 100;
    double pm_m = 0.2;
    double pm_v = 0.5;
    std::optional<std::size_t> size_limit;
    FitnessMode mode = FitnessMode::CrossValidation;
    int cv_folds = 5;
    double split_ratio = 0.7;
    double fitness_fraction = 1.0; // sub-sample the data once before the run
    std::uint64_t seed = kDefaultSeed;
    std::vector<Individual> initial; // seeded genomes; the rest is random

    void validate(std::size_t registry_size) const;
};

// With a fair coin: resample the level-2 learner uniformly, or the fold
// count uniformly from [2, 6]. Membership is untouched.
Individual mutate_m(Individual ind, std::size_t registry_size, Rng& rng);

// Flips one uniformly chosen membership bit; an emptied vector gets one
// random bit set again.
Individual mutate_v(Individual ind, Rng& rng);

// Child takes (level2, folds) and the first `cut` bits from p, the rest
// from q; cut is uniform in [1, |BL|].
Individual crossover(const Individual& p, const Individual& q, Rng& rng);
Individual crossover_at(const Individual& p, const Individual& q, std::size_t cut, Rng& rng);

// Clears uniformly chosen set bits until at most `limit` remain.
Individual enforce_size_limit(Individual ind, std::size_t limit, Rng& rng);

// `count` independent draws with P(i) = f_i / sum f. Returns positions.
std::vector<std::size_t> roulette_select(std::span<const double> fitnesses, std::size_t count, Rng& rng);

Individual random_individual(std::size_t registry_size, std::optional<std::size_t> size_limit, Rng& rng);

StackingSpec decode_genome(const Individual& ind, const Registry& registry);

// Genome rendered as a member table: level-2 learner, folds, one line per
// base learner.
std::string describe_genome(const Individual& ind, const Registry& registry);

// Reverse of decode_genome for stacks whose parts are all registry
// entries.
Individual genome_from_spec(const StackingSpec& spec, const Registry& registry);

inline double fitness_from_rmse(double rmse) { return 1.0 / std::max(rmse, 1e-9); }

// Thread-safe memo of evaluated genomes, keyed by genome and evaluation
// seed.
class FitnessCache {
public:
    std::optional<double> find(const Individual& ind, std::uint64_t eval_seed) const;
    // Keeps the first stored value and returns it.
    double insert(const Individual& ind, std::uint64_t eval_seed, double rmse);

    std::size_t size() const;
    std::size_t hits() const;

private:
    mutable std::mutex mutex_;
    std::map<std::pair<std::uint64_t, Individual>, double> values_;
    mutable std::size_t hits_ = 0;
};

// RMSE of the decoded stack under the configured evaluation mode, memoized.
double genome_rmse(const Individual& ind, const Dataset& data, const GAConfig& cfg, const Registry& registry,
                   FitnessCache& cache, std::uint64_t eval_seed, Exec exec = Exec::Serial);

// Evaluation seed shared by every fitness call of a run.
std::uint64_t evaluation_seed(const GAConfig& cfg);

// 1 / max(RMSE, 1e-9), using the run's fixed evaluation seed.
double fitness(const Individual& ind, const Dataset& data, const GAConfig& cfg, const Registry& registry,
               FitnessCache& cache);

struct IterationRecord {
    int iteration = 0;
    double best_rmse = 0.0;
    double mean_rmse = 0.0;
    Individual best;
};

struct EvolutionTrace {
    std::vector<IterationRecord> iterations;
    Individual best;          // lowest RMSE seen in any iteration
    double best_rmse = 0.0;
    Individual last_best;     // best of the final iteration
    std::size_t evaluations = 0;
};

// One generation: roulette selection, paired two-way crossover, top-E
// elitism, mutation and size limit. `errors` holds the RMSE of each genome.
std::vector<Individual> next_generation(const std::vector<Individual>& pop, std::span<const double> errors,
                                        const GAConfig& cfg, std::size_t registry_size, Rng& rng);

using ProgressCallback = std::function<void(const IterationRecord&)>;

EvolutionTrace ga_run(const Dataset& data, const GAConfig& cfg, const Registry& registry,
                      Exec exec = Exec::Parallel, const ProgressCallback& progress = {});

// Columns: iteration,best_rmse,mean_rmse,best_genome
void write_trace_csv(const EvolutionTrace& trace, std::ostream& out);

} // namespace stackevo
