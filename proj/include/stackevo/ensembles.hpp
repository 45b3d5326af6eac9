// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "stackevo/learners.hpp"

namespace stackevo {

struct TrainSpec;

struct BaggingSpec {
    std::shared_ptr<const TrainSpec> base;
    int bags = 1;
};

struct StackingSpec {
    std::vector<TrainSpec> ensemble; // level-1 learners, in level-2 feature order
    std::shared_ptr<const TrainSpec> level2;
    int folds = 2;
};

// Anything trainable: a single learner, a bagged learner or a stack. The
// composites nest arbitrarily.
struct TrainSpec {
    std::variant<LearnerSpec, BaggingSpec, StackingSpec> node;

    // One-line human-readable description.
    std::string describe() const;
};

TrainSpec make_spec(LearnerSpec learner);
TrainSpec make_bagging(TrainSpec base, int bags);
TrainSpec make_stacking(std::vector<TrainSpec> ensemble, TrainSpec level2, int folds);

ModelPtr train(const TrainSpec& spec, const Dataset& tr, Rng& rng, Exec exec = Exec::Parallel);

// t bootstrap resamples of size N; the model averages the t members.
ModelPtr train_bagging(const BaggingSpec& spec, const Dataset& tr, Rng& rng, Exec exec = Exec::Parallel);

// Level-2 training set built from cross-validated level-1 predictions.
// Rows are ordered by (fold, sample index); source_index[r] is the
// training sample that row r was predicted for.
struct Level2Set {
    Matrix features;
    Vector targets;
    std::vector<std::size_t> source_index;
};

Level2Set build_level2_set(const StackingSpec& spec, const Dataset& tr, std::uint64_t run_seed,
                           Exec exec = Exec::Parallel);

ModelPtr train_stacking(const StackingSpec& spec, const Dataset& tr, Rng& rng, Exec exec = Exec::Parallel);

ModelPtr compose(std::vector<ModelPtr> level1, ModelPtr level2);

} // namespace stackevo
