// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "stackevo/data.hpp"
#include "stackevo/parallel.hpp"
#include "stackevo/random.hpp"

namespace stackevo {

class ModelWriter;

// A trained model mapping a p-vector to a scalar. Implementations are
// immutable after training and prediction is reentrant.
class RegressionFunction {
public:
    virtual ~RegressionFunction() = default;

    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t input_dim() const = 0;

    // Tag identifying the concrete model in saved files.
    virtual std::string_view tag() const = 0;
    virtual void save(ModelWriter& out) const = 0;

    // One prediction per row of x; rows are independent tasks.
    Vector predict_batch(const Matrix& x, Exec exec = Exec::Serial) const;
};

using ModelPtr = std::shared_ptr<const RegressionFunction>;

enum class LearnerKind { Mean, Knn, Pls, RandomForest, NeuralNet, BaggedNeuralNet };
enum class Metric { Manhattan, Euclidean };

struct MeanParams {
    bool operator==(const MeanParams&) const = default;
};

struct KnnParams {
    int k = 10;
    double alpha = 0.0;
    Metric metric = Metric::Euclidean;
    bool operator==(const KnnParams&) const = default;
};

struct PlsParams {
    int components = 2;
    bool operator==(const PlsParams&) const = default;
};

struct ForestParams {
    int trees = 50;
    int min_leaf = 5;
    int mtry = 0; // 0: max(1, floor(p / 3))
    bool operator==(const ForestParams&) const = default;
};

struct NetParams {
    int max_iter = 100;
    double epsilon = 0.001;
    int hidden = 10;
    bool operator==(const NetParams&) const = default;
};

struct BaggedNetParams {
    int bags = 20;
    NetParams net;
    bool operator==(const BaggedNetParams&) const = default;
};

// Untrained learner description. The display name is derived from the
// hyperparameters and parses back into the same spec.
struct LearnerSpec {
    std::variant<MeanParams, KnnParams, PlsParams, ForestParams, NetParams, BaggedNetParams> params;

    LearnerKind kind() const;
    std::string name() const;
    void validate() const;

    static LearnerSpec parse(std::string_view name);

    bool operator==(const LearnerSpec&) const = default;
};

std::string_view metric_name(Metric m);

// Trainers. Each validates its own hyperparameters and throws ConfigError
// when they fall outside the admissible range for the given dataset.
ModelPtr train_mean(const Dataset& tr);
ModelPtr train_knn(const Dataset& tr, int k, double alpha, Metric metric);
ModelPtr train_pls(const Dataset& tr, int components);
ModelPtr train_regression_tree(const Dataset& tr, int mtry, int min_leaf, Rng& rng);
ModelPtr train_random_forest(const Dataset& tr, int n_trees, Rng& rng, int min_leaf = 5, int mtry = 0,
                             Exec exec = Exec::Parallel);
ModelPtr train_mlp_rprop(const Dataset& tr, const NetParams& params, Rng& rng);

// Dispatches a spec to its trainer. Registry hyperparameters that exceed
// what a small training set supports are clamped: k-NN k to N, PLS
// components to min(p, N - 1).
ModelPtr train_learner(const LearnerSpec& spec, const Dataset& tr, Rng& rng);

} // namespace stackevo
