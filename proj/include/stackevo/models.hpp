// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// Concrete trained models. Most callers only need learners.hpp; these are
// exposed for serialization and for white-box tests.

#pragma once

#include <optional>
#include <vector>

#include "stackevo/learners.hpp"

namespace stackevo {

class ModelReader;

class MeanModel final : public RegressionFunction {
public:
    MeanModel(double value, std::size_t dim) : value_(value), dim_(dim) {}

    double predict(std::span<const double>) const override { return value_; }
    std::size_t input_dim() const override { return dim_; }
    std::string_view tag() const override { return "mean"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    double value() const { return value_; }

private:
    double value_;
    std::size_t dim_;
};

double knn_distance(Metric metric, std::span<const double> a, std::span<const double> b);

class KnnModel final : public RegressionFunction {
public:
    struct Neighbor {
        std::size_t index;
        double distance;
    };

    KnnModel(Matrix x, Vector y, KnnParams params);

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return static_cast<std::size_t>(x_.cols()); }
    std::string_view tag() const override { return "knn"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    // The k lowest rows by (distance, row index), ascending.
    std::vector<Neighbor> neighbors(std::span<const double> x) const;
    const KnnParams& params() const { return params_; }

private:
    Matrix x_;
    Vector y_;
    KnnParams params_;
};

class PlsModel final : public RegressionFunction {
public:
    PlsModel(Vector coefficients, Vector x_mean, double y_mean, int requested, int used);

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return static_cast<std::size_t>(coef_.size()); }
    std::string_view tag() const override { return "pls"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    const Vector& coefficients() const { return coef_; }
    int components_requested() const { return requested_; }
    int components_used() const { return used_; }

private:
    Vector coef_;
    Vector x_mean_;
    double y_mean_;
    int requested_;
    int used_;
};

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0; // summed squared error of both children around their means
    std::size_t left_count = 0;
};

// Exhaustive best split over the given features for the rows of `x`
// listed in `rows`. Candidates are midpoints between consecutive distinct
// sorted values leaving at least min_leaf rows on each side. Ties go to
// the earlier feature in `features`, then the lower threshold.
std::optional<SplitCandidate> find_best_split(const Matrix& x, const Vector& y,
                                              std::span<const std::size_t> rows,
                                              std::span<const int> features, int min_leaf);

class RegressionTree final : public RegressionFunction {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    RegressionTree(std::vector<Node> nodes, std::size_t dim) : nodes_(std::move(nodes)), dim_(dim) {}

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return dim_; }
    std::string_view tag() const override { return "tree"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t leaf_count() const;

private:
    std::vector<Node> nodes_;
    std::size_t dim_;
};

// Arithmetic mean of member predictions; backs both random forests and
// bagging.
class AveragingModel final : public RegressionFunction {
public:
    AveragingModel(std::vector<ModelPtr> members, std::string label);

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return members_.front()->input_dim(); }
    std::string_view tag() const override { return "average"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    const std::vector<ModelPtr>& members() const { return members_; }
    const std::string& label() const { return label_; }

private:
    std::vector<ModelPtr> members_;
    std::string label_;
};

// Single-hidden-layer perceptron p -> h -> 1 with tanh units. Parameters
// are one flat vector: hidden weights (h x p, row-major), hidden biases,
// output weights, output bias.
class MlpNetwork {
public:
    MlpNetwork(std::size_t inputs, std::size_t hidden);
    MlpNetwork(std::size_t inputs, std::size_t hidden, Vector params);

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t parameter_count() const { return hidden_ * inputs_ + 2 * hidden_ + 1; }

    const Vector& parameters() const { return params_; }
    Vector& parameters() { return params_; }

    double forward(std::span<const double> x) const;

    // Mean squared error over the rows of x against t; fills grad with
    // its analytic gradient when non-null.
    double loss(const Matrix& x, const Vector& t, Vector* grad = nullptr) const;

private:
    std::size_t inputs_;
    std::size_t hidden_;
    Vector params_;
};

struct RpropConstants {
    double increase = 1.2;
    double decrease = 0.5;
    double delta_initial = 0.1;
    double delta_min = 1e-6;
    double delta_max = 50.0;
};

// Full-batch iRPROP- training. trace[i] is the training MSE measured
// before update i; training stops at the first measurement below epsilon
// or after max_iter updates.
std::vector<double> rprop_train(MlpNetwork& net, const Matrix& x, const Vector& t, int max_iter,
                                double epsilon, const RpropConstants& constants = {});

class MlpModel final : public RegressionFunction {
public:
    // Trained network over standardized inputs and [-1, 1] targets.
    MlpModel(MlpNetwork net, Vector input_mean, Vector input_scale, TargetScaler scaler,
             std::vector<double> trace);
    // Degenerate constant-target model.
    MlpModel(double constant, std::size_t dim);

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return dim_; }
    std::string_view tag() const override { return "mlp"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    const std::vector<double>& trace() const { return trace_; }
    bool is_constant() const { return !net_.has_value(); }

private:
    std::optional<MlpNetwork> net_;
    Vector input_mean_;
    Vector input_scale_;
    TargetScaler scaler_;
    double constant_ = 0.0;
    std::size_t dim_;
    std::vector<double> trace_;
};

// x -> level2(level1_0(x), ..., level1_n(x)).
class StackedModel final : public RegressionFunction {
public:
    StackedModel(std::vector<ModelPtr> level1, ModelPtr level2);

    double predict(std::span<const double> x) const override;
    std::size_t input_dim() const override { return level1_.front()->input_dim(); }
    std::string_view tag() const override { return "stack"; }
    void save(ModelWriter& out) const override;
    static ModelPtr load(ModelReader& in);

    const std::vector<ModelPtr>& level1() const { return level1_; }
    const ModelPtr& level2() const { return level2_; }

private:
    std::vector<ModelPtr> level1_;
    ModelPtr level2_;
};

} // namespace stackevo
