// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "stackevo/random.hpp"

namespace stackevo {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// N labeled samples: an N x p feature matrix and N targets. Immutable once
// constructed; the constructor enforces N >= 1, p >= 1 and finiteness.
class Dataset {
public:
    Dataset(Matrix features, Vector targets, std::string name = {},
            std::vector<std::string> feature_names = {});

    std::size_t rows() const { return static_cast<std::size_t>(features_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(features_.cols()); }

    const Matrix& features() const { return features_; }
    const Vector& targets() const { return targets_; }
    const std::string& name() const { return name_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    std::span<const double> row(std::size_t i) const
    {
        return { features_.data() + i * cols(), cols() };
    }
    double target(std::size_t i) const { return targets_[static_cast<Eigen::Index>(i)]; }

    // Rows in the given order; duplicates allowed (bootstrap samples).
    Dataset select(std::span<const std::size_t> indices) const;

private:
    Matrix features_;
    Vector targets_;
    std::string name_;
    std::vector<std::string> feature_names_;
};

// Affine map of [lo, hi] onto [-1, 1]. Values outside the range extrapolate.
struct TargetScaler {
    double lo = -1.0;
    double hi = 1.0;

    double scale(double y) const { return (2.0 * (y - lo)) / (hi - lo) - 1.0; }
    double unscale(double s) const { return lo + (s + 1.0) * (hi - lo) / 2.0; }
};

TargetScaler fit_scaler(std::span<const double> targets);
TargetScaler fit_scaler(const Vector& targets);

struct FoldAssignment {
    int k = 0;
    std::vector<int> membership;

    std::size_t size() const { return membership.size(); }
    std::vector<std::size_t> test_indices(int fold) const;
    std::vector<std::size_t> train_indices(int fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

// Reads a comma-separated file with a header row. Blank lines and lines
// starting with '#' are skipped. The target column is
// chosen by name; the remaining columns become features in file order.
Dataset load_csv(const std::filesystem::path& path, std::string_view target_column);

// Reads a header + numeric body where every column is a feature.
Matrix load_feature_csv(const std::filesystem::path& path,
                        std::vector<std::string>* header = nullptr);

// Writes features then the target column, full round-trip precision.
void write_csv(const Dataset& data, const std::filesystem::path& path,
               std::string_view target_name = "y");
void write_csv(const Dataset& data, std::ostream& out, std::string_view target_name = "y");

// Uniform sample without replacement of ceil(fraction * N) rows, kept in
// their original order.
Dataset subsample(const Dataset& data, double fraction, Rng& rng);

// Random balanced partition of [0, n) into k folds whose sizes differ by
// at most one.
FoldAssignment assign_folds(std::size_t n, int k, Rng& rng);

enum class Generator { Linear, Piecewise, SineMix, Heterogeneous };

struct SynthSpec {
    Generator generator = Generator::Heterogeneous;
    double noise = 0.0;
    std::size_t rows = 1000;
    std::size_t features = 0; // 0 selects the generator default
};

Generator parse_generator(std::string_view id);
std::string_view generator_name(Generator g);
std::size_t default_feature_count(Generator g);

// Noise-free response of a generator; synth_generate adds noise * N(0,1).
double synth_response(Generator g, std::span<const double> x);

Dataset synth_generate(const SynthSpec& spec, Rng& rng);

} // namespace stackevo
