// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

double knn_distance(Metric metric, std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    if (metric == Metric::Manhattan) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            acc += std::abs(a[j] - b[j]);
        }
        return acc;
    }
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

KnnModel::KnnModel(Matrix x, Vector y, KnnParams params)
    : x_(std::move(x))
    , y_(std::move(y))
    , params_(params)
{
}

std::vector<KnnModel::Neighbor> KnnModel::neighbors(std::span<const double> x) const
{
    const auto n = static_cast<std::size_t>(x_.rows());
    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<Neighbor> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = { i, knn_distance(params_.metric, x, { x_.data() + i * p, p }) };
    }
    const auto k = std::min(static_cast<std::size_t>(params_.k), n);
    const auto less = [](const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), less);
    all.resize(k);
    return all;
}

double KnnModel::predict(std::span<const double> x) const
{
    const auto nb = neighbors(x);

    // Exact matches dominate: 1 / 0^alpha is singular, and the alpha -> inf
    // limit of the weighting picks the closest rows.
    if (nb.front().distance == 0.0) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& n : nb) {
            if (n.distance != 0.0) break;
            sum += y_[static_cast<Eigen::Index>(n.index)];
            ++count;
        }
        return sum / static_cast<double>(count);
    }

    // w_i = 1 / D_i^alpha, rescaled by D_min^alpha so large alphas neither
    // overflow nor underflow. The common factor cancels in the ratio.
    const double dmin = nb.front().distance;
    double num = 0.0;
    double den = 0.0;
    for (const auto& n : nb) {
        const double w = params_.alpha == 0.0 ? 1.0 : std::pow(dmin / n.distance, params_.alpha);
        num += w * y_[static_cast<Eigen::Index>(n.index)];
        den += w;
    }
    return num / den;
}

void KnnModel::save(ModelWriter& out) const
{
    out.integer(params_.k);
    out.real(params_.alpha);
    out.word(metric_name(params_.metric));
    out.integer(x_.rows());
    out.integer(x_.cols());
    out.reals({ x_.data(), static_cast<std::size_t>(x_.size()) });
    out.reals({ y_.data(), static_cast<std::size_t>(y_.size()) });
}

ModelPtr KnnModel::load(ModelReader& in)
{
    KnnParams params;
    params.k = static_cast<int>(in.integer());
    params.alpha = in.real();
    const auto metric = in.word();
    params.metric = metric == "manhattan" ? Metric::Manhattan : Metric::Euclidean;
    const auto rows = in.integer();
    const auto cols = in.integer();
    const Vector flat = in.reals();
    if (flat.size() != rows * cols) {
        throw DataError("model file corrupt: k-NN matrix size mismatch");
    }
    Matrix x = Eigen::Map<const Matrix>(flat.data(), rows, cols);
    Vector y = in.reals();
    return std::make_shared<KnnModel>(std::move(x), std::move(y), params);
}

ModelPtr train_knn(const Dataset& tr, int k, double alpha, Metric metric)
{
    if (k < 1) {
        throw ConfigError(fmt::format("k-NN k must be >= 1, got {}", k));
    }
    if (static_cast<std::size_t>(k) > tr.rows()) {
        throw ConfigError(fmt::format("k-NN k = {} exceeds the {} training samples", k, tr.rows()));
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ConfigError(fmt::format("k-NN alpha must be finite and >= 0, got {}", alpha));
    }
    return std::make_shared<KnnModel>(tr.features(), tr.targets(), KnnParams { k, alpha, metric });
}

} // namespace stackevo
