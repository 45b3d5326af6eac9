// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// PLS1 regression via NIPALS, deflating X only.

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

namespace {
constexpr double kTolerance = 1e-12;
constexpr int kMaxInnerIterations = 500;
} // namespace

PlsModel::PlsModel(Vector coefficients, Vector x_mean, double y_mean, int requested, int used)
    : coef_(std::move(coefficients))
    , x_mean_(std::move(x_mean))
    , y_mean_(y_mean)
    , requested_(requested)
    , used_(used)
{
}

double PlsModel::predict(std::span<const double> x) const
{
    double y = y_mean_;
    for (Eigen::Index j = 0; j < coef_.size(); ++j) {
        y += coef_[j] * (x[static_cast<std::size_t>(j)] - x_mean_[j]);
    }
    return y;
}

void PlsModel::save(ModelWriter& out) const
{
    out.integer(requested_);
    out.integer(used_);
    out.real(y_mean_);
    out.reals({ coef_.data(), static_cast<std::size_t>(coef_.size()) });
    out.reals({ x_mean_.data(), static_cast<std::size_t>(x_mean_.size()) });
}

ModelPtr PlsModel::load(ModelReader& in)
{
    const auto requested = static_cast<int>(in.integer());
    const auto used = static_cast<int>(in.integer());
    const double y_mean = in.real();
    Vector coef = in.reals();
    Vector x_mean = in.reals();
    if (coef.size() != x_mean.size()) {
        throw DataError("model file corrupt: PLS coefficient size mismatch");
    }
    return std::make_shared<PlsModel>(std::move(coef), std::move(x_mean), y_mean, requested, used);
}

ModelPtr train_pls(const Dataset& tr, int components)
{
    const auto n = static_cast<Eigen::Index>(tr.rows());
    const auto p = static_cast<Eigen::Index>(tr.cols());
    const int bound = static_cast<int>(std::min(p, n - 1));
    if (components < 1 || components > bound) {
        throw ConfigError(fmt::format("PLS component count {} outside [1, min(p, N-1)] = [1, {}]", components, bound));
    }

    const Vector x_mean = tr.features().colwise().mean().transpose();
    const double y_mean = tr.targets().mean();
    Eigen::MatrixXd x = tr.features().rowwise() - x_mean.transpose();
    const Vector y = tr.targets().array() - y_mean;

    Eigen::MatrixXd weights(p, components);
    Eigen::MatrixXd loadings(p, components);
    Vector q(components);

    // A centered target that is numerically zero carries no covariance.
    const double y_scale = std::max(1.0, std::abs(y_mean));
    const bool constant_target = y.cwiseAbs().maxCoeff() <= kTolerance * y_scale;
    const double x_energy = x.squaredNorm();

    int used = 0;
    for (int a = 0; a < components && !constant_target; ++a) {
        Vector u = y;
        Vector w = Vector::Zero(p);
        Vector t;
        double tt = 0.0;
        double qa = 0.0;
        bool degenerate = false;
        for (int it = 0; it < kMaxInnerIterations; ++it) {
            Vector w_new = x.transpose() * u;
            const double wn = w_new.norm();
            if (!(wn > 0.0) || !std::isfinite(wn)) {
                degenerate = true;
                break;
            }
            w_new /= wn;
            t = x * w_new;
            tt = t.squaredNorm();
            if (tt <= kTolerance * x_energy) {
                degenerate = true;
                break;
            }
            qa = y.dot(t) / tt;
            const double change = (w_new - w).norm();
            w = std::move(w_new);
            if (change < kTolerance || qa == 0.0) {
                break;
            }
            u = y / qa;
        }
        if (degenerate) {
            break;
        }
        const Vector load = x.transpose() * t / tt;
        x -= t * load.transpose();
        weights.col(a) = w;
        loadings.col(a) = load;
        q[a] = qa;
        ++used;
    }

    Vector coef = Vector::Zero(p);
    if (used > 0) {
        const auto w = weights.leftCols(used);
        const Eigen::MatrixXd pw = loadings.leftCols(used).transpose() * w;
        coef = w * pw.partialPivLu().solve(q.head(used));
    }
    return std::make_shared<PlsModel>(std::move(coef), x_mean, y_mean, components, used);
}

} // namespace stackevo
