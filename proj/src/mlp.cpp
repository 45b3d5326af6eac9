// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs)
    , hidden_(hidden)
    , params_(Vector::Zero(static_cast<Eigen::Index>(hidden * inputs + 2 * hidden + 1)))
{
}

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden, Vector params)
    : inputs_(inputs)
    , hidden_(hidden)
    , params_(std::move(params))
{
    if (static_cast<std::size_t>(params_.size()) != parameter_count()) {
        throw ConfigError(fmt::format("network {}x{} needs {} parameters, got {}", inputs, hidden,
                                      parameter_count(), params_.size()));
    }
}

namespace {

using RowMatrix = Matrix;

struct Views {
    Eigen::Map<const RowMatrix> w1;
    Eigen::Map<const Vector> b1;
    Eigen::Map<const Vector> w2;
    double b2;
};

Views views(const Vector& params, std::size_t p, std::size_t h)
{
    const double* base = params.data();
    const auto hp = static_cast<Eigen::Index>(h * p);
    const auto hh = static_cast<Eigen::Index>(h);
    return { Eigen::Map<const RowMatrix>(base, hh, static_cast<Eigen::Index>(p)),
             Eigen::Map<const Vector>(base + hp, hh), Eigen::Map<const Vector>(base + hp + hh, hh),
             base[hp + 2 * hh] };
}

// tanh through one vectorized exp; agrees with std::tanh to within an ulp.
template <class Derived>
void apply_tanh(Eigen::PlainObjectBase<Derived>& m)
{
    auto a = m.array();
    const auto e = (-2.0 * a.abs()).exp().eval();
    a = a.sign() * (1.0 - e) / (1.0 + e);
}

} // namespace

double MlpNetwork::forward(std::span<const double> x) const
{
    const auto v = views(params_, inputs_, hidden_);
    const Eigen::Map<const Vector> input(x.data(), static_cast<Eigen::Index>(inputs_));
    Vector hidden = v.w1 * input + v.b1;
    apply_tanh(hidden);
    Vector out = Vector::Constant(1, v.w2.dot(hidden) + v.b2);
    apply_tanh(out);
    return out[0];
}

double MlpNetwork::loss(const Matrix& x, const Vector& t, Vector* grad) const
{
    const auto v = views(params_, inputs_, hidden_);
    const auto n = static_cast<double>(x.rows());

    // a1 = X W1^T + b1, h1 = tanh(a1), o = tanh(h1 w2 + b2)
    RowMatrix h1 = (x * v.w1.transpose()).rowwise() + v.b1.transpose();
    apply_tanh(h1);
    Vector out = (h1 * v.w2).array() + v.b2;
    apply_tanh(out);
    const Vector err = out - t;
    const double mse = err.squaredNorm() / n;
    if (grad == nullptr) {
        return mse;
    }

    grad->resize(params_.size());
    const auto p = static_cast<Eigen::Index>(inputs_);
    const auto h = static_cast<Eigen::Index>(hidden_);
    const Vector d2 = (2.0 / n) * err.array() * (1.0 - out.array().square());
    const RowMatrix d1 = (d2 * v.w2.transpose()).array() * (1.0 - h1.array().square());

    Eigen::Map<RowMatrix>(grad->data(), h, p) = d1.transpose() * x;
    grad->segment(h * p, h) = d1.colwise().sum().transpose();
    grad->segment(h * p + h, h) = h1.transpose() * d2;
    (*grad)[h * p + 2 * h] = d2.sum();
    return mse;
}

std::vector<double> rprop_train(MlpNetwork& net, const Matrix& x, const Vector& t, int max_iter,
                                double epsilon, const RpropConstants& c)
{
    Vector& w = net.parameters();
    Vector step = Vector::Constant(w.size(), c.delta_initial);
    Vector prev_grad = Vector::Zero(w.size());
    Vector grad;
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(max_iter));

    for (int it = 0; it < max_iter; ++it) {
        const double mse = net.loss(x, t, &grad);
        trace.push_back(mse);
        if (mse < epsilon) {
            break;
        }
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double s = prev_grad[i] * grad[i];
            if (s > 0.0) {
                step[i] = std::min(step[i] * c.increase, c.delta_max);
            } else if (s < 0.0) {
                step[i] = std::max(step[i] * c.decrease, c.delta_min);
                grad[i] = 0.0; // iRPROP-: skip this weight, forget the sign
            }
            if (grad[i] > 0.0) {
                w[i] -= step[i];
            } else if (grad[i] < 0.0) {
                w[i] += step[i];
            }
        }
        prev_grad = grad;
    }
    return trace;
}

MlpModel::MlpModel(MlpNetwork net, Vector input_mean, Vector input_scale, TargetScaler scaler,
                   std::vector<double> trace)
    : net_(std::move(net))
    , input_mean_(std::move(input_mean))
    , input_scale_(std::move(input_scale))
    , scaler_(scaler)
    , dim_(net_->inputs())
    , trace_(std::move(trace))
{
}

MlpModel::MlpModel(double constant, std::size_t dim)
    : constant_(constant)
    , dim_(dim)
{
}

double MlpModel::predict(std::span<const double> x) const
{
    if (!net_) {
        return constant_;
    }
    std::vector<double> z(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        z[j] = (x[j] - input_mean_[jj]) / input_scale_[jj];
    }
    return scaler_.unscale(net_->forward(z));
}

void MlpModel::save(ModelWriter& out) const
{
    out.integer(static_cast<std::int64_t>(dim_));
    if (!net_) {
        out.word("constant");
        out.real(constant_);
        return;
    }
    out.word("network");
    out.integer(static_cast<std::int64_t>(net_->hidden()));
    out.real(scaler_.lo);
    out.real(scaler_.hi);
    out.reals({ input_mean_.data(), static_cast<std::size_t>(input_mean_.size()) });
    out.reals({ input_scale_.data(), static_cast<std::size_t>(input_scale_.size()) });
    out.reals({ net_->parameters().data(), static_cast<std::size_t>(net_->parameters().size()) });
    out.reals(trace_);
}

ModelPtr MlpModel::load(ModelReader& in)
{
    const auto dim = static_cast<std::size_t>(in.integer());
    const auto form = in.word();
    if (form == "constant") {
        return std::make_shared<MlpModel>(in.real(), dim);
    }
    if (form != "network") {
        throw DataError(fmt::format("model file corrupt: unknown network form '{}'", form));
    }
    const auto hidden = static_cast<std::size_t>(in.integer());
    TargetScaler scaler;
    scaler.lo = in.real();
    scaler.hi = in.real();
    Vector mean = in.reals();
    Vector scale = in.reals();
    Vector params = in.reals();
    const Vector trace = in.reals();
    if (static_cast<std::size_t>(mean.size()) != dim || static_cast<std::size_t>(scale.size()) != dim) {
        throw DataError("model file corrupt: network input size mismatch");
    }
    return std::make_shared<MlpModel>(MlpNetwork(dim, hidden, std::move(params)), std::move(mean),
                                      std::move(scale), scaler,
                                      std::vector<double>(trace.data(), trace.data() + trace.size()));
}

ModelPtr train_mlp_rprop(const Dataset& tr, const NetParams& params, Rng& rng)
{
    if (params.hidden < 1 || params.max_iter < 1 || !(params.epsilon > 0.0)) {
        throw ConfigError(fmt::format("invalid network parameters: hidden {}, max_iter {}, epsilon {}",
                                      params.hidden, params.max_iter, params.epsilon));
    }
    const auto& y = tr.targets();
    if (y.minCoeff() == y.maxCoeff()) {
        return std::make_shared<MlpModel>(y[0], tr.cols());
    }
    const TargetScaler scaler = fit_scaler(y);
    const Vector t = y.unaryExpr([&](double v) { return scaler.scale(v); });

    // Standardize inputs; constant columns keep unit scale.
    const Vector mean = tr.features().colwise().mean().transpose();
    Matrix x = tr.features().rowwise() - mean.transpose();
    Vector scale = (x.array().square().colwise().sum() / static_cast<double>(tr.rows())).sqrt().transpose();
    for (auto& s : scale) {
        if (!(s > 0.0)) s = 1.0;
    }
    x = x.array().rowwise() / scale.transpose().array();

    MlpNetwork net(tr.cols(), static_cast<std::size_t>(params.hidden));
    for (auto& w : net.parameters()) {
        w = uniform_real(rng, -0.5, 0.5);
    }
    auto trace = rprop_train(net, x, t, params.max_iter, params.epsilon);
    return std::make_shared<MlpModel>(std::move(net), mean, std::move(scale), scaler, std::move(trace));
}

} // namespace stackevo
