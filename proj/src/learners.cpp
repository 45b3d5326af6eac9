// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "stackevo/ensembles.hpp"
#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

Vector RegressionFunction::predict_batch(const Matrix& x, Exec exec) const
{
    if (static_cast<std::size_t>(x.cols()) != input_dim()) {
        throw DataError(fmt::format("input dimension mismatch: model expects {} features, got {}",
                                    input_dim(), x.cols()));
    }
    Vector out(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    parallel_for(
        static_cast<std::size_t>(x.rows()),
        [&](std::size_t i) { out[static_cast<Eigen::Index>(i)] = predict({ x.data() + i * p, p }); },
        exec);
    return out;
}

std::string_view metric_name(Metric m) { return m == Metric::Manhattan ? "manhattan" : "euclidean"; }

LearnerKind LearnerSpec::kind() const
{
    return std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MeanParams>) return LearnerKind::Mean;
            else if constexpr (std::is_same_v<T, KnnParams>) return LearnerKind::Knn;
            else if constexpr (std::is_same_v<T, PlsParams>) return LearnerKind::Pls;
            else if constexpr (std::is_same_v<T, ForestParams>) return LearnerKind::RandomForest;
            else if constexpr (std::is_same_v<T, NetParams>) return LearnerKind::NeuralNet;
            else return LearnerKind::BaggedNeuralNet;
        },
        params);
}

namespace {

std::string net_suffix(const NetParams& n)
{
    return fmt::format("max{}-eps{:g}-h{}", n.max_iter, n.epsilon, n.hidden);
}

} // namespace

std::string LearnerSpec::name() const
{
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MeanParams>) {
                return "mean";
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                return fmt::format("knn-k{}-a{:g}-{}", p.k, p.alpha, metric_name(p.metric));
            } else if constexpr (std::is_same_v<T, PlsParams>) {
                return fmt::format("pls-l{}", p.components);
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                std::string s = fmt::format("rf-n{}", p.trees);
                if (p.min_leaf != ForestParams {}.min_leaf) s += fmt::format("-leaf{}", p.min_leaf);
                if (p.mtry != 0) s += fmt::format("-mtry{}", p.mtry);
                return s;
            } else if constexpr (std::is_same_v<T, NetParams>) {
                return "nn-" + net_suffix(p);
            } else {
                return fmt::format("bagnn-t{}-{}", p.bags, net_suffix(p.net));
            }
        },
        params);
}

namespace {

void validate_net(const NetParams& n)
{
    if (n.max_iter < 1) throw ConfigError(fmt::format("neural net max iterations must be >= 1, got {}", n.max_iter));
    if (!(n.epsilon > 0.0)) throw ConfigError(fmt::format("neural net error threshold must be > 0, got {}", n.epsilon));
    if (n.hidden < 1) throw ConfigError(fmt::format("neural net hidden size must be >= 1, got {}", n.hidden));
}

} // namespace

void LearnerSpec::validate() const
{
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, KnnParams>) {
                if (p.k < 1) throw ConfigError(fmt::format("k-NN k must be >= 1, got {}", p.k));
                if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha))
                    throw ConfigError(fmt::format("k-NN alpha must be finite and >= 0, got {}", p.alpha));
            } else if constexpr (std::is_same_v<T, PlsParams>) {
                if (p.components < 1) throw ConfigError(fmt::format("PLS component count must be >= 1, got {}", p.components));
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                if (p.trees < 1) throw ConfigError(fmt::format("forest tree count must be >= 1, got {}", p.trees));
                if (p.min_leaf < 1) throw ConfigError(fmt::format("minimum leaf size must be >= 1, got {}", p.min_leaf));
                if (p.mtry < 0) throw ConfigError(fmt::format("mtry must be >= 0, got {}", p.mtry));
            } else if constexpr (std::is_same_v<T, NetParams>) {
                validate_net(p);
            } else if constexpr (std::is_same_v<T, BaggedNetParams>) {
                if (p.bags < 1) throw ConfigError(fmt::format("bag count must be >= 1, got {}", p.bags));
                validate_net(p.net);
            }
        },
        params);
}

namespace {

std::vector<std::string_view> split_dashes(std::string_view s)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find('-', start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <class T>
T number_after(std::string_view token, std::string_view prefix, std::string_view whole)
{
    if (!token.starts_with(prefix)) {
        throw ConfigError(fmt::format("cannot parse learner name '{}': expected '{}<value>', found '{}'",
                                      whole, prefix, token));
    }
    token.remove_prefix(prefix.size());
    T v {};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ConfigError(fmt::format("cannot parse learner name '{}': bad number '{}'", whole, token));
    }
    return v;
}

NetParams parse_net(std::span<const std::string_view> t, std::string_view whole)
{
    if (t.size() != 3) {
        throw ConfigError(fmt::format("cannot parse learner name '{}': expected max<N>-eps<E>-h<H>", whole));
    }
    return { number_after<int>(t[0], "max", whole), number_after<double>(t[1], "eps", whole),
             number_after<int>(t[2], "h", whole) };
}

} // namespace

LearnerSpec LearnerSpec::parse(std::string_view name)
{
    const auto t = split_dashes(name);
    const std::span<const std::string_view> rest(t.data() + 1, t.size() - 1);
    LearnerSpec spec;
    if (t[0] == "mean" && rest.empty()) {
        spec.params = MeanParams {};
    } else if (t[0] == "pls" && rest.size() == 1) {
        spec.params = PlsParams { number_after<int>(rest[0], "l", name) };
    } else if (t[0] == "knn" && rest.size() == 3) {
        Metric m;
        if (rest[2] == "manhattan") m = Metric::Manhattan;
        else if (rest[2] == "euclidean") m = Metric::Euclidean;
        else throw ConfigError(fmt::format("cannot parse learner name '{}': unknown metric '{}'", name, rest[2]));
        spec.params = KnnParams { number_after<int>(rest[0], "k", name), number_after<double>(rest[1], "a", name), m };
    } else if (t[0] == "rf" && !rest.empty() && rest.size() <= 3) {
        ForestParams f;
        f.trees = number_after<int>(rest[0], "n", name);
        for (std::size_t i = 1; i < rest.size(); ++i) {
            if (rest[i].starts_with("leaf")) f.min_leaf = number_after<int>(rest[i], "leaf", name);
            else f.mtry = number_after<int>(rest[i], "mtry", name);
        }
        spec.params = f;
    } else if (t[0] == "nn") {
        spec.params = parse_net(rest, name);
    } else if (t[0] == "bagnn" && !rest.empty()) {
        spec.params = BaggedNetParams { number_after<int>(rest[0], "t", name), parse_net(rest.subspan(1), name) };
    } else {
        throw ConfigError(fmt::format("unknown learner '{}'", name));
    }
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------

void MeanModel::save(ModelWriter& out) const
{
    out.integer(static_cast<std::int64_t>(dim_));
    out.real(value_);
}

ModelPtr MeanModel::load(ModelReader& in)
{
    const auto dim = static_cast<std::size_t>(in.integer());
    return std::make_shared<MeanModel>(in.real(), dim);
}

AveragingModel::AveragingModel(std::vector<ModelPtr> members, std::string label)
    : members_(std::move(members))
    , label_(std::move(label))
{
    if (members_.empty()) {
        throw ConfigError("averaging model needs at least one member");
    }
}

double AveragingModel::predict(std::span<const double> x) const
{
    double sum = 0.0;
    for (const auto& m : members_) {
        sum += m->predict(x);
    }
    return sum / static_cast<double>(members_.size());
}

void AveragingModel::save(ModelWriter& out) const
{
    out.text(label_);
    out.integer(static_cast<std::int64_t>(members_.size()));
    for (const auto& m : members_) {
        out.model(*m);
    }
}

ModelPtr AveragingModel::load(ModelReader& in)
{
    auto label = in.text();
    const auto n = in.integer();
    std::vector<ModelPtr> members;
    for (std::int64_t i = 0; i < n; ++i) {
        members.push_back(in.model());
    }
    return std::make_shared<AveragingModel>(std::move(members), std::move(label));
}

ModelPtr train_mean(const Dataset& tr)
{
    return std::make_shared<MeanModel>(tr.targets().mean(), tr.cols());
}

ModelPtr train_learner(const LearnerSpec& spec, const Dataset& tr, Rng& rng)
{
    spec.validate();
    const auto n = static_cast<int>(tr.rows());
    const auto p = static_cast<int>(tr.cols());
    return std::visit(
        [&](const auto& params) -> ModelPtr {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, MeanParams>) {
                return train_mean(tr);
            } else if constexpr (std::is_same_v<T, KnnParams>) {
                return train_knn(tr, std::min(params.k, n), params.alpha, params.metric);
            } else if constexpr (std::is_same_v<T, PlsParams>) {
                const int bound = std::min(p, n - 1);
                if (bound < 1) {
                    return train_mean(tr);
                }
                return train_pls(tr, std::min(params.components, bound));
            } else if constexpr (std::is_same_v<T, ForestParams>) {
                return train_random_forest(tr, params.trees, rng, params.min_leaf, params.mtry);
            } else if constexpr (std::is_same_v<T, NetParams>) {
                return train_mlp_rprop(tr, params, rng);
            } else {
                BaggingSpec bag { std::make_shared<TrainSpec>(TrainSpec { LearnerSpec { params.net } }), params.bags };
                return train_bagging(bag, tr, rng);
            }
        },
        spec.params);
}

} // namespace stackevo
