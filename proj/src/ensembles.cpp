// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/ensembles.hpp"

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

std::string TrainSpec::describe() const
{
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, LearnerSpec>) {
                return n.name();
            } else if constexpr (std::is_same_v<T, BaggingSpec>) {
                return fmt::format("bagging(t={}, {})", n.bags, n.base->describe());
            } else {
                std::string members;
                for (std::size_t i = 0; i < n.ensemble.size(); ++i) {
                    members += (i ? ", " : "") + n.ensemble[i].describe();
                }
                return fmt::format("stacking(folds={}, level2={}, [{}])", n.folds, n.level2->describe(), members);
            }
        },
        node);
}

TrainSpec make_spec(LearnerSpec learner) { return TrainSpec { std::move(learner) }; }

TrainSpec make_bagging(TrainSpec base, int bags)
{
    return TrainSpec { BaggingSpec { std::make_shared<const TrainSpec>(std::move(base)), bags } };
}

TrainSpec make_stacking(std::vector<TrainSpec> ensemble, TrainSpec level2, int folds)
{
    return TrainSpec { StackingSpec { std::move(ensemble), std::make_shared<const TrainSpec>(std::move(level2)), folds } };
}

ModelPtr train(const TrainSpec& spec, const Dataset& tr, Rng& rng, Exec exec)
{
    return std::visit(
        [&](const auto& n) -> ModelPtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, LearnerSpec>) {
                return train_learner(n, tr, rng);
            } else if constexpr (std::is_same_v<T, BaggingSpec>) {
                return train_bagging(n, tr, rng, exec);
            } else {
                return train_stacking(n, tr, rng, exec);
            }
        },
        spec.node);
}

ModelPtr train_bagging(const BaggingSpec& spec, const Dataset& tr, Rng& rng, Exec exec)
{
    if (spec.bags < 1) {
        throw ConfigError(fmt::format("bag count must be >= 1, got {}", spec.bags));
    }
    if (!spec.base) {
        throw ConfigError("bagging needs a base learner");
    }
    const std::uint64_t run_seed = rng();
    const std::size_t n = tr.rows();
    std::vector<ModelPtr> members(static_cast<std::size_t>(spec.bags));
    parallel_for(
        members.size(),
        [&](std::size_t b) {
            Rng bag_rng(derive_seed(run_seed, "bag", { b }));
            std::vector<std::size_t> sample(n);
            for (auto& s : sample) {
                s = uniform_index(bag_rng, n);
            }
            try {
                members[b] = train(*spec.base, tr.select(sample), bag_rng, exec);
            } catch (const Error& e) {
                throw TrainingError(fmt::format("bag {}: {}", b, e.what()));
            }
        },
        exec);
    return std::make_shared<AveragingModel>(std::move(members), "bagging");
}

namespace {

void check_stacking(const StackingSpec& spec, const Dataset& tr)
{
    if (spec.ensemble.empty()) {
        throw ConfigError("stacking ensemble must contain at least one level-1 learner");
    }
    if (!spec.level2) {
        throw ConfigError("stacking needs a level-2 learner");
    }
    if (spec.folds < 2) {
        throw ConfigError(fmt::format("stacking fold count must be >= 2, got {}", spec.folds));
    }
    if (static_cast<std::size_t>(spec.folds) > tr.rows()) {
        throw ConfigError(fmt::format("stacking fold count {} exceeds the {} training samples", spec.folds, tr.rows()));
    }
}

ModelPtr train_member(const TrainSpec& member, const Dataset& data, std::uint64_t seed, Exec exec,
                      std::string_view where, std::size_t learner)
{
    Rng rng(seed);
    try {
        return train(member, data, rng, exec);
    } catch (const Error& e) {
        throw TrainingError(fmt::format("{}, learner {} ({}): {}", where, learner, member.describe(), e.what()));
    }
}

} // namespace

Level2Set build_level2_set(const StackingSpec& spec, const Dataset& tr, std::uint64_t run_seed, Exec exec)
{
    check_stacking(spec, tr);
    Rng fold_rng(derive_seed(run_seed, "stack-folds"));
    const auto folds = assign_folds(tr.rows(), spec.folds, fold_rng);
    const std::size_t m = spec.ensemble.size();
    const auto k = static_cast<std::size_t>(spec.folds);

    std::vector<Dataset> train_parts;
    std::vector<std::vector<std::size_t>> test_parts;
    for (int f = 0; f < spec.folds; ++f) {
        train_parts.push_back(tr.select(folds.train_indices(f)));
        test_parts.push_back(folds.test_indices(f));
    }

    // One task per (fold, learner); each owns its column block of rows.
    std::vector<std::size_t> offset(k + 1, 0);
    for (std::size_t f = 0; f < k; ++f) {
        offset[f + 1] = offset[f] + test_parts[f].size();
    }
    Level2Set set;
    set.features.resize(static_cast<Eigen::Index>(tr.rows()), static_cast<Eigen::Index>(m));
    set.targets.resize(static_cast<Eigen::Index>(tr.rows()));
    set.source_index.resize(tr.rows());

    parallel_for(
        k * m,
        [&](std::size_t task) {
            const std::size_t f = task / m;
            const std::size_t j = task % m;
            const auto model = train_member(spec.ensemble[j], train_parts[f],
                                            derive_seed(run_seed, "stack-level1", { f, j }), exec,
                                            fmt::format("fold {}", f), j);
            for (std::size_t r = 0; r < test_parts[f].size(); ++r) {
                const auto row = static_cast<Eigen::Index>(offset[f] + r);
                set.features(row, static_cast<Eigen::Index>(j)) = model->predict(tr.row(test_parts[f][r]));
            }
        },
        exec);

    for (std::size_t f = 0; f < k; ++f) {
        for (std::size_t r = 0; r < test_parts[f].size(); ++r) {
            const auto src = test_parts[f][r];
            set.source_index[offset[f] + r] = src;
            set.targets[static_cast<Eigen::Index>(offset[f] + r)] = tr.target(src);
        }
    }
    return set;
}

ModelPtr train_stacking(const StackingSpec& spec, const Dataset& tr, Rng& rng, Exec exec)
{
    check_stacking(spec, tr);
    const std::uint64_t run_seed = rng();
    auto level2_set = build_level2_set(spec, tr, run_seed, exec);

    const std::size_t m = spec.ensemble.size();
    std::vector<ModelPtr> level1(m);
    parallel_for(
        m,
        [&](std::size_t j) {
            level1[j] = train_member(spec.ensemble[j], tr, derive_seed(run_seed, "stack-level1-full", { j }), exec,
                                     "full data", j);
        },
        exec);

    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        names.push_back(fmt::format("l1_{}", j + 1));
    }
    const Dataset l2_data(std::move(level2_set.features), std::move(level2_set.targets), tr.name() + "-level2",
                          std::move(names));
    Rng l2_rng(derive_seed(run_seed, "stack-level2"));
    ModelPtr level2;
    try {
        level2 = train(*spec.level2, l2_data, l2_rng, exec);
    } catch (const Error& e) {
        throw TrainingError(fmt::format("level-2 learner ({}): {}", spec.level2->describe(), e.what()));
    }
    return compose(std::move(level1), std::move(level2));
}

ModelPtr compose(std::vector<ModelPtr> level1, ModelPtr level2)
{
    return std::make_shared<StackedModel>(std::move(level1), std::move(level2));
}

StackedModel::StackedModel(std::vector<ModelPtr> level1, ModelPtr level2)
    : level1_(std::move(level1))
    , level2_(std::move(level2))
{
    if (level1_.empty() || !level2_) {
        throw ConfigError("composition needs at least one level-1 model and a level-2 model");
    }
    if (level2_->input_dim() != level1_.size()) {
        throw ConfigError(fmt::format("dimension mismatch: level-2 model expects {} inputs but {} level-1 models given",
                                      level2_->input_dim(), level1_.size()));
    }
    const auto dim = level1_.front()->input_dim();
    for (const auto& m : level1_) {
        if (m->input_dim() != dim) {
            throw ConfigError("level-1 models disagree on input dimension");
        }
    }
}

double StackedModel::predict(std::span<const double> x) const
{
    std::vector<double> z(level1_.size());
    for (std::size_t j = 0; j < level1_.size(); ++j) {
        z[j] = level1_[j]->predict(x);
    }
    return level2_->predict(z);
}

void StackedModel::save(ModelWriter& out) const
{
    out.integer(static_cast<std::int64_t>(level1_.size()));
    for (const auto& m : level1_) {
        out.model(*m);
    }
    out.model(*level2_);
}

ModelPtr StackedModel::load(ModelReader& in)
{
    const auto n = in.integer();
    std::vector<ModelPtr> level1;
    for (std::int64_t i = 0; i < n; ++i) {
        level1.push_back(in.model());
    }
    auto level2 = in.model();
    return std::make_shared<StackedModel>(std::move(level1), std::move(level2));
}

} // namespace stackevo
