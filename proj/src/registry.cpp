// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <set>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/evolve.hpp"

namespace stackevo {

Registry::Registry(std::vector<LearnerSpec> entries)
    : entries_(std::move(entries))
{
    std::set<std::string> names;
    for (const auto& e : entries_) {
        e.validate();
        if (!names.insert(e.name()).second) {
            throw ConfigError(fmt::format("duplicate registry entry '{}'", e.name()));
        }
    }
}

std::optional<std::size_t> Registry::find(std::string_view name) const
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name() == name) {
            return i;
        }
    }
    return std::nullopt;
}

Registry build_default_registry()
{
    std::vector<LearnerSpec> bl;
    bl.push_back({ MeanParams {} });
    for (int l = 2; l <= 10; ++l) {
        bl.push_back({ PlsParams { l } });
    }
    for (int k = 10; k <= 60; k += 10) {
        for (double alpha : { 10.0, 20.0 }) {
            for (Metric m : { Metric::Manhattan, Metric::Euclidean }) {
                bl.push_back({ KnnParams { k, alpha, m } });
            }
        }
    }
    for (int trees : { 5, 10, 25, 50, 100, 200 }) {
        ForestParams f;
        f.trees = trees;
        bl.push_back({ f });
    }
    std::vector<NetParams> nets;
    for (int max_iter : { 50, 100, 200, 500 }) {
        for (double eps : { 0.001, 0.005 }) {
            for (int hidden : { 10, 20 }) {
                nets.push_back({ max_iter, eps, hidden });
            }
        }
    }
    for (const auto& n : nets) {
        bl.push_back({ n });
    }
    for (int t : { 20, 40, 60 }) {
        for (const auto& n : nets) {
            bl.push_back({ BaggedNetParams { t, n } });
        }
    }
    return Registry(std::move(bl));
}

} // namespace stackevo
