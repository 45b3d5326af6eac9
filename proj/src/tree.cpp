// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// CART-style regression trees grown by greedy variance reduction, and
// random forests of bootstrapped trees.

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/model_io.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

namespace {

double midpoint(double a, double b)
{
    const double m = a + (b - a) / 2.0;
    return m < b ? m : a;
}

} // namespace

std::optional<SplitCandidate> find_best_split(const Matrix& x, const Vector& y,
                                              std::span<const std::size_t> rows,
                                              std::span<const int> features, int min_leaf)
{
    const std::size_t n = rows.size();
    const auto leaf = static_cast<std::size_t>(std::max(1, min_leaf));
    if (n < 2 * leaf) {
        return std::nullopt;
    }

    // Work with centered targets so the prefix-sum SSE stays accurate.
    double mean = 0.0;
    for (auto r : rows) mean += y[static_cast<Eigen::Index>(r)];
    mean /= static_cast<double>(n);
    double total_ss = 0.0;
    for (auto r : rows) {
        const double d = y[static_cast<Eigen::Index>(r)] - mean;
        total_ss += d * d;
    }

    std::optional<SplitCandidate> best;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    for (int f : features) {
        const auto col = static_cast<Eigen::Index>(f);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = x(static_cast<Eigen::Index>(a), col);
            const double vb = x(static_cast<Eigen::Index>(b), col);
            return va < vb || (va == vb && a < b);
        });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += y[static_cast<Eigen::Index>(order[i])] - mean;
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            if (nl < leaf) continue;
            if (nr < leaf) break;
            const double lo = x(static_cast<Eigen::Index>(order[i]), col);
            const double hi = x(static_cast<Eigen::Index>(order[i + 1]), col);
            if (!(lo < hi)) continue;
            // Right sum of centered targets is -left_sum.
            const double sse = total_ss - left_sum * left_sum / static_cast<double>(nl)
                - left_sum * left_sum / static_cast<double>(nr);
            if (!best || sse < best->sse) {
                best = SplitCandidate { f, midpoint(lo, hi), sse, nl };
            }
        }
    }
    return best;
}

double RegressionTree::predict(std::span<const double> x) const
{
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].value;
}

std::size_t RegressionTree::leaf_count() const
{
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

void RegressionTree::save(ModelWriter& out) const
{
    out.integer(static_cast<std::int64_t>(dim_));
    out.integer(static_cast<std::int64_t>(nodes_.size()));
    for (const auto& n : nodes_) {
        out.integer(n.feature);
        out.real(n.threshold);
        out.integer(n.left);
        out.integer(n.right);
        out.real(n.value);
    }
}

ModelPtr RegressionTree::load(ModelReader& in)
{
    const auto dim = static_cast<std::size_t>(in.integer());
    const auto count = in.integer();
    std::vector<Node> nodes(static_cast<std::size_t>(count));
    for (auto& n : nodes) {
        n.feature = static_cast<int>(in.integer());
        n.threshold = in.real();
        n.left = static_cast<int>(in.integer());
        n.right = static_cast<int>(in.integer());
        n.value = in.real();
        if (n.feature >= static_cast<int>(dim) || (n.feature >= 0 && (n.left < 0 || n.right < 0 || n.left >= count || n.right >= count))) {
            throw DataError("model file corrupt: bad tree node");
        }
    }
    if (nodes.empty()) {
        throw DataError("model file corrupt: empty tree");
    }
    return std::make_shared<RegressionTree>(std::move(nodes), dim);
}

ModelPtr train_regression_tree(const Dataset& tr, int mtry, int min_leaf, Rng& rng)
{
    const int p = static_cast<int>(tr.cols());
    if (mtry < 1 || mtry > p) {
        throw ConfigError(fmt::format("mtry must lie in [1, {}], got {}", p, mtry));
    }
    if (min_leaf < 1) {
        throw ConfigError(fmt::format("minimum leaf size must be >= 1, got {}", min_leaf));
    }
    const Matrix& x = tr.features();
    const Vector& y = tr.targets();

    std::vector<RegressionTree::Node> nodes;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    std::vector<std::size_t> all(tr.rows());
    std::iota(all.begin(), all.end(), 0);
    nodes.emplace_back();
    stack.push_back({ 0, std::move(all) });

    std::vector<int> feature_pool(static_cast<std::size_t>(p));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);

    while (!stack.empty()) {
        auto [node_id, rows] = std::move(stack.back());
        stack.pop_back();

        double mean = 0.0;
        for (auto r : rows) mean += y[static_cast<Eigen::Index>(r)];
        mean /= static_cast<double>(rows.size());
        double ss = 0.0;
        for (auto r : rows) {
            const double d = y[static_cast<Eigen::Index>(r)] - mean;
            ss += d * d;
        }
        nodes[node_id].value = mean;
        if (rows.size() < 2 * static_cast<std::size_t>(min_leaf) || ss == 0.0) {
            continue;
        }

        // mtry distinct features, examined in ascending index order.
        std::vector<int> tried;
        if (mtry == p) {
            tried = feature_pool;
        } else {
            for (int j = 0; j < mtry; ++j) {
                const auto pick = static_cast<std::size_t>(j) + uniform_index(rng, feature_pool.size() - static_cast<std::size_t>(j));
                std::swap(feature_pool[static_cast<std::size_t>(j)], feature_pool[pick]);
            }
            tried.assign(feature_pool.begin(), feature_pool.begin() + mtry);
            std::sort(tried.begin(), tried.end());
        }

        const auto split = find_best_split(x, y, rows, tried, min_leaf);
        if (!split || !(split->sse < ss)) {
            continue;
        }
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        const auto col = static_cast<Eigen::Index>(split->feature);
        for (auto r : rows) {
            (x(static_cast<Eigen::Index>(r), col) <= split->threshold ? left : right).push_back(r);
        }
        const auto left_id = nodes.size();
        nodes.emplace_back();
        nodes.emplace_back();
        nodes[node_id].feature = split->feature;
        nodes[node_id].threshold = split->threshold;
        nodes[node_id].left = static_cast<int>(left_id);
        nodes[node_id].right = static_cast<int>(left_id + 1);
        stack.push_back({ left_id + 1, std::move(right) });
        stack.push_back({ left_id, std::move(left) });
    }
    return std::make_shared<RegressionTree>(std::move(nodes), tr.cols());
}

ModelPtr train_random_forest(const Dataset& tr, int n_trees, Rng& rng, int min_leaf, int mtry, Exec exec)
{
    if (n_trees < 1) {
        throw ConfigError(fmt::format("forest tree count must be >= 1, got {}", n_trees));
    }
    const int p = static_cast<int>(tr.cols());
    const int features_per_split = mtry > 0 ? std::min(mtry, p) : std::max(1, p / 3);
    const std::uint64_t run_seed = rng();
    const std::size_t n = tr.rows();

    std::vector<ModelPtr> trees(static_cast<std::size_t>(n_trees));
    parallel_for(
        trees.size(),
        [&](std::size_t t) {
            Rng tree_rng(derive_seed(run_seed, "forest-tree", { t }));
            std::vector<std::size_t> sample(n);
            for (auto& s : sample) {
                s = uniform_index(tree_rng, n);
            }
            trees[t] = train_regression_tree(tr.select(sample), features_per_split, min_leaf, tree_rng);
        },
        exec);
    return std::make_shared<AveragingModel>(std::move(trees), "forest");
}

} // namespace stackevo
