// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/eval.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "stackevo/error.hpp"

namespace stackevo {

double rmse(std::span<const double> predictions, std::span<const double> truths)
{
    if (predictions.size() != truths.size()) {
        throw ConfigError(fmt::format("rmse: {} predictions vs {} truths", predictions.size(), truths.size()));
    }
    if (predictions.empty()) {
        throw ConfigError("rmse of an empty set is undefined");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

double rmse(const Vector& predictions, const Vector& truths)
{
    return rmse(std::span<const double>(predictions.data(), static_cast<std::size_t>(predictions.size())),
                std::span<const double>(truths.data(), static_cast<std::size_t>(truths.size())));
}

double EvalReport::fold_average_rmse() const
{
    return std::accumulate(fold_rmse.begin(), fold_rmse.end(), 0.0) / static_cast<double>(fold_rmse.size());
}

namespace {

const TrainSpec& mean_spec()
{
    static const TrainSpec spec = make_spec(LearnerSpec { MeanParams {} });
    return spec;
}

// Trains on `train_rows`, predicts `test_rows` into `out`.
void fit_and_predict(const TrainSpec& spec, const Dataset& data, const std::vector<std::size_t>& train_rows,
                     const std::vector<std::size_t>& test_rows, std::uint64_t seed, Exec exec,
                     std::vector<double>& out)
{
    Rng rng(seed);
    const auto model = train(spec, data.select(train_rows), rng, exec);
    for (auto i : test_rows) {
        out[i] = model->predict(data.row(i));
    }
}

std::vector<double> gather(const std::vector<double>& v, const std::vector<std::size_t>& idx)
{
    std::vector<double> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

} // namespace

EvalReport cross_validate(const TrainSpec& spec, const Dataset& data, int k, Rng& rng, const EvalOptions& options)
{
    const std::uint64_t seed = rng();
    Rng fold_rng(derive_seed(seed, "cv-folds"));
    const auto folds = assign_folds(data.rows(), k, fold_rng);
    return cross_validate(spec, data, folds, seed, options);
}

EvalReport cross_validate(const TrainSpec& spec, const Dataset& data, const FoldAssignment& folds,
                          std::uint64_t seed, const EvalOptions& options)
{
    if (folds.size() != data.rows()) {
        throw ConfigError(fmt::format("fold assignment covers {} samples, dataset has {}", folds.size(), data.rows()));
    }
    EvalReport report;
    report.learner = spec.describe();
    report.mode = EvalMode::CrossValidation;
    report.folds = folds.k;
    report.seed = seed;
    report.samples = data.rows();
    report.predictions.assign(data.rows(), std::numeric_limits<double>::quiet_NaN());

    const auto k = static_cast<std::size_t>(folds.k);
    std::vector<std::vector<std::size_t>> test(k);
    std::vector<std::vector<std::size_t>> train_rows(k);
    for (std::size_t f = 0; f < k; ++f) {
        test[f] = folds.test_indices(static_cast<int>(f));
        train_rows[f] = folds.train_indices(static_cast<int>(f));
    }

    parallel_for(
        k,
        [&](std::size_t f) {
            try {
                fit_and_predict(spec, data, train_rows[f], test[f], derive_seed(seed, "cv-train", { f }),
                                options.exec, report.predictions);
            } catch (const Error& e) {
                throw TrainingError(fmt::format("cross-validation fold {}: {}", f, e.what()));
            }
        },
        options.exec);

    std::vector<double> truths(data.targets().data(), data.targets().data() + data.rows());
    for (std::size_t f = 0; f < k; ++f) {
        report.fold_rmse.push_back(rmse(gather(report.predictions, test[f]), gather(truths, test[f])));
    }
    report.pooled_rmse = rmse(report.predictions, truths);

    if (options.mean_reference) {
        std::vector<double> ref(data.rows());
        for (std::size_t f = 0; f < k; ++f) {
            fit_and_predict(mean_spec(), data, train_rows[f], test[f], 0, Exec::Serial, ref);
        }
        report.mean_reference_rmse = rmse(ref, truths);
        report.mean_cmp = *report.mean_reference_rmse / std::max(report.pooled_rmse, 1e-300);
    }
    return report;
}

EvalReport proportional_eval(const TrainSpec& spec, const Dataset& data, double train_ratio, Rng& rng,
                             const EvalOptions& options)
{
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw ConfigError(fmt::format("training ratio must lie in (0, 1), got {}", train_ratio));
    }
    const std::size_t n = data.rows();
    const auto n_train = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n) {
        throw ConfigError(fmt::format("ratio {} on {} samples leaves an empty training or test part", train_ratio, n));
    }
    const std::uint64_t seed = rng();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng split_rng(derive_seed(seed, "split"));
    std::shuffle(perm.begin(), perm.end(), split_rng);
    std::vector<std::size_t> train_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());

    EvalReport report;
    report.learner = spec.describe();
    report.mode = EvalMode::ProportionalSplit;
    report.train_ratio = train_ratio;
    report.seed = seed;
    report.samples = n;
    report.predictions.assign(n, std::numeric_limits<double>::quiet_NaN());
    try {
        fit_and_predict(spec, data, train_rows, test_rows, derive_seed(seed, "split-train"), options.exec,
                        report.predictions);
    } catch (const Error& e) {
        throw TrainingError(fmt::format("proportional split: {}", e.what()));
    }
    std::vector<double> truths(data.targets().data(), data.targets().data() + n);
    report.pooled_rmse = rmse(gather(report.predictions, test_rows), gather(truths, test_rows));
    report.fold_rmse = { report.pooled_rmse };

    if (options.mean_reference) {
        std::vector<double> ref(n);
        fit_and_predict(mean_spec(), data, train_rows, test_rows, 0, Exec::Serial, ref);
        report.mean_reference_rmse = rmse(gather(ref, test_rows), gather(truths, test_rows));
        report.mean_cmp = *report.mean_reference_rmse / std::max(report.pooled_rmse, 1e-300);
    }
    return report;
}

void write_report(const EvalReport& r, std::ostream& out)
{
    out << "# learner = " << r.learner << '\n';
    if (r.mode == EvalMode::CrossValidation) {
        out << "# mode = cross-validation\n# folds = " << r.folds << '\n';
    } else {
        out << "# mode = proportional-split\n" << fmt::format("# train_ratio = {:.17g}\n", r.train_ratio);
    }
    out << "# eval_seed = " << r.seed << '\n';
    out << "# samples = " << r.samples << '\n';
    out << "part,rmse\n";
    for (std::size_t f = 0; f < r.fold_rmse.size(); ++f) {
        out << fmt::format("fold{},{:.17g}\n", f + 1, r.fold_rmse[f]);
    }
    out << fmt::format("pooled,{:.17g}\n", r.pooled_rmse);
    out << fmt::format("fold_average,{:.17g}\n", r.fold_average_rmse());
    if (r.mean_reference_rmse) {
        out << fmt::format("mean_reference,{:.17g}\n", *r.mean_reference_rmse);
        out << fmt::format("mean_cmp,{:.2f}\n", *r.mean_cmp);
    }
}

} // namespace stackevo
