// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stackevo/ensembles.hpp"

namespace stackevo {

// sqrt(mean((p - t)^2)).
double rmse(std::span<const double> predictions, std::span<const double> truths);
double rmse(const Vector& predictions, const Vector& truths);

enum class EvalMode { CrossValidation, ProportionalSplit };

struct EvalReport {
    std::string learner;
    EvalMode mode = EvalMode::CrossValidation;
    int folds = 0;           // cross-validation
    double train_ratio = 0;  // proportional split
    std::uint64_t seed = 0;
    std::size_t samples = 0;

    std::vector<double> fold_rmse; // k entries in CV mode, one in split mode
    double pooled_rmse = 0.0;      // over every held-out prediction

    // Held-out predictions indexed by sample; NaN for training-only rows
    // in split mode.
    std::vector<double> predictions;

    std::optional<double> mean_reference_rmse;
    std::optional<double> mean_cmp; // reference / pooled

    double fold_average_rmse() const;
};

struct EvalOptions {
    bool mean_reference = true;
    Exec exec = Exec::Parallel;
};

// k-fold cross-validation. Each sample is held out exactly once; the
// headline number pools all held-out residuals. The Mean reference uses
// the same folds.
EvalReport cross_validate(const TrainSpec& spec, const Dataset& data, int k, Rng& rng,
                          const EvalOptions& options = {});

EvalReport cross_validate(const TrainSpec& spec, const Dataset& data, const FoldAssignment& folds,
                          std::uint64_t seed, const EvalOptions& options = {});

// One random split: floor(ratio * N) training rows, the rest held out.
EvalReport proportional_eval(const TrainSpec& spec, const Dataset& data, double train_ratio, Rng& rng,
                             const EvalOptions& options = {});

// Structured text block: commented configuration echo followed by a CSV
// table of per-fold and pooled values.
void write_report(const EvalReport& report, std::ostream& out);

} // namespace stackevo
