// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stackevo/ensembles.hpp"
#include "stackevo/evolve.hpp"

namespace stackevo {

// Composite learner description, one node per line:
//
//   stacking folds=4
//     level2 nn-max100-eps0.005-h10
//     member mean
//     member pls-l3
//   bagging t=20
//     base knn-k10-a10-euclidean
//
// Children are indented deeper than their parent. '#' starts a comment.
TrainSpec parse_spec(std::string_view text, std::string_view origin = "<spec>");
TrainSpec load_spec_file(const std::filesystem::path& path);

std::string format_spec(const TrainSpec& spec);

// A spec file path, a 1-based registry position or a learner name.
TrainSpec resolve_spec(std::string_view arg, const Registry& registry);

} // namespace stackevo
