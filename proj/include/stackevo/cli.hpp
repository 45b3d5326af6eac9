// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stackevo {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitUsage = 2,
    kExitData = 3,
    kExitTraining = 4,
};

// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace stackevo
