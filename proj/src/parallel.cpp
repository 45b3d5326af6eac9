// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace stackevo {

namespace {
std::atomic<int> g_jobs { 0 };
}

void set_jobs(int n) { g_jobs.store(std::max(1, n)); }

int jobs()
{
    const int n = g_jobs.load();
    return n > 0 ? n : std::max(1, omp_get_max_threads());
}

} // namespace stackevo
