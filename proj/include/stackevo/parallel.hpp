// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace stackevo {

// Serial is the reference path; Parallel must produce bit-identical
// results. Only coarse, independent tasks (folds, trees, bags, queries,
// genomes) are distributed; floating-point reductions stay serial.
enum class Exec { Serial, Parallel };

// Worker count used by Exec::Parallel loops. Defaults to the OpenMP maximum.
void set_jobs(int jobs);
int jobs();

// Runs fn(i) for i in [0, n). Nested calls inside an active parallel region
// run serially. Exceptions are collected and the one from the lowest index
// is rethrown, so error reporting does not depend on the schedule.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, Exec exec = Exec::Parallel)
{
    const bool parallel = exec == Exec::Parallel && n > 1 && jobs() > 1 && !omp_in_parallel();
    if (!parallel) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs())
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace stackevo
