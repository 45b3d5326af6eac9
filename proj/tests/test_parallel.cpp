// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include <atomic>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stackevo/parallel.hpp"

using namespace stackevo;

TEST(ParallelFor, VisitsEveryIndexOnce)
{
    for (auto exec : { Exec::Serial, Exec::Parallel }) {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, exec);
        for (int h : hits) EXPECT_EQ(h, 1);
    }
}

TEST(ParallelFor, RethrowsLowestIndexError)
{
    const int saved = jobs();
    set_jobs(4);
    for (auto exec : { Exec::Serial, Exec::Parallel }) {
        try {
            parallel_for(
                100,
                [](std::size_t i) {
                    if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
                },
                exec);
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "17");
        }
    }
    set_jobs(saved);
}

TEST(ParallelFor, NestedLoopsComplete)
{
    const int saved = jobs();
    set_jobs(3);
    std::atomic<int> total { 0 };
    parallel_for(8, [&](std::size_t) { parallel_for(8, [&](std::size_t) { ++total; }); });
    EXPECT_EQ(total.load(), 64);
    set_jobs(saved);
}

TEST(Jobs, Setter)
{
    const int saved = jobs();
    set_jobs(2);
    EXPECT_EQ(jobs(), 2);
    set_jobs(saved);
    EXPECT_GE(jobs(), 1);
}
