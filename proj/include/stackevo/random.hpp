// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace stackevo {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20150801;

// Derives an independent sub-seed from a parent seed, a text label and a
// list of counters (fold index, learner index, ...). Pure function: the
// same arguments always give the same seed, so parallel tasks bound to a
// (label, counters) identity are schedule independent.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::initializer_list<std::uint64_t> counters = {});

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform01(Rng& rng)
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace stackevo
