// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

// Versioned text format for trained models. A file starts with the magic
// line "stackevo-model <version>"; the body is a whitespace-separated
// token stream written depth-first. Reals are stored as hexadecimal
// floating point so a round trip is exact.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "stackevo/learners.hpp"

namespace stackevo {

inline constexpr std::string_view kModelMagic = "stackevo-model";
inline constexpr int kModelFormatVersion = 1;

class ModelWriter {
public:
    explicit ModelWriter(std::ostream& out) : out_(out) {}

    void word(std::string_view w);
    void integer(std::int64_t v);
    void real(double v);
    void reals(std::span<const double> v);
    void text(std::string_view s); // length-prefixed, may contain spaces
    void model(const RegressionFunction& m);

private:
    std::ostream& out_;
};

class ModelReader {
public:
    explicit ModelReader(std::istream& in) : in_(in) {}

    std::string word();
    void expect(std::string_view w);
    std::int64_t integer();
    double real();
    Vector reals();
    std::string text();
    ModelPtr model();

private:
    std::istream& in_;
};

void save_model(const RegressionFunction& model, std::ostream& out);
ModelPtr load_model(std::istream& in);

void save_model_file(const RegressionFunction& model, const std::filesystem::path& path);
ModelPtr load_model_file(const std::filesystem::path& path);

} // namespace stackevo
