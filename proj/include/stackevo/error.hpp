// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#pragma once

#include <stdexcept>
#include <string>

namespace stackevo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or missing input data: files, CSV cells, dataset invariants.
class DataError : public Error {
public:
    using Error::Error;
};

// Parameters or configurations outside their admissible range.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A learner failed to train; the message carries provenance
// (fold, learner, bag) prepended by each enclosing layer.
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace stackevo
