// Copyright (C) 2026 The rag4re Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rag4re {

// Process exit codes used by the CLI; scripts driving experiment grids rely on them.
enum class ExitCode : int {
    kSuccess = 0,
    kValidation = 2,
    kBackend = 3,
    kInterrupted = 4,
};

class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::kValidation; }
};

// Bad input data, bad configuration, malformed files.
class ValidationError : public Error {
 public:
    using Error::Error;
};

// Malformed structured input. `index` is the record (or byte offset) where parsing failed.
class ParseError : public ValidationError {
 public:
    ParseError(const std::string& what, std::int64_t index)
        : ValidationError(what + " (at " + std::to_string(index) + ")"), index_(index) {}
    std::int64_t index() const noexcept { return index_; }

 private:
    std::int64_t index_;
};

class IoError : public ValidationError {
 public:
    using ValidationError::ValidationError;
};

// A remote or replay backend failed. `retryable` distinguishes transport hiccups from hard misses.
class BackendError : public Error {
 public:
    BackendError(const std::string& what, int attempts, bool retryable)
        : Error(what), attempts_(attempts), retryable_(retryable) {}
    ExitCode exit_code() const noexcept override { return ExitCode::kBackend; }
    int attempts() const noexcept { return attempts_; }
    bool retryable() const noexcept { return retryable_; }

 private:
    int attempts_;
    bool retryable_;
};

// Backend answered but with no body (refusal, missing choice). Not the same as a valid "" answer.
class EmptyResponseError : public BackendError {
 public:
    explicit EmptyResponseError(const std::string& what) : BackendError(what, 1, false) {}
};

class InterruptedError : public Error {
 public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::kInterrupted; }
};

}  // namespace rag4re
