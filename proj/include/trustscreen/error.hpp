/**
 * Copyright 2026 The trustscreen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trustscreen {

/// Every failure the library reports. Values are stable: the C API
/// returns them verbatim as `ts_status` codes.
enum class ErrorCode : int {
    Ok = 0,

    // input validation
    InvalidArgument = 10,
    ConfigError = 11,
    IoError = 12,
    MalformedRow = 20,
    NonMonotonicTimestamp = 21,
    EmptySeries = 22,
    ProbabilityOutOfRange = 23,
    ScoreOutOfRange = 24,
    EmptyLexicon = 25,
    UnknownSymbol = 26,
    MalformedModelFile = 27,

    // anomaly
    ConstantSeries = 30,
    TooShort = 31,
    NonConvergence = 32,
    NonStationaryFit = 33,
    InsufficientHistory = 34,
    TooFewPoints = 35,

    // language model / learning
    EmptyCorpus = 40,
    PromptTooShort = 41,
    LengthMismatch = 42,
    EmptyScores = 43,
    SingleClass = 44,
    DegenerateFold = 45,
    WrongDimension = 46,

    // evaluation
    NoLabels = 50,
    EmptySubset = 51,

    Internal = 99,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// True for codes caused by bad user input (CLI exit code 1); everything
/// else is a runtime failure (exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace trustscreen
