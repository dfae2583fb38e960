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
#include "trustscreen/error.hpp"
#include "trustscreen/timeutil.hpp"

#include <charconv>
#include <cstdio>

namespace trustscreen {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
        case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
        case ErrorCode::EmptyLexicon: return "EmptyLexicon";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::MalformedModelFile: return "MalformedModelFile";
        case ErrorCode::ConstantSeries: return "ConstantSeries";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::NonStationaryFit: return "NonStationaryFit";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::PromptTooShort: return "PromptTooShort";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::DegenerateFold: return "DegenerateFold";
        case ErrorCode::WrongDimension: return "WrongDimension";
        case ErrorCode::NoLabels: return "NoLabels";
        case ErrorCode::EmptySubset: return "EmptySubset";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    const int v = static_cast<int>(code);
    return v >= 10 && v < 30;
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    auto first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
}

}  // namespace

std::optional<Instant> parse_instant(std::string_view text) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    std::size_t pos = 10;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
        if (text.size() < pos + 9 || text[pos + 3] != ':' || text[pos + 6] != ':') {
            return std::nullopt;
        }
        if (!read_int(text, pos + 1, 2, h) || !read_int(text, pos + 4, 2, mi) ||
            !read_int(text, pos + 7, 2, se)) {
            return std::nullopt;
        }
        pos += 9;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        }
        std::string_view zone = text.substr(pos);
        if (!(zone.empty() || zone == "Z" || zone == "+00:00" || zone == "+0000")) {
            return std::nullopt;
        }
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 60) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{se};
}

std::string format_instant(Instant t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string format_date(Instant t) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(t)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace trustscreen
