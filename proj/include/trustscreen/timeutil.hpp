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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace trustscreen {

using Instant = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS[Z]` or with a `.fff` fraction
/// (truncated) or `+00:00` suffix. Only UTC offsets are accepted.
std::optional<Instant> parse_instant(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_instant(Instant t);

/// `YYYY-MM-DD`.
std::string format_date(Instant t);

inline Instant floor_to_day(Instant t) {
    return std::chrono::floor<std::chrono::days>(t);
}

inline double epoch_seconds(Instant t) {
    return static_cast<double>(t.time_since_epoch().count());
}

}  // namespace trustscreen
