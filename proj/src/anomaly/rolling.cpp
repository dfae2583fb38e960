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
#include "trustscreen/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace trustscreen::anomaly {

int grade_severity(double error, double sigma) {
    const double magnitude = std::abs(error);
    int level = 0;
    if (magnitude > 2.0 * sigma) {
        level = 3;
    } else if (magnitude > 1.75 * sigma) {
        level = 2;
    } else if (magnitude > 1.5 * sigma) {
        level = 1;
    }
    return error < 0.0 ? -level : level;
}

std::vector<AnomalyReport> rolling_detect_values(std::span<const double> y, const ArimaModel& model,
                                                 std::size_t window, std::size_t first_index) {
    if (window < 2) throw Error(ErrorCode::InvalidArgument, "rolling window must be at least 2");
    const auto pred = one_step_predictions(model, y);
    const std::size_t first_error = first_valid_prediction(model);
    // the window needs `window - 1` earlier errors
    const std::size_t earliest = first_error + window - 1;
    if (first_index < earliest) {
        throw Error(ErrorCode::InsufficientHistory,
                    "need " + std::to_string(window - 1) + " forecast errors before index " +
                        std::to_string(first_index) + "; earliest reportable index is " +
                        std::to_string(earliest));
    }

    std::vector<double> err(y.size(), 0.0);
    for (std::size_t t = first_error; t < y.size(); ++t) err[t] = y[t] - pred[t];

    std::vector<AnomalyReport> out;
    for (std::size_t t = first_index; t < y.size(); ++t) {
        double mean = 0.0;
        for (std::size_t k = t + 1 - window; k <= t; ++k) mean += err[k];
        mean /= static_cast<double>(window);
        double ss = 0.0;
        for (std::size_t k = t + 1 - window; k <= t; ++k) ss += (err[k] - mean) * (err[k] - mean);
        const double sigma = std::sqrt(ss / static_cast<double>(window - 1));

        AnomalyReport r;
        r.actual = y[t];
        r.predicted = pred[t];
        r.error = err[t];
        r.rolling_sigma = sigma;
        r.severity = grade_severity(r.error, sigma);
        r.is_anomaly = std::abs(r.error) > 2.0 * sigma;
        out.push_back(r);
    }
    return out;
}

std::vector<AnomalyReport> rolling_detect(const PriceSeries& series, const ArimaModel& model,
                                          const RollingOptions& options) {
    const auto& pts = series.points;
    const auto y = series.closes();
    const std::size_t earliest = first_valid_prediction(model) + options.window - 1;

    std::size_t begin = earliest;
    if (options.from) {
        const auto it = std::lower_bound(pts.begin(), pts.end(), *options.from,
                                         [](const PricePoint& p, Instant t) { return p.timestamp < t; });
        begin = static_cast<std::size_t>(it - pts.begin());
    }
    std::size_t end = pts.size();
    if (options.to) {
        const auto it = std::upper_bound(pts.begin(), pts.end(), *options.to,
                                         [](Instant t, const PricePoint& p) { return t < p.timestamp; });
        end = static_cast<std::size_t>(it - pts.begin());
    }
    if (begin >= end) {
        // an explicit range may legitimately miss the series; the default start may not
        if (options.from) return {};
        throw Error(ErrorCode::InsufficientHistory,
                    "window " + std::to_string(options.window) + " leaves no gradeable point in " +
                        std::to_string(pts.size()) + " observations");
    }

    auto reports = rolling_detect_values(std::span<const double>(y.data(), end), model, options.window, begin);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].timestamp = pts[begin + i].timestamp;
    return reports;
}

std::string report_to_json_line(const AnomalyReport& r) {
    nlohmann::json j;
    j["timestamp"] = format_instant(r.timestamp);
    j["actual"] = r.actual;
    j["predicted"] = r.predicted;
    j["error"] = r.error;
    j["rolling_sigma"] = r.rolling_sigma;
    j["severity"] = r.severity;
    j["is_anomaly"] = r.is_anomaly;
    return j.dump();
}

AnomalyReport report_from_json_line(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        AnomalyReport r;
        const auto ts = parse_instant(j.at("timestamp").get<std::string>());
        if (!ts) throw std::invalid_argument("bad timestamp");
        r.timestamp = *ts;
        r.actual = j.at("actual").get<double>();
        r.predicted = j.at("predicted").get<double>();
        r.error = j.at("error").get<double>();
        r.rolling_sigma = j.at("rolling_sigma").get<double>();
        r.severity = j.at("severity").get<int>();
        r.is_anomaly = j.at("is_anomaly").get<bool>();
        if (r.severity < -3 || r.severity > 3 || r.is_anomaly != (std::abs(r.severity) == 3)) {
            throw std::invalid_argument("severity out of range or inconsistent with is_anomaly");
        }
        return r;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::MalformedRow, std::string("anomaly report: ") + e.what());
    }
}

}  // namespace trustscreen::anomaly
