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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustscreen/ingest.hpp"

namespace trustscreen::anomaly {

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller

/**
 * Result of the ADF regression
 *
 *   dY_t = a + b*t + gamma*Y_{t-1} + sum_i delta_i*dY_{t-i} + e_t
 *
 * H0: gamma = 0 (unit root). `p_value` is MacKinnon's approximate
 * asymptotic p-value for the constant+trend case.
 */
struct AdfResult {
    double gamma_hat = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::size_t lags = 0;
    std::size_t nobs = 0;
    double critical_1pct = 0.0;
    double critical_5pct = 0.0;
    double critical_10pct = 0.0;
    bool reject_nonstationary = false;  ///< p_value < 0.05
};

/// floor(12 * (n/100)^(1/4))
std::size_t default_adf_lags(std::size_t n);

/// Throws ConstantSeries or TooShort (n < max_lags + 10).
AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags = std::nullopt);

/// MacKinnon (1994) approximate p-value, constant+trend regression, one series.
double mackinnon_pvalue_ct(double t_stat);

/// MacKinnon (2010) finite-sample critical value, constant+trend.
double mackinnon_critical_ct(double level, std::size_t nobs);

// ---------------------------------------------------------------------------
// ARIMA

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    bool operator==(const ArimaOrder&) const = default;
};

struct ArimaModel {
    ArimaOrder order;
    bool include_mean = true;  ///< k in the AIC penalty
    double mu = 0.0;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    std::size_t nobs = 0;  ///< observations of the differenced series
    int iterations = 0;
    double gradient_norm = 0.0;

    int parameter_count() const { return order.p + order.q + (include_mean ? 1 : 0) + 1; }
};

/// -2*loglik + 2*(p + q + k + 1)
double aic_of(double loglik, const ArimaOrder& order, bool include_mean);

std::vector<double> difference(std::span<const double> series, int d);

/**
 * Conditional Gaussian log-likelihood of an ARMA(p,q) on an already
 * differenced series, with pre-sample deviations and innovations fixed at
 * zero and sigma^2 concentrated out. Parameter layout:
 * [mu (if included), ar_1..ar_p, ma_1..ma_q].
 */
class ConditionalLikelihood {
public:
    ConditionalLikelihood(std::span<const double> w, int p, int q, bool include_mean);

    std::size_t dimension() const { return static_cast<std::size_t>(p_ + q_ + (mean_ ? 1 : 0)); }

    /// Sum of squared one-step residuals.
    double sse(std::span<const double> theta) const;

    double loglik(std::span<const double> theta) const;

    /// Analytic gradient of loglik, via the residual-derivative recursion.
    std::vector<double> gradient(std::span<const double> theta) const;

    std::vector<double> residuals(std::span<const double> theta) const;

    std::size_t nobs() const { return w_.size(); }

private:
    std::vector<double> w_;
    int p_;
    int q_;
    bool mean_;
    double fixed_mean_ = 0.0;
};

struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
};

/// Throws TooShort, NonConvergence or NonStationaryFit.
ArimaModel fit_arima(std::span<const double> series, ArimaOrder order, const FitOptions& options = {});

/// True when every root of 1 - a_1 z - ... - a_p z^p lies outside the unit circle.
bool ar_is_stationary(std::span<const double> ar);

/// Largest modulus among the inverse roots of 1 - sign*(c_1 z + ... + c_p z^p).
/// sign = +1 for an AR polynomial, -1 for an MA polynomial.
double max_inverse_root(std::span<const double> coeffs, double sign);

struct SearchCaps {
    int p_max = 5;
    int q_max = 5;
    int d_max = 2;
};

struct SearchResult {
    ArimaModel model;
    std::vector<ArimaModel> evaluated;  ///< every successful fit, in evaluation order
    std::vector<std::string> warnings;
};

/// Picks d by repeated ADF tests, then walks the (p,q) grid from
/// {(0,0),(1,0),(0,1),(2,2)} to an AIC local minimum.
SearchResult stepwise_search(std::span<const double> series, const SearchCaps& caps = {},
                             const FitOptions& options = {});

/// One-step-ahead predictions of the undifferenced series with fixed
/// parameters. Entry t is the prediction of y[t]; entries before
/// `first_valid_prediction(model)` are NaN.
std::vector<double> one_step_predictions(const ArimaModel& model, std::span<const double> y);
std::size_t first_valid_prediction(const ArimaModel& model);

void save_model(const ArimaModel& model, const std::filesystem::path& path);
ArimaModel load_model(const std::filesystem::path& path);
std::string model_to_json(const ArimaModel& model);
ArimaModel model_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Rolling severity

struct AnomalyReport {
    Instant timestamp;
    double actual = 0.0;
    double predicted = 0.0;
    double error = 0.0;
    double rolling_sigma = 0.0;
    int severity = 0;
    bool is_anomaly = false;
};

/// Severity bands at 1.5, 1.75 and 2 sigma on each side.
int grade_severity(double error, double sigma);

struct RollingOptions {
    std::size_t window = 20;
    std::optional<Instant> from;
    std::optional<Instant> to;
};

/// Throws InsufficientHistory when the window cannot be filled before `from`.
std::vector<AnomalyReport> rolling_detect(const PriceSeries& series, const ArimaModel& model,
                                          const RollingOptions& options = {});

/// Same as above on raw values; timestamps are left at the epoch.
std::vector<AnomalyReport> rolling_detect_values(std::span<const double> y, const ArimaModel& model,
                                                 std::size_t window, std::size_t first_index = 0);

std::string report_to_json_line(const AnomalyReport& r);
/// Throws MalformedRow for a line that report_to_json_line could not have written.
AnomalyReport report_from_json_line(const std::string& line);

// ---------------------------------------------------------------------------
// Multivariate detectors

using FeatureMatrix = std::vector<std::vector<double>>;

/// Column-wise z-scores; constant columns become zero.
FeatureMatrix standardize(const FeatureMatrix& points);

/// (epoch seconds, close, volume), z-scored.
FeatureMatrix price_features(const PriceSeries& series);

struct LofScore {
    std::size_t index = 0;
    double score = 1.0;
};

struct LofResult {
    std::vector<LofScore> scores;
    std::vector<std::string> warnings;
};

/// Brute-force k-NN local outlier factor. Throws TooFewPoints when n <= k.
LofResult lof_scores(const FeatureMatrix& points, std::size_t k = 10);

struct IForestScore {
    std::size_t index = 0;
    double score = 0.0;
};

struct IForestOptions {
    std::size_t trees = 100;
    std::size_t subsample = 256;
    std::uint64_t seed = 42;
};

/// Average unsuccessful-search path length, c(m) = 2H(m-1) - 2(m-1)/m.
double average_path_length(std::size_t m);

/// 2^(-mean_path / c(sample_size))
double isolation_score(double mean_path, std::size_t sample_size);

std::vector<IForestScore> iforest_scores(const FeatureMatrix& points, const IForestOptions& options = {});

}  // namespace trustscreen::anomaly
