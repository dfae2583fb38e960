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
#include <limits>

#include <Eigen/Dense>

namespace trustscreen::anomaly {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// MacKinnon (1994), N = 1, regression with constant and trend.
constexpr double kTauMax = 0.7;
constexpr double kTauMin = -16.18;
constexpr double kTauStar = -2.89;
constexpr double kSmallP[3] = {3.2512, 1.6047, 4.9588e-2};
constexpr double kLargeP[4] = {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2};

// MacKinnon (2010) response surface, N = 1, constant and trend:
// cv = b0 + b1/T + b2/T^2 + b3/T^3 for the 1%, 5% and 10% levels.
constexpr double kCritical[3][4] = {
    {-3.95877, -9.0531, -28.428, -134.155},
    {-3.41049, -4.3904, -9.036, -45.374},
    {-3.12705, -2.5856, -3.925, -22.380},
};

}  // namespace

std::size_t default_adf_lags(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_pvalue_ct(double t_stat) {
    if (t_stat > kTauMax) return 1.0;
    if (t_stat < kTauMin) return 0.0;
    double z = 0.0;
    if (t_stat <= kTauStar) {
        z = kSmallP[0] + kSmallP[1] * t_stat + kSmallP[2] * t_stat * t_stat;
    } else {
        z = kLargeP[0] + t_stat * (kLargeP[1] + t_stat * (kLargeP[2] + t_stat * kLargeP[3]));
    }
    return normal_cdf(z);
}

double mackinnon_critical_ct(double level, std::size_t nobs) {
    int row = 1;
    if (level <= 0.01) {
        row = 0;
    } else if (level >= 0.10) {
        row = 2;
    }
    const double inv = 1.0 / static_cast<double>(nobs);
    const auto& c = kCritical[row];
    return c[0] + inv * (c[1] + inv * (c[2] + inv * c[3]));
}

AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags) {
    const std::size_t n = series.size();
    const std::size_t lags = max_lags.value_or(default_adf_lags(n));
    if (n < lags + 10) {
        throw Error(ErrorCode::TooShort, "ADF needs at least max_lags + 10 observations");
    }
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (*lo == *hi) throw Error(ErrorCode::ConstantSeries, "ADF on a constant series");

    std::vector<double> dy(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) dy[i] = series[i + 1] - series[i];

    // rows i = lags .. n-2: dy[i] ~ 1 + trend + y[i] + dy[i-1] .. dy[i-lags]
    const std::size_t rows = n - 1 - lags;
    const std::size_t cols = 3 + lags;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd Y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = r + lags;
        Y(r) = dy[i];
        X(r, 0) = 1.0;
        X(r, 1) = static_cast<double>(i + 1) / static_cast<double>(n);
        X(r, 2) = series[i];
        for (std::size_t j = 1; j <= lags; ++j) X(r, 2 + j) = dy[i - j];
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        throw Error(ErrorCode::ConstantSeries, "ADF regression is rank deficient");
    }
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd resid = Y - X * beta;
    const double dof = static_cast<double>(rows) - static_cast<double>(cols);
    if (dof <= 0.0) throw Error(ErrorCode::TooShort, "ADF regression has no residual degrees of freedom");
    const double s2 = resid.squaredNorm() / dof;
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    const double se = std::sqrt(s2 * xtx_inv(2, 2));

    AdfResult out;
    out.gamma_hat = beta(2);
    out.t_stat = se > 0.0 ? beta(2) / se : -std::numeric_limits<double>::infinity();
    out.p_value = mackinnon_pvalue_ct(out.t_stat);
    out.lags = lags;
    out.nobs = rows;
    out.critical_1pct = mackinnon_critical_ct(0.01, rows);
    out.critical_5pct = mackinnon_critical_ct(0.05, rows);
    out.critical_10pct = mackinnon_critical_ct(0.10, rows);
    out.reject_nonstationary = out.p_value < 0.05;
    return out;
}

}  // namespace trustscreen::anomaly
