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
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "anomaly_oracles.hpp"
#include "test_support.hpp"
#include "trustscreen/anomaly.hpp"

using namespace trustscreen;
using namespace trustscreen::anomaly;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

// Deterministic test signal shared with the reference values below.
std::vector<double> reference_signal() {
    std::vector<double> y(200);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = static_cast<double>(i);
        y[i] = std::sin(0.3 * t) + 0.01 * t + static_cast<double>((i * 7919) % 101) / 101.0 - 0.5;
    }
    return y;
}

}  // namespace

// ---------------------------------------------------------------------------
// ADF

TEST_CASE("adf: matches an external reference implementation on a fixed signal") {
    // statsmodels adfuller(y, maxlag=3, regression="ct", autolag=None)
    const auto y = reference_signal();
    const auto r = adf_test(y, 3);
    CHECK(r.nobs == 196);
    CHECK(r.t_stat == doctest::Approx(-7.698125910245733).epsilon(1e-9));
    CHECK(r.critical_1pct == doctest::Approx(-4.005717107046171).epsilon(1e-9));
    CHECK(r.critical_5pct == doctest::Approx(-3.4331312406289043).epsilon(1e-9));
    CHECK(r.critical_10pct == doctest::Approx(-3.1403469799998303).epsilon(1e-9));
    CHECK(r.reject_nonstationary);
}

TEST_CASE("adf: MacKinnon p-values match reference values") {
    CHECK(mackinnon_pvalue_ct(-5.0) == doctest::Approx(0.00020574728263882532).epsilon(1e-9));
    CHECK(mackinnon_pvalue_ct(-3.41) == doctest::Approx(0.05006612929243107).epsilon(1e-9));
    CHECK(mackinnon_pvalue_ct(-2.0) == doctest::Approx(0.6014337722402741).epsilon(1e-9));
    CHECK(mackinnon_pvalue_ct(0.5) == doctest::Approx(0.996851911498776).epsilon(1e-9));
    CHECK(mackinnon_pvalue_ct(1.0) == 1.0);
    CHECK(mackinnon_pvalue_ct(-20.0) == 0.0);
}

TEST_CASE("adf: p-value is monotone in the statistic") {
    double prev = 0.0;
    for (double t = -16.0; t < 0.7; t += 0.01) {
        const double p = mackinnon_pvalue_ct(t);
        CHECK(p >= prev - 1e-12);
        prev = p;
    }
}

TEST_CASE("adf: discrimination on white noise and random walks") {
    int noise_rejects = 0;
    int walk_rejects = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        noise_rejects += adf_test(ts_test::white_noise(500, 1000 + s)).reject_nonstationary ? 1 : 0;
        walk_rejects += adf_test(ts_test::random_walk(500, 5000 + s)).reject_nonstationary ? 1 : 0;
    }
    CHECK(noise_rejects >= 95);
    CHECK(walk_rejects <= 10);
}

TEST_CASE("adf: degenerate inputs") {
    const std::vector<double> flat(100, 3.0);
    CHECK(code_of([&] { adf_test(flat); }) == ErrorCode::ConstantSeries);
    const auto short_series = ts_test::white_noise(12, 1);
    CHECK(code_of([&] { adf_test(short_series, 5); }) == ErrorCode::TooShort);
}

TEST_CASE("adf: reject flag agrees with p-value") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = adf_test(ts_test::ar1(300, 0.9, s));
        CHECK(r.reject_nonstationary == (r.p_value < 0.05));
    }
}

// ---------------------------------------------------------------------------
// ARIMA

TEST_CASE("arima: order (0,0,0) recovers sample mean and variance") {
    const auto y = ts_test::white_noise(400, 3, 2.0);
    const auto m = fit_arima(y, {0, 0, 0});
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(y.size());
    CHECK(m.mu == doctest::Approx(mean).epsilon(1e-6));
    CHECK(m.sigma2 == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("arima: AR(1) coefficient recovery and nesting") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto y = ts_test::ar1(1000, 0.7, 100 + s, 5.0);
        const auto m1 = fit_arima(y, {1, 0, 0});
        CHECK(m1.ar_coeffs.at(0) >= 0.6);
        CHECK(m1.ar_coeffs.at(0) <= 0.8);
        const auto m0 = fit_arima(y, {0, 0, 0});
        CHECK(m1.loglik >= m0.loglik);
    }
}

TEST_CASE("arima: AIC identity holds bit-wise") {
    const auto y = ts_test::ar1(500, 0.5, 9);
    for (const ArimaOrder o : {ArimaOrder{0, 0, 0}, ArimaOrder{1, 0, 0}, ArimaOrder{0, 0, 1}, ArimaOrder{2, 0, 1},
                               ArimaOrder{1, 1, 1}}) {
        const auto m = fit_arima(y, o);
        const int k = m.include_mean ? 1 : 0;
        CHECK(m.aic == -2.0 * m.loglik + 2.0 * (o.p + o.q + k + 1));
        CHECK(m.sigma2 > 0.0);
        CHECK(ar_is_stationary(m.ar_coeffs));
    }
}

TEST_CASE("arima: analytic gradient matches central differences at the optimum") {
    const auto y = ts_test::ar1(600, 0.6, 21, 1.0);
    for (const ArimaOrder o : {ArimaOrder{1, 0, 0}, ArimaOrder{1, 0, 1}, ArimaOrder{2, 0, 2}}) {
        const auto m = fit_arima(y, o);
        const ConditionalLikelihood lik(y, o.p, o.q, true);
        std::vector<double> theta{m.mu};
        theta.insert(theta.end(), m.ar_coeffs.begin(), m.ar_coeffs.end());
        theta.insert(theta.end(), m.ma_coeffs.begin(), m.ma_coeffs.end());
        // Away from the stationary point too, so the comparison is not 0 vs 0.
        for (const double shift : {0.0, 0.05}) {
            auto at = theta;
            for (auto& v : at) v += shift;
            const auto g = lik.gradient(at);
            for (std::size_t i = 0; i < at.size(); ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(at[i]));
                auto up = at;
                auto dn = at;
                up[i] += h;
                dn[i] -= h;
                const double numeric = (lik.loglik(up) - lik.loglik(dn)) / (2.0 * h);
                CHECK(std::abs(g[i] - numeric) <= 1e-4 * std::max(1.0, std::abs(numeric)));
            }
        }
    }
}

TEST_CASE("arima: stepwise search recovers AR(1)") {
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto y = ts_test::ar1(1000, 0.7, s);
        const auto r = stepwise_search(y);
        const auto& o = r.model.order;
        hits += (o.p == 1 && o.d == 0 && (o.q == 0 || o.q == 1)) ? 1 : 0;
        for (const auto& m : r.evaluated) {
            const int k = m.include_mean ? 1 : 0;
            CHECK(m.aic == -2.0 * m.loglik + 2.0 * (m.order.p + m.order.q + k + 1));
        }
    }
    CHECK(hits >= 16);
}

TEST_CASE("arima: stepwise search on white noise and random walk") {
    int white_000 = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = stepwise_search(ts_test::white_noise(500, 700 + s));
        white_000 += r.model.order == ArimaOrder{0, 0, 0} ? 1 : 0;
        const auto base = fit_arima(ts_test::white_noise(500, 700 + s), {0, 0, 0});
        CHECK(r.model.aic <= base.aic);
    }
    CHECK(white_000 >= 7);

    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto r = stepwise_search(ts_test::random_walk(500, 800 + s));
        CHECK(r.model.order.d == 1);
    }
}

TEST_CASE("arima: search never beats the white-noise fit from above") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto y = ts_test::ar1(400, 0.3, 900 + s);
        const auto r = stepwise_search(y);
        const auto w = difference(y, r.model.order.d);
        const auto base = fit_arima(w, {0, 0, 0});
        CHECK(r.model.aic <= base.aic);
    }
}

TEST_CASE("arima: model file round trip") {
    const auto y = ts_test::ar1(300, 0.4, 5);
    const auto m = fit_arima(y, {1, 1, 1});
    ts_test::TempDir dir;
    const auto path = dir.path() / "model.json";
    save_model(m, path);
    const auto back = load_model(path);
    CHECK(back.order == m.order);
    CHECK(back.mu == m.mu);
    CHECK(back.ar_coeffs == m.ar_coeffs);
    CHECK(back.ma_coeffs == m.ma_coeffs);
    CHECK(back.sigma2 == m.sigma2);
    CHECK(back.loglik == m.loglik);
    CHECK(back.aic == m.aic);
    CHECK(code_of([] { model_from_json(R"({"format":"other"})"); }) == ErrorCode::MalformedModelFile);
}

TEST_CASE("arima: differencing") {
    const std::vector<double> y{1, 4, 9, 16, 25};
    CHECK(difference(y, 1) == std::vector<double>{3, 5, 7, 9});
    CHECK(difference(y, 2) == std::vector<double>{2, 2, 2});
}

TEST_CASE("arima: stationarity check") {
    CHECK(ar_is_stationary(std::vector<double>{0.5}));
    CHECK_FALSE(ar_is_stationary(std::vector<double>{1.2}));
    CHECK(ar_is_stationary(std::vector<double>{0.5, 0.3}));
    CHECK_FALSE(ar_is_stationary(std::vector<double>{0.5, 0.6}));
}

// ---------------------------------------------------------------------------
// Rolling severity

TEST_CASE("severity bands") {
    CHECK(grade_severity(0.0, 1.0) == 0);
    CHECK(grade_severity(1.6, 1.0) == 1);
    CHECK(grade_severity(1.8, 1.0) == 2);
    CHECK(grade_severity(2.1, 1.0) == 3);
    CHECK(grade_severity(1.5, 1.0) == 0);
    for (double e = -3.0; e <= 3.0; e += 0.013) CHECK(grade_severity(-e, 1.0) == -grade_severity(e, 1.0));
}

TEST_CASE("rolling: report invariants and antisymmetry") {
    ArimaModel model;
    model.order = {0, 0, 0};
    model.mu = 0.0;
    model.sigma2 = 1.0;
    auto y = ts_test::white_noise(300, 17);
    const auto reports = rolling_detect_values(y, model, 20, 19);
    for (auto& v : y) v = -v;
    const auto negated = rolling_detect_values(y, model, 20, 19);
    REQUIRE(reports.size() == negated.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        CHECK(r.is_anomaly == (std::abs(r.error) > 2.0 * r.rolling_sigma));
        if (std::abs(r.severity) == 3) CHECK(r.is_anomaly);
        if (r.severity != 0) CHECK((r.severity > 0) == (r.error > 0));
        CHECK(negated[i].severity == -r.severity);
    }
}

TEST_CASE("rolling: injected spike is graded +3") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = ts_test::injected_spike_report(40 + s);
        CHECK(r.severity == 3);
        CHECK(r.is_anomaly);
    }
}

TEST_CASE("rolling: clean noise flags few points") {
    std::size_t flagged = 0;
    std::size_t total = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto y = ts_test::ar1(600, 0.5, 60 + s, 10.0);
        const auto model = fit_arima(y, {1, 0, 0});
        const auto reports = rolling_detect_values(y, model, 20, 20);
        for (const auto& r : reports) flagged += r.is_anomaly ? 1 : 0;
        total += reports.size();
    }
    CHECK(static_cast<double>(flagged) / static_cast<double>(total) <= 0.07);
}

TEST_CASE("rolling: insufficient history") {
    ArimaModel model;
    model.order = {1, 0, 0};
    model.ar_coeffs = {0.5};
    model.sigma2 = 1.0;
    const auto y = ts_test::white_noise(100, 1);
    CHECK(code_of([&] { rolling_detect_values(y, model, 20, 5); }) == ErrorCode::InsufficientHistory);
    CHECK_NOTHROW(rolling_detect_values(y, model, 20, 20));
}

TEST_CASE("rolling: date-range selection on a price series") {
    PriceSeries series;
    series.symbol = "TWTR";
    series.interval = std::chrono::hours(24);
    const auto y = ts_test::ar1(120, 0.5, 3, 60.0);
    const Instant t0 = *parse_instant("2021-01-01");
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Instant t = t0 + std::chrono::days(static_cast<int>(i));
        series.points.push_back({t, y[i], y[i] + 1, y[i] - 1, y[i], 1000});
    }
    const auto model = fit_arima(y, {1, 0, 0});
    RollingOptions opt;
    opt.from = parse_instant("2021-03-01");
    opt.to = parse_instant("2021-03-10");
    const auto reports = rolling_detect(series, model, opt);
    REQUIRE(reports.size() == 10);
    CHECK(format_date(reports.front().timestamp) == "2021-03-01");
    CHECK(format_date(reports.back().timestamp) == "2021-03-10");
    const auto line = report_to_json_line(reports.front());
    CHECK(line.find("\"severity\"") != std::string::npos);
    CHECK(line.find("\"rolling_sigma\"") != std::string::npos);

    opt.from.reset();
    opt.to.reset();
    opt.window = 200;
    CHECK(code_of([&] { rolling_detect(series, model, opt); }) == ErrorCode::InsufficientHistory);
    opt.from = parse_instant("2022-01-01");  // past the end: an empty range, not an error
    CHECK(rolling_detect(series, model, opt).empty());
}

// ---------------------------------------------------------------------------
// LOF

TEST_CASE("lof: uniform lattice interior is exactly 1") {
    FeatureMatrix pts;
    for (int i = 0; i < 20; ++i) pts.push_back({static_cast<double>(i)});
    const auto r = lof_scores(pts, 2);
    for (std::size_t i = 3; i < 17; ++i) CHECK(std::abs(r.scores[i].score - 1.0) <= 1e-9);
}

TEST_CASE("lof: planted outlier matches the brute-force oracle") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto pts = standardize(ts_test::gaussian_cloud_with_outlier(s));
        const auto r = lof_scores(pts, 10);
        const auto oracle = ts_test::lof_oracle(pts, 10);
        for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(r.scores[i].score - oracle[i]) <= 1e-9);
        const auto best = std::max_element(r.scores.begin(), r.scores.end(),
                                           [](const auto& a, const auto& b) { return a.score < b.score; });
        CHECK(best->index == 200);
        CHECK(best->score > 1.5);
    }
}

TEST_CASE("lof: homogeneous cluster stays near one") {
    // Uniform points on a flat 3-torus embedded in R^6: homogeneous density
    // with no boundary, in the detector's three-feature dimension.
    for (std::uint64_t s = 0; s < 10; ++s) {
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        FeatureMatrix pts;
        for (int i = 0; i < 500; ++i) {
            std::vector<double> p;
            for (int d = 0; d < 3; ++d) {
                const double a = angle(rng);
                p.push_back(std::cos(a));
                p.push_back(std::sin(a));
            }
            pts.push_back(p);
        }
        for (const auto& sc : lof_scores(pts, 10).scores) {
            CHECK(sc.score >= 0.8);
            CHECK(sc.score <= 1.3);
        }
    }
}

TEST_CASE("lof: errors and duplicate cliques") {
    const FeatureMatrix few{{0.0}, {1.0}};
    CHECK(code_of([&] { lof_scores(few, 2); }) == ErrorCode::TooFewPoints);
    FeatureMatrix dup(5, std::vector<double>{1.0});
    dup.push_back({2.0});
    dup.push_back({5.0});
    const auto r = lof_scores(dup, 3);
    CHECK(r.scores[0].score == 1.0);
    CHECK_FALSE(r.warnings.empty());
    for (const auto& sc : r.scores) CHECK(sc.score > 0.0);
}

// ---------------------------------------------------------------------------
// Isolation forest

TEST_CASE("iforest: score is one half at the average path length") {
    for (std::size_t n : {2u, 10u, 256u, 1000u}) {
        CHECK(isolation_score(average_path_length(n), n) == 0.5);
    }
    // c(2) = 2H(1) - 1 = 1
    CHECK(average_path_length(2) == doctest::Approx(1.0));
}

TEST_CASE("iforest: planted outlier scores highest") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto pts = ts_test::gaussian_cloud_with_outlier(s);
        IForestOptions opt;
        opt.seed = 1000 + s;
        const auto scores = iforest_scores(pts, opt);
        const auto best = std::max_element(scores.begin(), scores.end(),
                                           [](const auto& a, const auto& b) { return a.score < b.score; });
        CHECK(best->index == 200);
        CHECK(best->score > 0.6);
        for (const auto& sc : scores) {
            CHECK(sc.score > 0.0);
            CHECK(sc.score <= 1.0);
        }
    }
}

TEST_CASE("iforest: deterministic and permutation invariant") {
    const auto pts = ts_test::gaussian_cloud_with_outlier(3);
    const auto a = iforest_scores(pts);
    const auto b = iforest_scores(pts);
    FeatureMatrix permuted = pts;
    for (auto& p : permuted) std::swap(p[0], p[2]);
    const auto c = iforest_scores(permuted);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(a[i].score == b[i].score);
        CHECK(a[i].score == c[i].score);
    }
    CHECK(code_of([] { iforest_scores(FeatureMatrix{{1.0}}); }) == ErrorCode::TooFewPoints);
}

TEST_CASE("price features are z-scored") {
    FeatureMatrix raw{{1.0, 10.0, 5.0}, {2.0, 20.0, 5.0}, {3.0, 30.0, 5.0}};
    const auto z = standardize(raw);
    for (std::size_t j = 0; j < 2; ++j) {
        double m = 0.0;
        for (const auto& p : z) m += p[j];
        CHECK(std::abs(m) < 1e-12);
    }
    for (const auto& p : z) CHECK(p[2] == 0.0);
}
