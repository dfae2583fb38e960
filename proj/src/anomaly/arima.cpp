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
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <json.hpp>

namespace trustscreen::anomaly {

double aic_of(double loglik, const ArimaOrder& order, bool include_mean) {
    return -2.0 * loglik + 2.0 * (order.p + order.q + (include_mean ? 1 : 0) + 1);
}

std::vector<double> difference(std::span<const double> series, int d) {
    std::vector<double> w(series.begin(), series.end());
    for (int k = 0; k < d; ++k) {
        if (w.size() < 2) return {};
        for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i] = w[i + 1] - w[i];
        w.pop_back();
    }
    return w;
}

double max_inverse_root(std::span<const double> coeffs, double sign) {
    const auto p = static_cast<Eigen::Index>(coeffs.size());
    if (p == 0) return 0.0;
    // Inverse roots of 1 - sign*(c_1 z + ... + c_p z^p) are the eigenvalues
    // of the companion matrix with first row sign*c.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = sign * coeffs[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    double radius = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) radius = std::max(radius, std::abs(es.eigenvalues()(i)));
    return radius;
}

bool ar_is_stationary(std::span<const double> ar) { return max_inverse_root(ar, 1.0) < 1.0; }

// ---------------------------------------------------------------------------
// Conditional likelihood

ConditionalLikelihood::ConditionalLikelihood(std::span<const double> w, int p, int q, bool include_mean)
    : w_(w.begin(), w.end()), p_(p), q_(q), mean_(include_mean) {}

std::vector<double> ConditionalLikelihood::residuals(std::span<const double> theta) const {
    const double mu = mean_ ? theta[0] : fixed_mean_;
    const std::size_t off = mean_ ? 1 : 0;
    const std::size_t n = w_.size();
    std::vector<double> z(n);
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) z[t] = w_[t] - mu;
    for (std::size_t t = 0; t < n; ++t) {
        double v = z[t];
        for (int i = 1; i <= p_ && static_cast<std::size_t>(i) <= t; ++i) v -= theta[off + i - 1] * z[t - i];
        for (int j = 1; j <= q_ && static_cast<std::size_t>(j) <= t; ++j) {
            v -= theta[off + p_ + j - 1] * e[t - j];
        }
        e[t] = v;
    }
    return e;
}

double ConditionalLikelihood::sse(std::span<const double> theta) const {
    const auto e = residuals(theta);
    double s = 0.0;
    for (double v : e) s += v * v;
    return s;
}

double ConditionalLikelihood::loglik(std::span<const double> theta) const {
    const double n = static_cast<double>(w_.size());
    const double s = sse(theta);
    if (!(s > 0.0) || !std::isfinite(s)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * (std::log(2.0 * std::numbers::pi * s / n) + 1.0);
}

std::vector<double> ConditionalLikelihood::gradient(std::span<const double> theta) const {
    const std::size_t dim = dimension();
    const std::size_t off = mean_ ? 1 : 0;
    const double mu = mean_ ? theta[0] : fixed_mean_;
    const std::size_t n = w_.size();

    std::vector<double> z(n);
    std::vector<double> e(n);
    // de[t * dim + k] = d e_t / d theta_k
    std::vector<double> de(n * dim, 0.0);
    for (std::size_t t = 0; t < n; ++t) z[t] = w_[t] - mu;

    for (std::size_t t = 0; t < n; ++t) {
        double v = z[t];
        double* dt = &de[t * dim];
        if (mean_) dt[0] = -1.0;
        for (int i = 1; i <= p_ && static_cast<std::size_t>(i) <= t; ++i) {
            const double a = theta[off + i - 1];
            v -= a * z[t - i];
            dt[off + i - 1] -= z[t - i];
            if (mean_) dt[0] += a;
        }
        for (int j = 1; j <= q_ && static_cast<std::size_t>(j) <= t; ++j) {
            const double b = theta[off + p_ + j - 1];
            v -= b * e[t - j];
            dt[off + p_ + j - 1] -= e[t - j];
            const double* dprev = &de[(t - j) * dim];
            for (std::size_t k = 0; k < dim; ++k) dt[k] -= b * dprev[k];
        }
        e[t] = v;
    }

    double s = 0.0;
    std::vector<double> ds(dim, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        s += e[t] * e[t];
        for (std::size_t k = 0; k < dim; ++k) ds[k] += 2.0 * e[t] * de[t * dim + k];
    }
    // loglik = -n/2 * (log(2 pi s / n) + 1)  =>  dl = -n/(2s) * ds
    const double scale = -0.5 * static_cast<double>(n) / s;
    for (auto& g : ds) g *= scale;
    return ds;
}

// ---------------------------------------------------------------------------
// Optimizer

namespace {

struct Minimum {
    std::vector<double> x;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// BFGS with Armijo backtracking on f(x) = -loglik(x)/n.
Minimum minimize_bfgs(const ConditionalLikelihood& lik, std::vector<double> x0, const FitOptions& opt) {
    const auto dim = static_cast<Eigen::Index>(x0.size());
    const double n = static_cast<double>(lik.nobs());
    auto value = [&](const Eigen::VectorXd& x) {
        const double ll = lik.loglik(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        return std::isfinite(ll) ? -ll / n : std::numeric_limits<double>::infinity();
    };
    auto grad = [&](const Eigen::VectorXd& x) {
        const auto g = lik.gradient(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        Eigen::VectorXd out(dim);
        for (Eigen::Index i = 0; i < dim; ++i) out(i) = -g[static_cast<std::size_t>(i)] / n;
        return out;
    };

    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(x0.data(), dim);
    Minimum result;
    double fx = value(x);
    if (dim == 0) {
        result.value = fx;
        result.converged = true;
        return result;
    }
    Eigen::VectorXd g = grad(x);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);

    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        if (inf_norm(g) < opt.gradient_tolerance) break;
        Eigen::VectorXd dir = -H * g;
        if (dir.dot(g) >= 0.0) {
            H.setIdentity();
            dir = -g;
        }
        double step = 1.0;
        Eigen::VectorXd x_new;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * dir;
            f_new = value(x_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * g.dot(dir)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (H.isIdentity()) break;
            H.setIdentity();
            continue;
        }
        const Eigen::VectorXd g_new = grad(x_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    result.x.assign(x.data(), x.data() + x.size());
    result.value = fx;
    result.gradient_norm = inf_norm(g);
    result.iterations = iter;
    result.converged = result.gradient_norm < opt.gradient_tolerance;
    return result;
}

}  // namespace

ArimaModel fit_arima(std::span<const double> series, ArimaOrder order, const FitOptions& options) {
    if (order.p < 0 || order.q < 0 || order.d < 0 || order.d > 2) {
        throw Error(ErrorCode::InvalidArgument, "invalid ARIMA order");
    }
    if (series.size() <= static_cast<std::size_t>(order.p + order.q + order.d + 10)) {
        throw Error(ErrorCode::TooShort, "series too short for the requested order");
    }
    const auto w = difference(series, order.d);
    const bool include_mean = order.d == 0;
    const ConditionalLikelihood lik(w, order.p, order.q, include_mean);

    std::vector<double> x0(lik.dimension(), 0.0);
    if (include_mean) x0[0] = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());

    const auto opt = minimize_bfgs(lik, x0, options);
    if (!opt.converged) {
        throw Error(ErrorCode::NonConvergence,
                    "ARIMA(" + std::to_string(order.p) + "," + std::to_string(order.d) + "," +
                        std::to_string(order.q) + ") did not converge; gradient norm " +
                        std::to_string(opt.gradient_norm));
    }

    ArimaModel m;
    m.order = order;
    m.include_mean = include_mean;
    const std::size_t off = include_mean ? 1 : 0;
    m.mu = include_mean ? opt.x[0] : 0.0;
    m.ar_coeffs.assign(opt.x.begin() + static_cast<std::ptrdiff_t>(off),
                       opt.x.begin() + static_cast<std::ptrdiff_t>(off + order.p));
    m.ma_coeffs.assign(opt.x.begin() + static_cast<std::ptrdiff_t>(off + order.p), opt.x.end());
    if (!ar_is_stationary(m.ar_coeffs)) {
        throw Error(ErrorCode::NonStationaryFit, "fitted AR polynomial has a root inside the unit circle");
    }
    m.nobs = w.size();
    m.sigma2 = lik.sse(opt.x) / static_cast<double>(w.size());
    if (!(m.sigma2 > 0.0)) throw Error(ErrorCode::NonConvergence, "zero innovation variance");
    m.loglik = lik.loglik(opt.x);
    m.aic = aic_of(m.loglik, order, include_mean);
    m.iterations = opt.iterations;
    m.gradient_norm = opt.gradient_norm;
    return m;
}

// ---------------------------------------------------------------------------
// Stepwise order search

namespace {

// Candidates with an AR or MA inverse root this close to the unit circle are
// numerically fragile and are not selectable.
constexpr double kNearUnitRoot = 0.99;

}  // namespace

SearchResult stepwise_search(std::span<const double> series, const SearchCaps& caps, const FitOptions& options) {
    SearchResult out;

    int d = 0;
    for (; d < caps.d_max; ++d) {
        const auto w = difference(series, d);
        if (adf_test(w).reject_nonstationary) break;
    }

    std::map<std::pair<int, int>, std::optional<ArimaModel>> cache;
    auto evaluate = [&](int p, int q) -> const std::optional<ArimaModel>& {
        const auto key = std::make_pair(p, q);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        std::optional<ArimaModel> fitted;
        try {
            fitted = fit_arima(series, {p, d, q}, options);
            out.evaluated.push_back(*fitted);
            const double radius = std::max(max_inverse_root(fitted->ar_coeffs, 1.0),
                                           max_inverse_root(fitted->ma_coeffs, -1.0));
            if (radius > kNearUnitRoot) {
                out.warnings.push_back("skipped: ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," +
                                       std::to_string(q) + ") has an inverse root near the unit circle");
                fitted.reset();
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonConvergence && e.code() != ErrorCode::NonStationaryFit) throw;
            out.warnings.push_back(std::string("skipped: ") + e.what());
        }
        return cache.emplace(key, std::move(fitted)).first->second;
    };
    auto in_caps = [&](int p, int q) { return p >= 0 && q >= 0 && p <= caps.p_max && q <= caps.q_max; };

    std::optional<ArimaModel> best;
    const std::pair<int, int> starts[] = {{0, 0}, {1, 0}, {0, 1}, {2, 2}};
    for (const auto& [p, q] : starts) {
        if (!in_caps(p, q)) continue;
        const auto& m = evaluate(p, q);
        if (m && (!best || m->aic < best->aic)) best = m;
    }
    if (!best) throw Error(ErrorCode::NonConvergence, "no starting ARIMA order could be fitted");

    while (true) {
        std::optional<ArimaModel> improved;
        for (int dp = -1; dp <= 1; ++dp) {
            for (int dq = -1; dq <= 1; ++dq) {
                if (dp == 0 && dq == 0) continue;
                const int p = best->order.p + dp;
                const int q = best->order.q + dq;
                if (!in_caps(p, q)) continue;
                const auto& m = evaluate(p, q);
                if (m && m->aic < (improved ? improved->aic : best->aic)) improved = m;
            }
        }
        if (!improved) break;
        best = improved;
    }
    out.model = *best;
    return out;
}

// ---------------------------------------------------------------------------
// Forecasting

std::size_t first_valid_prediction(const ArimaModel& model) {
    return static_cast<std::size_t>(model.order.d + model.order.p);
}

std::vector<double> one_step_predictions(const ArimaModel& model, std::span<const double> y) {
    const int d = model.order.d;
    const int p = model.order.p;
    const int q = model.order.q;
    std::vector<double> pred(y.size(), std::numeric_limits<double>::quiet_NaN());
    if (y.size() <= static_cast<std::size_t>(d)) return pred;

    const auto w = difference(y, d);
    const std::size_t n = w.size();
    std::vector<double> z(n);
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) z[t] = w[t] - model.mu;

    // binomial coefficients for undoing the differencing
    std::vector<double> binom(static_cast<std::size_t>(d) + 1, 1.0);
    for (int k = 1; k <= d; ++k) binom[k] = binom[k - 1] * (d - k + 1) / k;

    for (std::size_t t = 0; t < n; ++t) {
        double zhat = 0.0;
        for (int i = 1; i <= p && static_cast<std::size_t>(i) <= t; ++i) zhat += model.ar_coeffs[i - 1] * z[t - i];
        for (int j = 1; j <= q && static_cast<std::size_t>(j) <= t; ++j) zhat += model.ma_coeffs[j - 1] * e[t - j];
        e[t] = z[t] - zhat;

        const std::size_t yi = t + static_cast<std::size_t>(d);
        if (yi < first_valid_prediction(model)) continue;
        double yhat = model.mu + zhat;
        for (int k = 1; k <= d; ++k) {
            const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // -(-1)^k
            yhat += sign * binom[k] * y[yi - k];
        }
        pred[yi] = yhat;
    }
    return pred;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr const char* kModelFormat = "trustscreen-arima";
constexpr int kModelVersion = 1;
}  // namespace

std::string model_to_json(const ArimaModel& m) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["order"] = {{"p", m.order.p}, {"d", m.order.d}, {"q", m.order.q}};
    j["include_mean"] = m.include_mean;
    j["mu"] = m.mu;
    j["ar_coeffs"] = m.ar_coeffs;
    j["ma_coeffs"] = m.ma_coeffs;
    j["sigma2"] = m.sigma2;
    j["loglik"] = m.loglik;
    j["aic"] = m.aic;
    j["nobs"] = m.nobs;
    return j.dump(2);
}

ArimaModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format") != kModelFormat || j.at("version").get<int>() != kModelVersion) {
            throw Error(ErrorCode::MalformedModelFile, "not a version-1 ARIMA model file");
        }
        ArimaModel m;
        m.order = {j.at("order").at("p").get<int>(), j.at("order").at("d").get<int>(),
                   j.at("order").at("q").get<int>()};
        m.include_mean = j.at("include_mean").get<bool>();
        m.mu = j.at("mu").get<double>();
        m.ar_coeffs = j.at("ar_coeffs").get<std::vector<double>>();
        m.ma_coeffs = j.at("ma_coeffs").get<std::vector<double>>();
        m.sigma2 = j.at("sigma2").get<double>();
        m.loglik = j.at("loglik").get<double>();
        m.aic = j.at("aic").get<double>();
        m.nobs = j.at("nobs").get<std::size_t>();
        if (static_cast<int>(m.ar_coeffs.size()) != m.order.p ||
            static_cast<int>(m.ma_coeffs.size()) != m.order.q || !(m.sigma2 > 0.0)) {
            throw Error(ErrorCode::MalformedModelFile, "inconsistent ARIMA model file");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedModelFile, std::string("bad ARIMA model file: ") + e.what());
    }
}

void save_model(const ArimaModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << model_to_json(model) << '\n';
}

ArimaModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

}  // namespace trustscreen::anomaly
