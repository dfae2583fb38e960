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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trustscreen/error.hpp"

namespace trustscreen::learn {

enum class KernelKind { Rbf, Poly };

/// rbf: exp(-gamma |a-b|^2); poly: (gamma <a,b> + coef0)^degree.
struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double C = 1.0;
    double gamma = 0.1;
    int degree = 3;
    double coef0 = 1.0;

    bool operator==(const KernelSpec&) const = default;
};

/// Throws ConfigError unless C > 0, gamma > 0 and degree >= 1.
void validate(const KernelSpec& spec);
std::string describe(const KernelSpec& spec);

double kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b);

/// Platt sigmoid: P(y = +1 | f) = 1 / (1 + exp(a f + b)).
struct Sigmoid {
    double a = 0.0;
    double b = 0.0;

    bool operator==(const Sigmoid&) const = default;
};

/**
 * decision(x) = sum_i coef_i K(sv_i, x) + bias, coef_i = alpha_i y_i.
 * Labels are +1 / -1; predict_proba reports P(y = +1).
 */
struct SvmModel {
    KernelSpec spec;
    Eigen::MatrixXd support_vectors;  ///< one row per vector
    Eigen::VectorXd coef;
    double bias = 0.0;
    std::vector<Sigmoid> calibration;  ///< one per fold member; empty until calibrated

    Eigen::Index dimension() const { return support_vectors.cols(); }
    bool calibrated() const { return !calibration.empty(); }
};

struct SmoOptions {
    double tol = 1e-3;
    int max_passes = 10000;  ///< outer sweeps
    std::uint64_t seed = 0;  ///< start offsets of the fallback scans
    bool record_objective = false;
};

struct SmoResult {
    SvmModel model;
    bool converged = false;
    int passes = 0;
    std::vector<double> alphas;            ///< full dual vector, training order
    std::vector<double> objective_trace;   ///< after every successful step, when recorded
    double objective = 0.0;
};

/**
 * Platt's SMO on the full kernel matrix. Throws SingleClass when fewer than
 * two samples or one label only; InvalidArgument for labels other than +-1
 * or a row/label count mismatch. Non-convergence returns the best-so-far
 * model with converged = false.
 */
SmoResult smo_train(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                    const SmoOptions& options = {});

double decision(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Dual objective sum(alpha) - 1/2 sum_ij y_i y_j alpha_i alpha_j K_ij.
double dual_objective(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                      const std::vector<double>& alphas);

/// Largest KKT violation of (alphas, model.bias) in units of y f(x).
double kkt_residual(const Eigen::MatrixXd& X, const std::vector<int>& y, const SvmModel& model,
                    const std::vector<double>& alphas);

/// Fraction of rows whose decision sign matches the label (0 counts as +1).
double accuracy(const SvmModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y);

/// Stratified, seeded assignment of rows to `folds` folds (values 0..folds-1).
/// Throws InvalidArgument when folds < 2 or exceeds the row count.
std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Grid search

struct Grid {
    std::vector<double> C{0.1, 1.0, 10.0, 100.0};
    std::vector<double> gamma{0.01, 0.1, 1.0};
    std::vector<int> degree{2, 3};
    std::vector<KernelKind> kinds{KernelKind::Rbf, KernelKind::Poly};
};

struct GridCell {
    KernelSpec spec;
    double mean_accuracy = 0.0;
    bool skipped = false;
    std::string warning;
};

struct GridResult {
    KernelSpec best;
    double best_accuracy = 0.0;
    std::vector<GridCell> cells;
};

/// Every cell (rbf cells ignore degree) scored by mean fold accuracy; ties go
/// to the smaller C, then smaller gamma, then rbf, then smaller degree.
GridResult grid_search(const Eigen::MatrixXd& X, const std::vector<int>& y, const Grid& grid, int folds = 5,
                       std::uint64_t seed = 0, const SmoOptions& smo = {});

// ---------------------------------------------------------------------------
// Calibration

/// Lin-Lin-Weng Newton fit of a Platt sigmoid with prior-smoothed targets.
Sigmoid fit_sigmoid(const std::vector<double>& decision_values, const std::vector<int>& y);

/**
 * Trains on all rows, then for each fold retrains on the other folds and fits
 * a sigmoid to the held-out decision values. A fold lacking a class is
 * DegenerateFold internally and triggers one stratified re-split.
 */
SvmModel train_calibrated(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                          int folds = 5, std::uint64_t seed = 0, const SmoOptions& smo = {});

/// Adds fold sigmoids to an already trained model.
SvmModel calibrate(SvmModel model, const Eigen::MatrixXd& X, const std::vector<int>& y, int folds = 5,
                   std::uint64_t seed = 0, const SmoOptions& smo = {});

/// Mean of the member sigmoids at decision(x). Throws WrongDimension and
/// InvalidArgument for an uncalibrated model.
double predict_proba(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<double> predict_proba_batch(const SvmModel& model, const Eigen::MatrixXd& X);

/// Cross-validated accuracy of the calibrated pipeline: each fold trains a
/// calibrated model on the other folds and thresholds P(+1) at 0.5.
double cross_validated_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                                int folds = 5, std::uint64_t seed = 0, const SmoOptions& smo = {});

// ---------------------------------------------------------------------------
// Persistence

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(const std::string& text);
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace trustscreen::learn
