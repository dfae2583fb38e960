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

// Independent solver for the soft-margin SVM dual, used only to check SMO.
// Accelerated projected gradient ascent on
//   max 1'a - a'Qa/2  s.t.  0 <= a <= C, y'a = 0,   Q_ij = y_i y_j K_ij.
// The projection onto box-and-hyperplane solves for the multiplier of the
// equality constraint by bisection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace ts_test {

struct QpInstance {
    Eigen::MatrixXd X;
    std::vector<int> y;
};

/// Two overlapping Gaussian clouds in 2-D, so some multipliers sit at C and
/// some strictly inside the box.
inline QpInstance overlapping_clouds(int n, std::uint64_t seed, double shift = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    QpInstance q;
    q.X.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        q.y.push_back(label);
        q.X(i, 0) = z(rng) + label * shift;
        q.X(i, 1) = z(rng) + label * shift * 0.5;
    }
    return q;
}

inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v, const std::vector<int>& y, double C) {
    const auto n = v.size();
    auto clipped = [&](double lam) {
        Eigen::VectorXd a(n);
        for (Eigen::Index i = 0; i < n; ++i) a[i] = std::clamp(v[i] - lam * y[static_cast<std::size_t>(i)], 0.0, C);
        return a;
    };
    auto h = [&](double lam) {
        const Eigen::VectorXd a = clipped(lam);
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += y[static_cast<std::size_t>(i)] * a[i];
        return s;
    };
    // h is non-increasing in lam
    double lo = -(v.cwiseAbs().maxCoeff() + C + 1.0);
    double hi = -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    return clipped(0.5 * (lo + hi));
}

struct QpSolution {
    Eigen::VectorXd alpha;
    double objective = 0.0;
};

inline QpSolution solve_dual_qp(const Eigen::MatrixXd& K, const std::vector<int>& y, double C, int iterations = 50000) {
    const auto n = K.rows();
    Eigen::MatrixXd Q(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) Q(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * K(i, j);
    }
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff();
    const double step = 1.0 / L;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd z = a;
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - Q * z;
        const Eigen::VectorXd next = project_box_hyperplane(z + step * grad, y, C);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = next + ((t - 1.0) / tn) * (next - a);
        a = next;
        t = tn;
    }
    QpSolution s;
    s.alpha = a;
    s.objective = a.sum() - 0.5 * a.dot(Q * a);
    return s;
}

}  // namespace ts_test
