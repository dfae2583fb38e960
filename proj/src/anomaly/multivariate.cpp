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
#include <memory>
#include <numeric>
#include <random>

namespace trustscreen::anomaly {

FeatureMatrix standardize(const FeatureMatrix& points) {
    if (points.empty()) return {};
    const std::size_t dim = points.front().size();
    const double n = static_cast<double>(points.size());
    FeatureMatrix out = points;
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& p : points) mean += p[j];
        mean /= n;
        double ss = 0.0;
        for (const auto& p : points) ss += (p[j] - mean) * (p[j] - mean);
        const double sd = std::sqrt(ss / n);
        for (auto& p : out) p[j] = sd > 0.0 ? (p[j] - mean) / sd : 0.0;
    }
    return out;
}

FeatureMatrix price_features(const PriceSeries& series) {
    FeatureMatrix raw;
    raw.reserve(series.points.size());
    for (const auto& p : series.points) raw.push_back({epoch_seconds(p.timestamp), p.close, p.volume});
    return standardize(raw);
}

// ---------------------------------------------------------------------------
// Local outlier factor

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

LofResult lof_scores(const FeatureMatrix& points, std::size_t k) {
    const std::size_t n = points.size();
    if (k < 1 || n <= k) throw Error(ErrorCode::TooFewPoints, "LOF needs more points than neighbours");
    for (const auto& p : points) {
        if (p.size() != points.front().size()) throw Error(ErrorCode::InvalidArgument, "ragged feature matrix");
    }

    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double d = i == j ? 0.0 : euclidean(points[i], points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    // k nearest neighbours, ties broken by lower index
    std::vector<std::vector<std::size_t>> knn(n);
    std::vector<double> k_distance(n);
    std::vector<std::size_t> order(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) order[w++] = j;
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              const double da = dist[i * n + a];
                              const double db = dist[i * n + b];
                              return da < db || (da == db && a < b);
                          });
        knn[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        k_distance[i] = dist[i * n + knn[i].back()];
    }

    std::vector<double> mean_reach(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j : knn[i]) s += std::max(k_distance[j], dist[i * n + j]);
        mean_reach[i] = s / static_cast<double>(k);
    }

    LofResult out;
    std::size_t collapsed = 0;
    // A point whose k neighbours all coincide with it has infinite density;
    // the epsilon keeps its neighbours' ratios finite.
    constexpr double kEps = 1e-10;
    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) lrd[i] = 1.0 / (mean_reach[i] + (mean_reach[i] == 0.0 ? kEps : 0.0));

    out.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.scores[i].index = i;
        if (mean_reach[i] == 0.0) {
            out.scores[i].score = 1.0;
            ++collapsed;
            continue;
        }
        double s = 0.0;
        for (std::size_t j : knn[i]) s += lrd[j];
        out.scores[i].score = (s / static_cast<double>(k)) / lrd[i];
    }
    if (collapsed > 0) {
        out.warnings.push_back(std::to_string(collapsed) +
                               " point(s) sit in a clique of >= k+1 duplicates; LOF set to 1.0");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Isolation forest

double average_path_length(std::size_t m) {
    if (m <= 1) return 0.0;
    double harmonic = 0.0;
    for (std::size_t i = 1; i < m; ++i) harmonic += 1.0 / static_cast<double>(i);
    const double md = static_cast<double>(m);
    return 2.0 * harmonic - 2.0 * (md - 1.0) / md;
}

double isolation_score(double mean_path, std::size_t sample_size) {
    const double c = average_path_length(sample_size);
    if (c <= 0.0) return 1.0;
    return std::exp2(-mean_path / c);
}

namespace {

struct IsolationNode {
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t size = 0;
    std::unique_ptr<IsolationNode> left;
    std::unique_ptr<IsolationNode> right;

    bool leaf() const { return !left; }
};

class IsolationTree {
public:
    IsolationTree(const FeatureMatrix& points, std::vector<std::size_t> sample, std::size_t depth_cap,
                  std::mt19937_64& rng)
        : points_(points), depth_cap_(depth_cap) {
        root_ = build(sample, 0, rng);
    }

    double path_length(const std::vector<double>& x) const {
        const IsolationNode* node = root_.get();
        double depth = 0.0;
        while (!node->leaf()) {
            node = x[node->feature] < node->threshold ? node->left.get() : node->right.get();
            depth += 1.0;
        }
        return depth + average_path_length(node->size);
    }

private:
    // Features are visited in an order fixed by their values inside the
    // node, so permuting columns of the input builds the identical tree.
    std::vector<std::size_t> canonical_features(const std::vector<std::size_t>& idx) const {
        const std::size_t dim = points_[idx.front()].size();
        std::vector<std::size_t> feats(dim);
        std::iota(feats.begin(), feats.end(), 0);
        std::stable_sort(feats.begin(), feats.end(), [&](std::size_t a, std::size_t b) {
            for (std::size_t i : idx) {
                const double va = points_[i][a];
                const double vb = points_[i][b];
                if (va != vb) return va < vb;
            }
            return false;
        });
        return feats;
    }

    std::unique_ptr<IsolationNode> build(std::vector<std::size_t>& idx, std::size_t depth, std::mt19937_64& rng) {
        auto node = std::make_unique<IsolationNode>();
        node->size = idx.size();
        if (idx.size() <= 1 || depth >= depth_cap_) return node;

        const auto feats = canonical_features(idx);
        std::vector<std::size_t> splittable;
        std::vector<std::pair<double, double>> ranges;
        for (std::size_t f : feats) {
            double lo = points_[idx.front()][f];
            double hi = lo;
            for (std::size_t i : idx) {
                lo = std::min(lo, points_[i][f]);
                hi = std::max(hi, points_[i][f]);
            }
            if (hi > lo) {
                splittable.push_back(f);
                ranges.emplace_back(lo, hi);
            }
        }
        if (splittable.empty()) return node;

        std::uniform_int_distribution<std::size_t> pick(0, splittable.size() - 1);
        const std::size_t which = pick(rng);
        std::uniform_real_distribution<double> cut(ranges[which].first, ranges[which].second);
        node->feature = splittable[which];
        node->threshold = cut(rng);
        if (node->threshold <= ranges[which].first) node->threshold = std::nextafter(ranges[which].first, ranges[which].second);

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : idx) {
            (points_[i][node->feature] < node->threshold ? left : right).push_back(i);
        }
        node->left = build(left, depth + 1, rng);
        node->right = build(right, depth + 1, rng);
        return node;
    }

    const FeatureMatrix& points_;
    std::size_t depth_cap_;
    std::unique_ptr<IsolationNode> root_;
};

}  // namespace

std::vector<IForestScore> iforest_scores(const FeatureMatrix& points, const IForestOptions& options) {
    const std::size_t n = points.size();
    if (n < 2) throw Error(ErrorCode::TooFewPoints, "isolation forest needs at least two points");
    if (options.trees == 0 || options.subsample < 2) {
        throw Error(ErrorCode::InvalidArgument, "isolation forest needs trees >= 1 and subsample >= 2");
    }
    const std::size_t psi = std::min(n, options.subsample);
    const auto depth_cap = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));

    std::vector<double> total(n, 0.0);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t t = 0; t < options.trees; ++t) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(t)};
        std::mt19937_64 rng(seq);
        std::vector<std::size_t> sample = all;
        std::shuffle(sample.begin(), sample.end(), rng);
        sample.resize(psi);
        std::sort(sample.begin(), sample.end());
        const IsolationTree tree(points, sample, depth_cap, rng);
        for (std::size_t i = 0; i < n; ++i) total[i] += tree.path_length(points[i]);
    }

    std::vector<IForestScore> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].index = i;
        out[i].score = isolation_score(total[i] / static_cast<double>(options.trees), psi);
    }
    return out;
}

}  // namespace trustscreen::anomaly
