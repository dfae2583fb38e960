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
#include "trustscreen/learn.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace trustscreen::learn {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

double kernel_raw(const KernelSpec& s, const double* a, const double* b, Eigen::Index d) {
    if (s.kind == KernelKind::Rbf) {
        double sq = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            const double t = a[k] - b[k];
            sq += t * t;
        }
        return std::exp(-s.gamma * sq);
    }
    double dot = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) dot += a[k] * b[k];
    const double base = s.gamma * dot + s.coef0;
    double out = 1.0;
    for (int k = 0; k < s.degree; ++k) out *= base;
    return out;
}

void check_labels(const Eigen::MatrixXd& X, const std::vector<int>& y) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        fail(ErrorCode::InvalidArgument, "feature rows and labels differ in count");
    }
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        if (v == 1) {
            pos = true;
        } else if (v == -1) {
            neg = true;
        } else {
            fail(ErrorCode::InvalidArgument, "labels must be +1 or -1");
        }
    }
    if (y.size() < 2 || !pos || !neg) fail(ErrorCode::SingleClass, "training needs both classes");
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

std::vector<int> take(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(y[r]);
    return out;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

std::vector<Split> make_splits(const std::vector<int>& fold_of, int folds) {
    std::vector<Split> out(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            (fold_of[i] == f ? out[static_cast<std::size_t>(f)].test : out[static_cast<std::size_t>(f)].train).push_back(i);
        }
    }
    return out;
}

bool has_both(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
    bool pos = false;
    bool neg = false;
    for (auto r : rows) (y[r] > 0 ? pos : neg) = true;
    return pos && neg;
}

/// Stratified folds whose every held-out part holds both classes. A request
/// for more folds than the minority class has members is DegenerateFold;
/// the fold count then drops to the minority count (at least 2).
std::vector<Split> calibration_splits(const std::vector<int>& y, int folds, std::uint64_t seed) {
    if (folds < 2) fail(ErrorCode::InvalidArgument, "folds must be at least 2");
    const auto pos = static_cast<int>(std::count(y.begin(), y.end(), 1));
    const int minority = std::min(pos, static_cast<int>(y.size()) - pos);
    int k = folds;
    if (minority < folds) {
        if (minority < 2) fail(ErrorCode::DegenerateFold, "minority class too small for any two-fold split");
        k = minority;
    }
    auto splits = make_splits(stratified_folds(y, k, seed), k);
    for (const auto& s : splits) {
        if (!has_both(y, s.test) || !has_both(y, s.train)) {
            fail(ErrorCode::DegenerateFold, "stratified split left a fold without both classes");
        }
    }
    return splits;
}

class Smo {
public:
    Smo(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec, const SmoOptions& opt)
        : n_(X.rows()), y_(y), spec_(spec), opt_(opt), rng_(opt.seed) {
        const Eigen::MatrixXd Xt = X.transpose();
        K_.resize(n_, n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                K_(i, j) = K_(j, i) = kernel_raw(spec, Xt.col(i).data(), Xt.col(j).data(), Xt.rows());
            }
        }
        alpha_.assign(static_cast<std::size_t>(n_), 0.0);
        // with alpha = 0 and bias = 0, f = 0 everywhere
        E_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index i = 0; i < n_; ++i) E_[static_cast<std::size_t>(i)] = -y_[static_cast<std::size_t>(i)];
    }

    void run(SmoResult& out) {
        if (opt_.record_objective) out.objective_trace.push_back(0.0);
        int changed = 0;
        bool examine_all = true;
        int passes = 0;
        while ((changed > 0 || examine_all) && passes < opt_.max_passes) {
            changed = 0;
            for (Eigen::Index i = 0; i < n_; ++i) {
                if (examine_all || free(i)) changed += examine(i, out);
            }
            ++passes;
            if (examine_all) {
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        out.converged = !(changed > 0 || examine_all);
        out.passes = passes;
    }

    const std::vector<double>& alphas() const { return alpha_; }
    double bias() const { return bias_; }
    const Eigen::MatrixXd& gram() const { return K_; }

private:
    bool free(Eigen::Index i) const {
        const double a = alpha_[static_cast<std::size_t>(i)];
        return a > 0.0 && a < spec_.C;
    }

    double E(Eigen::Index i) const { return E_[static_cast<std::size_t>(i)]; }
    int Y(Eigen::Index i) const { return y_[static_cast<std::size_t>(i)]; }

    int examine(Eigen::Index i2, SmoResult& out) {
        const double a2 = alpha_[static_cast<std::size_t>(i2)];
        const double r2 = E(i2) * Y(i2);
        if (!((r2 < -opt_.tol && a2 < spec_.C) || (r2 > opt_.tol && a2 > 0.0))) return 0;

        // second choice: largest |E1 - E2| among free multipliers
        Eigen::Index best = -1;
        double gap = -1.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (i == i2 || !free(i)) continue;
            const double g = std::abs(E(i) - E(i2));
            if (g > gap) {
                gap = g;
                best = i;
            }
        }
        if (best >= 0 && step(best, i2, out)) return 1;

        std::uniform_int_distribution<Eigen::Index> start(0, n_ - 1);
        const Eigen::Index s1 = start(rng_);
        for (Eigen::Index k = 0; k < n_; ++k) {
            const Eigen::Index i1 = (s1 + k) % n_;
            if (free(i1) && step(i1, i2, out)) return 1;
        }
        const Eigen::Index s2 = start(rng_);
        for (Eigen::Index k = 0; k < n_; ++k) {
            const Eigen::Index i1 = (s2 + k) % n_;
            if (!free(i1) && step(i1, i2, out)) return 1;
        }
        return 0;
    }

    bool step(Eigen::Index i1, Eigen::Index i2, SmoResult& out) {
        if (i1 == i2) return false;
        const double C = spec_.C;
        const double a1 = alpha_[static_cast<std::size_t>(i1)];
        const double a2 = alpha_[static_cast<std::size_t>(i2)];
        const int y1 = Y(i1);
        const int y2 = Y(i2);
        const double E1 = E(i1);
        const double E2 = E(i2);
        const int s = y1 * y2;
        double L;
        double H;
        if (y1 != y2) {
            L = std::max(0.0, a2 - a1);
            H = std::min(C, C + a2 - a1);
        } else {
            L = std::max(0.0, a1 + a2 - C);
            H = std::min(C, a1 + a2);
        }
        if (H - L <= 1e-14 * C) return false;

        // along a2 += t, a1 -= s t the dual gains y2 (E1 - E2) t - eta t^2 / 2
        const double eta = K_(i1, i1) + K_(i2, i2) - 2.0 * K_(i1, i2);
        const double slope = y2 * (E1 - E2);
        auto gain = [&](double t) { return slope * t - 0.5 * eta * t * t; };
        double n2;
        if (eta > 0.0) {
            n2 = std::clamp(a2 + slope / eta, L, H);
        } else {
            const double gl = gain(L - a2);
            const double gh = gain(H - a2);
            if (gl > gh + 1e-12) {
                n2 = L;
            } else if (gh > gl + 1e-12) {
                n2 = H;
            } else {
                return false;
            }
        }
        if (n2 < 1e-12 * C) n2 = 0.0;
        if (n2 > C * (1.0 - 1e-12)) n2 = C;
        if (std::abs(n2 - a2) < 1e-12 * (n2 + a2 + 1e-12)) return false;

        double n1 = a1 + s * (a2 - n2);
        if (n1 < 1e-12 * C) n1 = 0.0;
        if (n1 > C * (1.0 - 1e-12)) n1 = C;

        const double d1 = y1 * (n1 - a1);
        const double d2 = y2 * (n2 - a2);
        // each candidate zeroes the new error of its own index
        const double b1 = bias_ - E1 - d1 * K_(i1, i1) - d2 * K_(i1, i2);
        const double b2 = bias_ - E2 - d1 * K_(i1, i2) - d2 * K_(i2, i2);
        double nb;
        if (n1 > 0.0 && n1 < C) {
            nb = b1;
        } else if (n2 > 0.0 && n2 < C) {
            nb = b2;
        } else {
            nb = 0.5 * (b1 + b2);
        }
        const double db = nb - bias_;
        for (Eigen::Index i = 0; i < n_; ++i) {
            E_[static_cast<std::size_t>(i)] += d1 * K_(i1, i) + d2 * K_(i2, i) + db;
        }
        alpha_[static_cast<std::size_t>(i1)] = n1;
        alpha_[static_cast<std::size_t>(i2)] = n2;
        bias_ = nb;
        if (opt_.record_objective) out.objective_trace.push_back(objective());
        return true;
    }

public:
    double objective() const {
        double lin = 0.0;
        double quad = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double ai = alpha_[static_cast<std::size_t>(i)];
            if (ai == 0.0) continue;
            lin += ai;
            for (Eigen::Index j = 0; j < n_; ++j) {
                const double aj = alpha_[static_cast<std::size_t>(j)];
                if (aj != 0.0) quad += Y(i) * Y(j) * ai * aj * K_(i, j);
            }
        }
        return lin - 0.5 * quad;
    }

private:
    Eigen::Index n_;
    const std::vector<int>& y_;
    KernelSpec spec_;
    SmoOptions opt_;
    std::mt19937_64 rng_;
    Eigen::MatrixXd K_;
    std::vector<double> alpha_;
    std::vector<double> E_;
    double bias_ = 0.0;
};

/// The bias minimizing the largest KKT violation for fixed multipliers: each
/// row bounds the bias from one side, so the optimum is the midpoint of the
/// tightest lower and upper bounds.
double best_bias(const Eigen::MatrixXd& K, const std::vector<int>& y, const std::vector<double>& alpha, double C,
                 double fallback) {
    const auto n = static_cast<Eigen::Index>(y.size());
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double g = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double aj = alpha[static_cast<std::size_t>(j)];
            if (aj != 0.0) g += aj * y[static_cast<std::size_t>(j)] * K(i, j);
        }
        const int yi = y[static_cast<std::size_t>(i)];
        const double a = alpha[static_cast<std::size_t>(i)];
        // y_i (g + b) >= 1 unless a == C; <= 1 unless a == 0
        const double edge = yi - g;  // bias at which y_i f_i = 1
        const bool raise = yi > 0;     // larger bias raises y_i f_i
        if (a < C) {
            if (raise) {
                lo = std::max(lo, edge);
            } else {
                hi = std::min(hi, edge);
            }
        }
        if (a > 0.0) {
            if (raise) {
                hi = std::min(hi, edge);
            } else {
                lo = std::max(lo, edge);
            }
        }
    }
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return std::max(lo, fallback);
    if (std::isfinite(hi)) return std::min(hi, fallback);
    return fallback;
}

double sigmoid_eval(const Sigmoid& s, double f) {
    const double z = s.a * f + s.b;
    return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

const char* kind_name(KernelKind k) { return k == KernelKind::Rbf ? "rbf" : "poly"; }

}  // namespace

void validate(const KernelSpec& spec) {
    if (!(spec.C > 0.0) || !std::isfinite(spec.C)) fail(ErrorCode::ConfigError, "C must be positive");
    if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) fail(ErrorCode::ConfigError, "gamma must be positive");
    if (spec.degree < 1) fail(ErrorCode::ConfigError, "degree must be at least 1");
    if (!std::isfinite(spec.coef0)) fail(ErrorCode::ConfigError, "coef0 must be finite");
}

std::string describe(const KernelSpec& spec) {
    std::ostringstream os;
    os << kind_name(spec.kind) << "(C=" << spec.C << ", gamma=" << spec.gamma;
    if (spec.kind == KernelKind::Poly) os << ", degree=" << spec.degree;
    os << ')';
    return os.str();
}

double kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) fail(ErrorCode::WrongDimension, "kernel arguments differ in dimension");
    return kernel_raw(spec, a.data(), b.data(), a.size());
}

SmoResult smo_train(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                    const SmoOptions& options) {
    validate(spec);
    check_labels(X, y);
    if (!(options.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be positive");
    if (options.max_passes < 1) fail(ErrorCode::InvalidArgument, "max_passes must be at least 1");

    SmoResult out;
    Smo smo(X, y, spec, options);
    smo.run(out);
    out.alphas = smo.alphas();
    out.objective = smo.objective();

    SvmModel& m = out.model;
    m.spec = spec;
    m.bias = best_bias(smo.gram(), y, out.alphas, spec.C, smo.bias());
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < out.alphas.size(); ++i) {
        if (out.alphas[i] > 0.0) sv.push_back(i);
    }
    m.support_vectors = take_rows(X, sv);
    m.coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) m.coef[static_cast<Eigen::Index>(k)] = out.alphas[sv[k]] * y[sv[k]];
    return out;
}

double decision(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.dimension()) {
        fail(ErrorCode::WrongDimension, "expected " + std::to_string(model.dimension()) + " features, got " +
                                            std::to_string(x.size()));
    }
    const Eigen::VectorXd xv = x;
    double f = model.bias;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        const Eigen::VectorXd sv = model.support_vectors.row(i).transpose();
        f += model.coef[i] * kernel_raw(model.spec, sv.data(), xv.data(), xv.size());
    }
    return f;
}

double dual_objective(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec,
                      const std::vector<double>& alphas) {
    if (alphas.size() != y.size() || static_cast<std::size_t>(X.rows()) != y.size()) {
        fail(ErrorCode::InvalidArgument, "alphas, labels and rows differ in count");
    }
    const Eigen::MatrixXd Xt = X.transpose();
    double lin = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        lin += alphas[i];
        for (std::size_t j = 0; j < y.size(); ++j) {
            quad += y[i] * y[j] * alphas[i] * alphas[j] *
                    kernel_raw(spec, Xt.col(static_cast<Eigen::Index>(i)).data(),
                               Xt.col(static_cast<Eigen::Index>(j)).data(), Xt.rows());
        }
    }
    return lin - 0.5 * quad;
}

double kkt_residual(const Eigen::MatrixXd& X, const std::vector<int>& y, const SvmModel& model,
                    const std::vector<double>& alphas) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double m = y[k] * decision(model, X.row(i).transpose());
        double v;
        if (alphas[k] <= 0.0) {
            v = std::max(0.0, 1.0 - m);
        } else if (alphas[k] >= model.spec.C) {
            v = std::max(0.0, m - 1.0);
        } else {
            v = std::abs(m - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double accuracy(const SvmModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y) {
    if (y.empty()) return 0.0;
    std::size_t hit = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int pred = decision(model, X.row(i).transpose()) >= 0.0 ? 1 : -1;
        if (pred == y[static_cast<std::size_t>(i)]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed) {
    if (folds < 2 || static_cast<std::size_t>(folds) > y.size()) {
        fail(ErrorCode::InvalidArgument, "folds must lie in [2, number of rows]");
    }
    std::vector<int> out(y.size(), 0);
    // each class is shuffled by its own engine so relabelling the classes
    // leaves the assignment unchanged
    for (int label : {1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == label) idx.push_back(i);
        }
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t p = 0; p < idx.size(); ++p) out[idx[p]] = static_cast<int>(p % static_cast<std::size_t>(folds));
    }
    return out;
}

GridResult grid_search(const Eigen::MatrixXd& X, const std::vector<int>& y, const Grid& grid, int folds,
                       std::uint64_t seed, const SmoOptions& smo) {
    check_labels(X, y);
    if (folds < 2) fail(ErrorCode::InvalidArgument, "folds must be at least 2");
    if (grid.C.empty() || grid.gamma.empty() || grid.kinds.empty()) fail(ErrorCode::ConfigError, "empty grid axis");

    GridResult res;
    for (KernelKind kind : grid.kinds) {
        for (double C : grid.C) {
            for (double g : grid.gamma) {
                if (kind == KernelKind::Rbf) {
                    res.cells.push_back({KernelSpec{kind, C, g, 3, 1.0}, 0.0, false, {}});
                } else {
                    if (grid.degree.empty()) fail(ErrorCode::ConfigError, "empty degree axis for poly kernel");
                    for (int d : grid.degree) res.cells.push_back({KernelSpec{kind, C, g, d, 1.0}, 0.0, false, {}});
                }
            }
        }
    }
    const auto splits = make_splits(stratified_folds(y, folds, seed), folds);

    detail::parallel_for(res.cells.size(), [&](std::size_t c) {
        GridCell& cell = res.cells[c];
        try {
            validate(cell.spec);
            double sum = 0.0;
            for (const auto& s : splits) {
                const auto m = smo_train(take_rows(X, s.train), take(y, s.train), cell.spec, smo).model;
                sum += accuracy(m, take_rows(X, s.test), take(y, s.test));
            }
            cell.mean_accuracy = sum / static_cast<double>(splits.size());
        } catch (const Error& e) {
            cell.skipped = true;
            cell.warning = describe(cell.spec) + ": " + e.what();
        }
    });

    const GridCell* best = nullptr;
    auto better = [](const GridCell& a, const GridCell& b) {
        if (std::abs(a.mean_accuracy - b.mean_accuracy) > 1e-12) return a.mean_accuracy > b.mean_accuracy;
        if (a.spec.C != b.spec.C) return a.spec.C < b.spec.C;
        if (a.spec.gamma != b.spec.gamma) return a.spec.gamma < b.spec.gamma;
        if (a.spec.kind != b.spec.kind) return a.spec.kind == KernelKind::Rbf;
        return a.spec.kind == KernelKind::Poly && a.spec.degree < b.spec.degree;
    };
    for (const auto& cell : res.cells) {
        if (!cell.skipped && (best == nullptr || better(cell, *best))) best = &cell;
    }
    if (best == nullptr) fail(ErrorCode::ConfigError, "no grid cell could be trained");
    res.best = best->spec;
    res.best_accuracy = best->mean_accuracy;
    return res;
}

Sigmoid fit_sigmoid(const std::vector<double>& f, const std::vector<int>& y) {
    if (f.size() != y.size() || f.empty()) fail(ErrorCode::InvalidArgument, "sigmoid fit needs matching, non-empty inputs");
    double prior1 = 0.0;
    double prior0 = 0.0;
    for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] > 0 ? hi : lo;

    const int max_iter = 100;
    const double min_step = 1e-10;
    const double sigma = 1e-12;
    const double eps = 1e-5;
    double A = 0.0;
    double B = std::log((prior0 + 1.0) / (prior1 + 1.0));

    auto objective = [&](double a, double b) {
        double v = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double z = f[i] * a + b;
            v += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return v;
    };
    double fval = objective(A, B);
    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma;
        double h22 = sigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double z = f[i] * A + B;
            double p;
            double q;
            if (z >= 0.0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += f[i] * f[i] * d2;
            h22 += d2;
            h21 += f[i] * d2;
            const double d1 = t[i] - p;
            g1 += f[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;
        double step = 1.0;
        bool moved = false;
        while (step >= min_step) {
            const double nA = A + step * dA;
            const double nB = B + step * dB;
            const double nf = objective(nA, nB);
            if (nf < fval + 0.0001 * step * gd) {
                A = nA;
                B = nB;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if (!moved) break;
    }
    return {A, B};
}

SvmModel calibrate(SvmModel model, const Eigen::MatrixXd& X, const std::vector<int>& y, int folds, std::uint64_t seed,
                   const SmoOptions& smo) {
    check_labels(X, y);
    const auto splits = calibration_splits(y, folds, seed);
    std::vector<Sigmoid> members(splits.size());
    detail::parallel_for(splits.size(), [&](std::size_t k) {
        const auto& s = splits[k];
        const auto m = smo_train(take_rows(X, s.train), take(y, s.train), model.spec, smo).model;
        std::vector<double> f;
        f.reserve(s.test.size());
        for (auto r : s.test) f.push_back(decision(m, X.row(static_cast<Eigen::Index>(r)).transpose()));
        members[k] = fit_sigmoid(f, take(y, s.test));
    });
    model.calibration = std::move(members);
    return model;
}

SvmModel train_calibrated(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec, int folds,
                          std::uint64_t seed, const SmoOptions& smo) {
    return calibrate(smo_train(X, y, spec, smo).model, X, y, folds, seed, smo);
}

double predict_proba(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (!model.calibrated()) fail(ErrorCode::InvalidArgument, "model is not calibrated");
    const double f = decision(model, x);
    double p = 0.0;
    for (const auto& s : model.calibration) p += sigmoid_eval(s, f);
    p /= static_cast<double>(model.calibration.size());
    // strictly inside (0, 1) even when every member saturates
    return std::clamp(p, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

std::vector<double> predict_proba_batch(const SvmModel& model, const Eigen::MatrixXd& X) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(predict_proba(model, X.row(i).transpose()));
    return out;
}

double cross_validated_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& y, const KernelSpec& spec, int folds,
                                std::uint64_t seed, const SmoOptions& smo) {
    check_labels(X, y);
    const auto splits = calibration_splits(y, folds, seed);
    std::vector<double> acc(splits.size());
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const auto& s = splits[k];
        const auto m = train_calibrated(take_rows(X, s.train), take(y, s.train), spec, folds, seed, smo);
        std::size_t hit = 0;
        for (auto r : s.test) {
            const int pred = predict_proba(m, X.row(static_cast<Eigen::Index>(r)).transpose()) >= 0.5 ? 1 : -1;
            if (pred == y[r]) ++hit;
        }
        acc[k] = static_cast<double>(hit) / static_cast<double>(s.test.size());
    }
    return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}

// ---------------------------------------------------------------------------

namespace {
constexpr const char* kFormat = "trustscreen-svm";
constexpr int kVersion = 1;
}  // namespace

std::string model_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["spec"] = {{"kind", kind_name(model.spec.kind)},
                 {"C", model.spec.C},
                 {"gamma", model.spec.gamma},
                 {"degree", model.spec.degree},
                 {"coef0", model.spec.coef0}};
    j["dimension"] = model.dimension();
    auto svs = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < model.support_vectors.cols(); ++k) row.push_back(model.support_vectors(i, k));
        svs.push_back(std::move(row));
    }
    j["support_vectors"] = std::move(svs);
    j["alphas"] = std::vector<double>(model.coef.data(), model.coef.data() + model.coef.size());
    j["bias"] = model.bias;
    auto cal = nlohmann::json::array();
    for (const auto& s : model.calibration) cal.push_back({{"a", s.a}, {"b", s.b}});
    j["calibration"] = std::move(cal);
    return j.dump(1);
}

SvmModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format").get<std::string>() != kFormat) fail(ErrorCode::MalformedModelFile, "not an SVM model file");
        if (j.at("version").get<int>() != kVersion) fail(ErrorCode::MalformedModelFile, "unsupported model version");
        SvmModel m;
        const auto& s = j.at("spec");
        const auto kind = s.at("kind").get<std::string>();
        if (kind != "rbf" && kind != "poly") fail(ErrorCode::MalformedModelFile, "unknown kernel kind " + kind);
        m.spec.kind = kind == "rbf" ? KernelKind::Rbf : KernelKind::Poly;
        m.spec.C = s.at("C").get<double>();
        m.spec.gamma = s.at("gamma").get<double>();
        m.spec.degree = s.at("degree").get<int>();
        m.spec.coef0 = s.at("coef0").get<double>();
        validate(m.spec);
        const auto dim = j.at("dimension").get<Eigen::Index>();
        const auto& svs = j.at("support_vectors");
        const auto alphas = j.at("alphas").get<std::vector<double>>();
        if (dim < 1 || svs.size() != alphas.size()) fail(ErrorCode::MalformedModelFile, "inconsistent model sizes");
        m.support_vectors.resize(static_cast<Eigen::Index>(svs.size()), dim);
        for (std::size_t i = 0; i < svs.size(); ++i) {
            const auto row = svs[i].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != dim) fail(ErrorCode::MalformedModelFile, "support vector width");
            for (Eigen::Index k = 0; k < dim; ++k) m.support_vectors(static_cast<Eigen::Index>(i), k) = row[static_cast<std::size_t>(k)];
        }
        m.coef = Eigen::Map<const Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
        m.bias = j.at("bias").get<double>();
        for (const auto& c : j.at("calibration")) m.calibration.push_back({c.at("a").get<double>(), c.at("b").get<double>()});
        return m;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedModelFile) throw;
        fail(ErrorCode::MalformedModelFile, e.what());
    } catch (const std::exception& e) {
        fail(ErrorCode::MalformedModelFile, std::string("model file: ") + e.what());
    }
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << model_to_json(model) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace trustscreen::learn
