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
#include "trustscreen/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace trustscreen::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

json prf_json(const PrfSet& p) {
    return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}, {"f0_5", p.f0_5}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double den = b2 * precision + recall;
    return den == 0.0 ? 0.0 : (1.0 + b2) * precision * recall / den;
}

PrfSet prf(double precision, double recall) {
    return {precision, recall, f_beta(precision, recall, 1.0), f_beta(precision, recall, 0.5)};
}

ConfusionMatrix confusion(const std::vector<Label>& gold, const std::vector<bool>& predicted_reliable) {
    if (gold.size() != predicted_reliable.size()) {
        fail(ErrorCode::InvalidArgument, "gold labels and predictions differ in length");
    }
    ConfusionMatrix c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool truth = gold[i] == Label::Reliable;
        const bool pred = predicted_reliable[i];
        if (truth && pred) ++c.tp;
        else if (!truth && pred) ++c.fp;
        else if (!truth && !pred) ++c.tn;
        else ++c.fn;
    }
    return c;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& c) {
    if (c.total() == 0) fail(ErrorCode::NoLabels, "no labeled records");
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    MetricsReport m;
    m.confusion = c;
    m.reliable = prf(safe_div(tp, tp + fp), safe_div(tp, tp + fn));
    m.unreliable = prf(safe_div(tn, tn + fn), safe_div(tn, tn + fp));
    // True-class support shares.
    const double n = tp + fp + tn + fn;
    const double wr = (tp + fn) / n;
    const double wu = (tn + fp) / n;
    m.weighted.precision = wr * m.reliable.precision + wu * m.unreliable.precision;
    m.weighted.recall = wr * m.reliable.recall + wu * m.unreliable.recall;
    m.weighted.f1 = wr * m.reliable.f1 + wu * m.unreliable.f1;
    m.weighted.f0_5 = wr * m.reliable.f0_5 + wu * m.unreliable.f0_5;
    return m;
}

MetricsReport compute_metrics(const std::vector<Label>& gold, const std::vector<bool>& predicted_reliable) {
    if (gold.empty()) fail(ErrorCode::NoLabels, "no labeled records");
    return metrics_from_confusion(confusion(gold, predicted_reliable));
}

std::vector<bool> baseline(std::size_t n) { return std::vector<bool>(n, false); }

std::vector<Label> labels_from_counts(std::size_t reliable, std::size_t unreliable) {
    std::vector<Label> out(reliable, Label::Reliable);
    out.insert(out.end(), unreliable, Label::Unreliable);
    return out;
}

namespace {

json metrics_json(const MetricsReport& m) {
    const auto& c = m.confusion;
    return json{{"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}},
                {"per_class", {{"reliable", prf_json(m.reliable)}, {"unreliable", prf_json(m.unreliable)}}},
                {"weighted", prf_json(m.weighted)}};
}

}  // namespace

std::string metrics_to_json(const MetricsReport& m, int indent) { return metrics_json(m).dump(indent); }

// ---------------------------------------------------------------------------
// Combination grid

namespace {

enum Member : unsigned { kF = 1, kN = 2, kA = 4, kS = 8 };

struct Combination {
    unsigned members = 0;
    filters::ConsensusMode mode = filters::ConsensusMode::Recall;
    std::string name;
};

std::vector<Combination> combinations() {
    std::vector<Combination> out;
    for (int size = 1; size <= 4; ++size) {
        // Masks of one size in F, N, A, S lexicographic order.
        std::vector<unsigned> masks;
        for (unsigned m = 1; m < 16; ++m) {
            if (std::popcount(m) == size) masks.push_back(m);
        }
        std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
            for (unsigned bit = 1; bit < 16; bit <<= 1) {
                if ((a & bit) != (b & bit)) return (a & bit) != 0;
            }
            return false;
        });
        for (unsigned m : masks) {
            const int modes = (m & kN) ? 2 : 1;
            for (int k = 0; k < modes; ++k) {
                Combination c;
                c.members = m;
                c.mode = k == 0 ? filters::ConsensusMode::Recall : filters::ConsensusMode::Precision;
                std::string name;
                auto add = [&](const char* part) {
                    if (!name.empty()) name += '+';
                    name += part;
                };
                if (m & kF) add("F");
                if (m & kN) add(k == 0 ? "N(R)" : "N(P)");
                if (m & kA) add("A");
                if (m & kS) add("S");
                c.name = name;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

}  // namespace

std::vector<GridRow> combination_grid(const std::vector<Label>& gold, const ComponentFlags& flags) {
    const std::size_t n = gold.size();
    for (const auto* v : {&flags.feature, &flags.neural_recall, &flags.neural_precision, &flags.argumentation,
                          &flags.subjectivity}) {
        if (v->size() != n) fail(ErrorCode::InvalidArgument, "component flags and gold labels differ in length");
    }
    const auto combos = combinations();
    std::vector<GridRow> rows(combos.size() + 1);
    rows[0].name = "Baseline";
    rows[0].predicted = baseline(n);
    rows[0].metrics = compute_metrics(gold, rows[0].predicted);
    detail::parallel_for(combos.size(), [&](std::size_t i) {
        const auto& c = combos[i];
        const auto& neural = c.mode == filters::ConsensusMode::Recall ? flags.neural_recall : flags.neural_precision;
        std::vector<bool> pred(n, true);
        for (std::size_t r = 0; r < n; ++r) {
            bool ok = true;
            if (c.members & kF) ok = ok && flags.feature[r];
            if (c.members & kN) ok = ok && neural[r];
            if (c.members & kA) ok = ok && flags.argumentation[r];
            if (c.members & kS) ok = ok && flags.subjectivity[r];
            pred[r] = ok;
        }
        auto& row = rows[i + 1];
        row.name = c.name;
        row.metrics = compute_metrics(gold, pred);
        row.predicted = std::move(pred);
    });
    return rows;
}

ComponentFlags component_flags(const std::vector<filters::ReliabilityRecord>& records) {
    ComponentFlags f;
    for (const auto& r : records) {
        if (!r.feature_filter || !r.neural_filter || !r.arg_filter || !r.subj_filter) {
            fail(ErrorCode::InvalidArgument, "record " + r.id + " lacks a filter outcome; the grid needs all four");
        }
        f.feature.push_back(*r.feature_filter);
        f.neural_recall.push_back(r.neural_filter->verdict != filters::Verdict::Synthetic);
        f.neural_precision.push_back(r.neural_filter->verdict == filters::Verdict::Human);
        f.argumentation.push_back(*r.arg_filter);
        f.subjectivity.push_back(*r.subj_filter);
    }
    return f;
}

std::string grid_to_csv(const std::vector<GridRow>& rows) {
    std::ostringstream out;
    out << "combination,tp,fp,tn,fn,neg_precision,neg_recall,neg_f1,neg_f0_5,"
           "pos_precision,pos_recall,pos_f1,pos_f0_5,w_precision,w_recall,w_f1,w_f0_5\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out << r.name << ',' << m.confusion.tp << ',' << m.confusion.fp << ',' << m.confusion.tn << ','
            << m.confusion.fn;
        for (const auto* p : {&m.unreliable, &m.reliable, &m.weighted}) {
            out << ',' << num(p->precision) << ',' << num(p->recall) << ',' << num(p->f1) << ',' << num(p->f0_5);
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Threshold sweep

SweepResult threshold_sweep(const std::vector<Label>& gold, const std::vector<std::optional<double>>& roberta_real,
                            const std::vector<double>& gltr_fake, const filters::ConsensusConfig& base, int steps) {
    if (steps < 1) fail(ErrorCode::ConfigError, "sweep needs at least one step");
    if (gold.size() != roberta_real.size() || gold.size() != gltr_fake.size()) {
        fail(ErrorCode::InvalidArgument, "sweep inputs differ in length");
    }
    SweepResult s;
    s.rows.resize(static_cast<std::size_t>(steps) + 1);
    detail::parallel_for(s.rows.size(), [&](std::size_t i) {
        filters::ConsensusConfig cfg = base;
        const double t = static_cast<double>(i) / steps;
        cfg.roberta_real_hi = t;
        cfg.roberta_fake_hi = t;
        std::vector<bool> pred(gold.size());
        for (std::size_t r = 0; r < gold.size(); ++r) {
            pred[r] = filters::synthetic_consensus(roberta_real[r], gltr_fake[r], cfg).flag;
        }
        const auto m = compute_metrics(gold, pred);
        s.rows[i] = SweepRow{t, m.unreliable, m.weighted};
    });
    const std::pair<const char*, std::function<double(const SweepRow&)>> columns[] = {
        {"neg_precision", [](const SweepRow& r) { return r.negative.precision; }},
        {"neg_recall", [](const SweepRow& r) { return r.negative.recall; }},
        {"neg_f1", [](const SweepRow& r) { return r.negative.f1; }},
        {"neg_f0_5", [](const SweepRow& r) { return r.negative.f0_5; }},
        {"w_precision", [](const SweepRow& r) { return r.weighted.precision; }},
        {"w_recall", [](const SweepRow& r) { return r.weighted.recall; }},
        {"w_f1", [](const SweepRow& r) { return r.weighted.f1; }},
        {"w_f0_5", [](const SweepRow& r) { return r.weighted.f0_5; }},
    };
    for (const auto& [name, get] : columns) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < s.rows.size(); ++i) {
            if (get(s.rows[i]) > get(s.rows[best])) best = i;  // strict: ties keep the smaller threshold
        }
        s.argmax[name] = s.rows[best].threshold;
    }
    return s;
}

std::string sweep_to_csv(const SweepResult& s) {
    std::ostringstream out;
    out << kSweepHeader << '\n';
    for (const auto& r : s.rows) {
        char t[16];
        std::snprintf(t, sizeof t, "%.2f", r.threshold);
        out << t;
        for (const auto* p : {&r.negative, &r.weighted}) {
            out << ',' << num(p->precision) << ',' << num(p->recall) << ',' << num(p->f1) << ',' << num(p->f0_5);
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Detector training

DetectorTraining train_detector(const std::vector<Tweet>& human, const DetectorOptions& o, std::uint64_t seed) {
    if (human.size() < o.train_size + 10) {
        fail(ErrorCode::EmptyCorpus, "detector training needs at least " + std::to_string(o.train_size + 10) +
                                         " human tweets, got " + std::to_string(human.size()));
    }
    std::vector<lm::TokenList> lm_docs;
    std::vector<lm::TokenList> held;
    for (std::size_t i = 0; i < human.size(); ++i) {
        auto toks = lm::lm_tokens(human[i].text);
        if (i < o.train_size) {
            lm_docs.push_back(std::move(toks));
        } else if (!toks.empty()) {
            held.push_back(std::move(toks));
        }
    }
    const auto generator = lm::NgramLm::train(lm_docs, o.generator_order, o.generator_add_k);
    lm::SampleOptions sampling = o.sampling;
    sampling.seed = seed;
    const auto synthetic = lm::generate_synthetic_set(generator, held, sampling);

    DetectorTraining out;
    out.human_rows = held.size();
    out.synthetic_rows = synthetic.size();
    const std::size_t rows = held.size() + synthetic.size();

    for (std::size_t c = 0; c < 2; ++c) {
        auto scorer = lm::NgramLm::train(lm_docs, o.scorer_orders[c], o.scorer_add_k);
        Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), 10);
        std::vector<int> y(rows);
        double human_top = 0.0;
        double synth_top = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const bool is_human = i < held.size();
            const auto& toks = is_human ? held[i] : synthetic[i - held.size()];
            const auto scores = lm::score_tokens(scorer, toks);
            const auto row = filters::frac_features(scores);
            X.row(static_cast<Eigen::Index>(i)) = row.transpose();
            y[i] = is_human ? 1 : -1;
            (is_human ? human_top : synth_top) += 100.0 * row(9);
        }
        auto& rep = out.channels[c];
        rep.human_top_bin = human_top / static_cast<double>(held.size());
        rep.synthetic_top_bin = synthetic.empty() ? 0.0 : synth_top / static_cast<double>(synthetic.size());
        const auto grid = learn::grid_search(X, y, o.grid, o.folds, seed);
        rep.spec = grid.best;
        rep.grid_accuracy = grid.best_accuracy;
        rep.cv_accuracy = learn::cross_validated_accuracy(X, y, grid.best, o.folds, seed);
        out.bundle.channels[c] = filters::DetectorChannel{std::move(scorer),
                                                          learn::train_calibrated(X, y, grid.best, o.folds, seed)};
    }
    return out;
}

std::string detector_report_json(const DetectorTraining& t) {
    json channels = json::array();
    for (const auto& c : t.channels) {
        channels.push_back({{"kernel", learn::describe(c.spec)},
                            {"grid_accuracy", c.grid_accuracy},
                            {"cv_accuracy", c.cv_accuracy},
                            {"human_top_bin_percent", c.human_top_bin},
                            {"synthetic_top_bin_percent", c.synthetic_top_bin}});
    }
    return json{{"human_rows", t.human_rows}, {"synthetic_rows", t.synthetic_rows}, {"channels", channels}}.dump(2);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
    fail(ErrorCode::ConfigError, "bad value '" + value + "' for " + key + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        bad_value(key, v, "expected a number");
    }
    if (used != v.size() || !std::isfinite(d)) bad_value(key, v, "expected a number");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long i = 0;
    try {
        i = std::stoll(v, &used);
    } catch (const std::exception&) {
        bad_value(key, v, "expected an integer");
    }
    if (used != v.size()) bad_value(key, v, "expected an integer");
    return i;
}

std::size_t to_count(const std::string& key, const std::string& v) {
    const auto i = to_int(key, v);
    if (i < 0) bad_value(key, v, "must not be negative");
    return static_cast<std::size_t>(i);
}

int to_small(const std::string& key, const std::string& v) {
    const auto i = to_int(key, v);
    if (i < -1000000 || i > 1000000) bad_value(key, v, "out of range");
    return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
    const auto l = ascii_lower(v);
    if (l == "true" || l == "yes" || l == "on" || l == "1") return true;
    if (l == "false" || l == "no" || l == "off" || l == "0") return false;
    bad_value(key, v, "expected true or false");
}

std::optional<Instant> to_instant(const std::string& key, const std::string& v) {
    if (v.empty() || ascii_lower(v) == "none") return std::nullopt;
    auto t = parse_instant(v);
    if (!t) bad_value(key, v, "expected an ISO date or timestamp");
    return t;
}

fs::path to_path(const std::string& v, const fs::path& base) {
    if (v.empty()) return {};
    fs::path p(v);
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const fs::path&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"data.prices", [](auto& c, auto& v, auto& b) { c.prices = to_path(v, b); }},
        {"data.symbols", [](auto& c, auto& v, auto& b) { c.symbols = to_path(v, b); }},
        {"data.corpus", [](auto& c, auto& v, auto& b) { c.corpus = to_path(v, b); }},
        {"data.labels", [](auto& c, auto& v, auto& b) { c.labels = to_path(v, b); }},
        {"data.sidecar", [](auto& c, auto& v, auto& b) { c.sidecar = to_path(v, b); }},
        {"data.lexicons", [](auto& c, auto& v, auto& b) { c.lexicons = to_path(v, b); }},
        {"data.human_corpus", [](auto& c, auto& v, auto& b) { c.human_corpus = to_path(v, b); }},
        {"data.profanity_model", [](auto& c, auto& v, auto& b) { c.profanity_model = to_path(v, b); }},
        {"detector.bundle", [](auto& c, auto& v, auto& b) { c.detector_bundle = to_path(v, b); }},
        {"output.dir", [](auto& c, auto& v, auto&) { c.output_dir = v; }},
        {"symbol",
         [](auto& c, auto& v, auto&) {
             if (v.empty()) bad_value("symbol", v, "must not be empty");
             c.symbol = v;
         }},
        {"anomaly.method",
         [](auto& c, auto& v, auto&) {
             const auto l = ascii_lower(v);
             if (l != "arima" && l != "lof" && l != "iforest") bad_value("anomaly.method", v, "arima, lof or iforest");
             c.anomaly_method = l;
         }},
        {"anomaly.window",
         [](auto& c, auto& v, auto&) {
             c.anomaly_window = to_count("anomaly.window", v);
             if (c.anomaly_window < 2) bad_value("anomaly.window", v, "needs at least 2");
         }},
        {"anomaly.from", [](auto& c, auto& v, auto&) { c.anomaly_from = to_instant("anomaly.from", v); }},
        {"anomaly.to", [](auto& c, auto& v, auto&) { c.anomaly_to = to_instant("anomaly.to", v); }},
        {"anomaly.min_severity",
         [](auto& c, auto& v, auto&) {
             c.anomaly_min_severity = to_small("anomaly.min_severity", v);
             if (c.anomaly_min_severity < 1 || c.anomaly_min_severity > 3) {
                 bad_value("anomaly.min_severity", v, "between 1 and 3");
             }
         }},
        {"anomaly.p_max", [](auto& c, auto& v, auto&) { c.arima_caps.p_max = to_small("anomaly.p_max", v); }},
        {"anomaly.q_max", [](auto& c, auto& v, auto&) { c.arima_caps.q_max = to_small("anomaly.q_max", v); }},
        {"anomaly.d_max", [](auto& c, auto& v, auto&) { c.arima_caps.d_max = to_small("anomaly.d_max", v); }},
        {"anomaly.lof_k", [](auto& c, auto& v, auto&) { c.lof_k = to_count("anomaly.lof_k", v); }},
        {"anomaly.trees", [](auto& c, auto& v, auto&) { c.iforest.trees = to_count("anomaly.trees", v); }},
        {"anomaly.subsample",
         [](auto& c, auto& v, auto&) { c.iforest.subsample = to_count("anomaly.subsample", v); }},
        {"anomaly.outlier_threshold",
         [](auto& c, auto& v, auto&) { c.outlier_threshold = to_double("anomaly.outlier_threshold", v); }},
        {"query.days", [](auto& c, auto& v, auto&) { c.query_days = to_small("query.days", v); }},
        {"query.verified_only",
         [](auto& c, auto& v, auto&) { c.query_verified_only = to_bool("query.verified_only", v); }},
        {"query.allow_any_days",
         [](auto& c, auto& v, auto&) { c.query_allow_any_days = to_bool("query.allow_any_days", v); }},
        {"prf.gamma", [](auto& c, auto& v, auto&) { c.prf.gamma = to_count("prf.gamma", v); }},
        {"prf.top_k_terms", [](auto& c, auto& v, auto&) { c.prf.top_k_terms = to_count("prf.top_k_terms", v); }},
        {"prf.max_iters", [](auto& c, auto& v, auto&) { c.prf.max_iters = to_small("prf.max_iters", v); }},
        {"prf.stabilization",
         [](auto& c, auto& v, auto&) { c.prf.stabilization = to_small("prf.stabilization", v); }},
        {"prf.lambda", [](auto& c, auto& v, auto&) { c.prf.rank.lambda = to_double("prf.lambda", v); }},
        {"prf.tau_hours",
         [](auto& c, auto& v, auto&) {
             const double h = to_double("prf.tau_hours", v);
             if (h <= 0.0) bad_value("prf.tau_hours", v, "must be positive");
             c.prf.rank.tau = std::chrono::seconds(static_cast<std::int64_t>(std::llround(h * 3600.0)));
         }},
        {"prf.verified_bonus",
         [](auto& c, auto& v, auto&) { c.prf.rank.verified_bonus = to_double("prf.verified_bonus", v); }},
        {"filters.beta", [](auto& c, auto& v, auto&) { c.assess.feature.beta = to_double("filters.beta", v); }},
        {"filters.profanity_threshold",
         [](auto& c, auto& v, auto&) {
             c.assess.feature.profanity_threshold = to_double("filters.profanity_threshold", v);
         }},
        {"filters.min_account_age_days",
         [](auto& c, auto& v, auto&) {
             c.assess.feature.min_account_age_days = to_int("filters.min_account_age_days", v);
         }},
        {"filters.min_followers",
         [](auto& c, auto& v, auto&) { c.assess.feature.min_followers = to_int("filters.min_followers", v); }},
        {"filters.min_tweets",
         [](auto& c, auto& v, auto&) { c.assess.feature.min_tweets = to_int("filters.min_tweets", v); }},
        {"filters.min_retweets",
         [](auto& c, auto& v, auto&) {
             c.assess.feature.min_engagement.retweet_count = to_int("filters.min_retweets", v);
         }},
        {"filters.min_replies",
         [](auto& c, auto& v, auto&) {
             c.assess.feature.min_engagement.reply_count = to_int("filters.min_replies", v);
         }},
        {"filters.min_likes",
         [](auto& c, auto& v, auto&) { c.assess.feature.min_engagement.like_count = to_int("filters.min_likes", v); }},
        {"filters.min_quotes",
         [](auto& c, auto& v, auto&) {
             c.assess.feature.min_engagement.quote_count = to_int("filters.min_quotes", v);
         }},
        {"filters.feature",
         [](auto& c, auto& v, auto&) { c.assess.enabled.feature = to_bool("filters.feature", v); }},
        {"filters.neural", [](auto& c, auto& v, auto&) { c.assess.enabled.neural = to_bool("filters.neural", v); }},
        {"filters.argumentation",
         [](auto& c, auto& v, auto&) { c.assess.enabled.argumentation = to_bool("filters.argumentation", v); }},
        {"filters.subjectivity",
         [](auto& c, auto& v, auto&) { c.assess.enabled.subjectivity = to_bool("filters.subjectivity", v); }},
        {"neural.mode",
         [](auto& c, auto& v, auto&) {
             const auto l = ascii_lower(v);
             if (l == "recall") c.assess.consensus.mode = filters::ConsensusMode::Recall;
             else if (l == "precision") c.assess.consensus.mode = filters::ConsensusMode::Precision;
             else bad_value("neural.mode", v, "recall or precision");
         }},
        {"neural.roberta_threshold",
         [](auto& c, auto& v, auto&) {
             const double t = to_double("neural.roberta_threshold", v);
             c.assess.consensus.roberta_real_hi = t;
             c.assess.consensus.roberta_fake_hi = t;
         }},
        {"neural.roberta_real_hi",
         [](auto& c, auto& v, auto&) { c.assess.consensus.roberta_real_hi = to_double("neural.roberta_real_hi", v); }},
        {"neural.roberta_fake_hi",
         [](auto& c, auto& v, auto&) { c.assess.consensus.roberta_fake_hi = to_double("neural.roberta_fake_hi", v); }},
        {"neural.gltr_fake_lo",
         [](auto& c, auto& v, auto&) { c.assess.consensus.gltr_fake_lo = to_double("neural.gltr_fake_lo", v); }},
        {"neural.gltr_fake_hi",
         [](auto& c, auto& v, auto&) { c.assess.consensus.gltr_fake_hi = to_double("neural.gltr_fake_hi", v); }},
        {"neural.accuracies",
         [](auto& c, auto& v, auto&) {
             const auto l = to_list("neural.accuracies", v);
             if (l.size() != 3) bad_value("neural.accuracies", v, "expected three comma-separated values");
             c.assess.consensus.detector_accuracies = {l[0], l[1], l[2]};
         }},
        {"arg.mode",
         [](auto& c, auto& v, auto&) {
             const auto l = ascii_lower(v);
             if (l == "relaxed") c.assess.arg_mode = filters::ArgMode::Relaxed;
             else if (l == "strict") c.assess.arg_mode = filters::ArgMode::Strict;
             else bad_value("arg.mode", v, "relaxed or strict");
         }},
        {"subj.threshold",
         [](auto& c, auto& v, auto&) {
             c.assess.subjectivity_threshold = to_double("subj.threshold", v);
             if (c.assess.subjectivity_threshold < 0.0 || c.assess.subjectivity_threshold > 1.0) {
                 bad_value("subj.threshold", v, "must lie in [0, 1]");
             }
         }},
        {"detector.generator_order",
         [](auto& c, auto& v, auto&) { c.detector.generator_order = to_small("detector.generator_order", v); }},
        {"detector.generator_add_k",
         [](auto& c, auto& v, auto&) { c.detector.generator_add_k = to_double("detector.generator_add_k", v); }},
        {"detector.scorer_orders",
         [](auto& c, auto& v, auto&) {
             const auto l = to_list("detector.scorer_orders", v);
             if (l.size() != 2 || l[0] < 1 || l[1] < 1 || l[0] != std::floor(l[0]) || l[1] != std::floor(l[1])) {
                 bad_value("detector.scorer_orders", v, "expected two positive integers");
             }
             c.detector.scorer_orders = {static_cast<int>(l[0]), static_cast<int>(l[1])};
         }},
        {"detector.scorer_add_k",
         [](auto& c, auto& v, auto&) { c.detector.scorer_add_k = to_double("detector.scorer_add_k", v); }},
        {"detector.train_size",
         [](auto& c, auto& v, auto&) { c.detector.train_size = to_count("detector.train_size", v); }},
        {"detector.nucleus_p",
         [](auto& c, auto& v, auto&) { c.detector.sampling.nucleus_p = to_double("detector.nucleus_p", v); }},
        {"detector.temperature",
         [](auto& c, auto& v, auto&) { c.detector.sampling.temperature = to_double("detector.temperature", v); }},
        {"detector.max_len",
         [](auto& c, auto& v, auto&) { c.detector.sampling.max_len = to_count("detector.max_len", v); }},
        {"detector.folds",
         [](auto& c, auto& v, auto&) {
             c.detector.folds = to_small("detector.folds", v);
             if (c.detector.folds < 2) bad_value("detector.folds", v, "needs at least 2");
         }},
        {"sweep.step",
         [](auto& c, auto& v, auto&) {
             const double step = to_double("sweep.step", v);
             if (!(step > 0.0 && step <= 1.0)) bad_value("sweep.step", v, "must lie in (0, 1]");
             const double steps = std::round(1.0 / step);
             if (std::abs(steps * step - 1.0) > 1e-9) bad_value("sweep.step", v, "must divide 1 evenly");
             c.sweep_steps = static_cast<int>(steps);
         }},
        {"seed",
         [](auto& c, auto& v, auto&) {
             try {
                 std::size_t used = 0;
                 c.seed = std::stoull(v, &used);
                 if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 bad_value("seed", v, "expected an unsigned integer");
             }
         }},
    };
    return table;
}

}  // namespace

PipelineConfig default_config(const fs::path& data_dir) {
    PipelineConfig c;
    c.prices = data_dir / "prices" / "TWTR.csv";
    c.symbols = data_dir / "symbols.tsv";
    c.corpus = data_dir / "fixtures" / "twtr_corpus.jsonl";
    c.labels = data_dir / "fixtures" / "twtr_labeled.jsonl";
    c.sidecar = data_dir / "fixtures" / "twtr_sidecar.jsonl";
    c.lexicons = data_dir / "lexicons";
    c.human_corpus = data_dir / "fixtures" / "human_tweets.jsonl";
    return c;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value, const fs::path& base) {
    for (const auto& [name, set] : setters()) {
        if (name == key) {
            set(cfg, value, base);
            return;
        }
    }
    fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

PipelineConfig parse_config(std::istream& in, const fs::path& base_dir, PipelineConfig cfg) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            fail(ErrorCode::ConfigError, "config line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            set_config_value(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)), base_dir);
        } catch (const Error& e) {
            fail(e.code(), "config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path, PipelineConfig start) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ConfigError, "cannot read config file " + path.string());
    return parse_config(in, fs::absolute(path).parent_path(), std::move(start));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [name, set] : setters()) out.push_back(name);
    return out;
}

std::string config_to_text(const PipelineConfig& c) {
    std::ostringstream o;
    auto kv = [&](const char* k, const auto& v) { o << k << " = " << v << '\n'; };
    auto opt_time = [](const std::optional<Instant>& t) { return t ? format_instant(*t) : std::string("none"); };
    auto flag = [](bool b) { return b ? "true" : "false"; };
    const auto& f = c.assess.feature;
    const auto& n = c.assess.consensus;
    kv("data.prices", c.prices.string());
    kv("data.symbols", c.symbols.string());
    kv("data.corpus", c.corpus.string());
    kv("data.labels", c.labels.string());
    kv("data.sidecar", c.sidecar.string());
    kv("data.lexicons", c.lexicons.string());
    kv("data.human_corpus", c.human_corpus.string());
    kv("data.profanity_model", c.profanity_model.string());
    kv("detector.bundle", c.detector_bundle.string());
    kv("output.dir", c.output_dir.string());
    kv("symbol", c.symbol);
    kv("anomaly.method", c.anomaly_method);
    kv("anomaly.window", c.anomaly_window);
    kv("anomaly.from", opt_time(c.anomaly_from));
    kv("anomaly.to", opt_time(c.anomaly_to));
    kv("anomaly.min_severity", c.anomaly_min_severity);
    kv("anomaly.p_max", c.arima_caps.p_max);
    kv("anomaly.q_max", c.arima_caps.q_max);
    kv("anomaly.d_max", c.arima_caps.d_max);
    kv("anomaly.lof_k", c.lof_k);
    kv("anomaly.trees", c.iforest.trees);
    kv("anomaly.subsample", c.iforest.subsample);
    kv("anomaly.outlier_threshold", num(c.outlier_threshold));
    kv("query.days", c.query_days);
    kv("query.verified_only", flag(c.query_verified_only));
    kv("query.allow_any_days", flag(c.query_allow_any_days));
    kv("prf.gamma", c.prf.gamma);
    kv("prf.top_k_terms", c.prf.top_k_terms);
    kv("prf.max_iters", c.prf.max_iters);
    kv("prf.stabilization", c.prf.stabilization);
    kv("prf.lambda", num(c.prf.rank.lambda));
    kv("prf.tau_hours", num(static_cast<double>(c.prf.rank.tau.count()) / 3600.0));
    kv("prf.verified_bonus", num(c.prf.rank.verified_bonus));
    kv("filters.beta", num(f.beta));
    kv("filters.profanity_threshold", num(f.profanity_threshold));
    kv("filters.min_account_age_days", f.min_account_age_days);
    kv("filters.min_followers", f.min_followers);
    kv("filters.min_tweets", f.min_tweets);
    kv("filters.min_retweets", f.min_engagement.retweet_count);
    kv("filters.min_replies", f.min_engagement.reply_count);
    kv("filters.min_likes", f.min_engagement.like_count);
    kv("filters.min_quotes", f.min_engagement.quote_count);
    kv("filters.feature", flag(c.assess.enabled.feature));
    kv("filters.neural", flag(c.assess.enabled.neural));
    kv("filters.argumentation", flag(c.assess.enabled.argumentation));
    kv("filters.subjectivity", flag(c.assess.enabled.subjectivity));
    kv("neural.mode", n.mode == filters::ConsensusMode::Recall ? "recall" : "precision");
    kv("neural.roberta_real_hi", num(n.roberta_real_hi));
    kv("neural.roberta_fake_hi", num(n.roberta_fake_hi));
    kv("neural.gltr_fake_lo", num(n.gltr_fake_lo));
    kv("neural.gltr_fake_hi", num(n.gltr_fake_hi));
    kv("neural.accuracies", num(n.detector_accuracies[0]) + "," + num(n.detector_accuracies[1]) + "," +
                                num(n.detector_accuracies[2]));
    kv("arg.mode", c.assess.arg_mode == filters::ArgMode::Relaxed ? "relaxed" : "strict");
    kv("subj.threshold", num(c.assess.subjectivity_threshold));
    kv("detector.generator_order", c.detector.generator_order);
    kv("detector.generator_add_k", num(c.detector.generator_add_k));
    kv("detector.scorer_orders",
       std::to_string(c.detector.scorer_orders[0]) + "," + std::to_string(c.detector.scorer_orders[1]));
    kv("detector.scorer_add_k", num(c.detector.scorer_add_k));
    kv("detector.train_size", c.detector.train_size);
    kv("detector.nucleus_p", num(c.detector.sampling.nucleus_p));
    kv("detector.temperature", num(c.detector.sampling.temperature));
    kv("detector.max_len", c.detector.sampling.max_len);
    kv("detector.folds", c.detector.folds);
    kv("sweep.step", num(1.0 / c.sweep_steps));
    kv("seed", c.seed);
    return o.str();
}

// ---------------------------------------------------------------------------
// Stages

namespace {

void require_path(const fs::path& p, const char* key) {
    if (p.empty()) fail(ErrorCode::ConfigError, std::string(key) + " is not set");
}

}  // namespace

DetectOutput run_detect(const PipelineConfig& cfg) {
    require_path(cfg.prices, "data.prices");
    if (cfg.anomaly_method != "arima") {
        fail(ErrorCode::ConfigError, "the pipeline grades severity with arima; use run_detect_multivariate for " +
                                         cfg.anomaly_method);
    }
    const auto series = parse_price_csv(cfg.prices);
    const auto closes = series.closes();
    DetectOutput out;
    out.model = anomaly::stepwise_search(closes, cfg.arima_caps).model;
    anomaly::RollingOptions ro;
    ro.window = cfg.anomaly_window;
    ro.from = cfg.anomaly_from;
    ro.to = cfg.anomaly_to;
    out.reports = anomaly::rolling_detect(series, out.model, ro);
    for (const auto& r : out.reports) {
        if (std::abs(r.severity) >= cfg.anomaly_min_severity) out.selected.push_back(r);
    }
    ensure_dir(cfg.output_dir);
    anomaly::save_model(out.model, cfg.output_dir / "arima.json");
    std::string text;
    for (const auto& r : out.reports) text += anomaly::report_to_json_line(r) + '\n';
    write_text(cfg.output_dir / "anomalies.jsonl", text);
    return out;
}

std::vector<OutlierPoint> run_detect_multivariate(const PipelineConfig& cfg) {
    require_path(cfg.prices, "data.prices");
    const auto series = parse_price_csv(cfg.prices);
    const auto features = anomaly::price_features(series);
    std::vector<double> scores(series.points.size());
    double threshold = cfg.outlier_threshold;
    if (cfg.anomaly_method == "lof") {
        for (const auto& s : anomaly::lof_scores(features, cfg.lof_k).scores) scores[s.index] = s.score;
        if (threshold == 0.0) threshold = 1.5;
    } else if (cfg.anomaly_method == "iforest") {
        auto opts = cfg.iforest;
        opts.seed = cfg.seed;
        for (const auto& s : anomaly::iforest_scores(features, opts)) scores[s.index] = s.score;
        if (threshold == 0.0) threshold = 0.6;
    } else {
        fail(ErrorCode::ConfigError, "multivariate detection needs anomaly.method lof or iforest");
    }
    std::vector<OutlierPoint> out;
    std::string text;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto t = series.points[i].timestamp;
        if ((cfg.anomaly_from && t < *cfg.anomaly_from) || (cfg.anomaly_to && t > *cfg.anomaly_to)) continue;
        OutlierPoint p{t, scores[i], scores[i] > threshold};
        out.push_back(p);
        text += json{{"timestamp", format_instant(t)},
                     {"method", cfg.anomaly_method},
                     {"score", p.score},
                     {"is_outlier", p.is_outlier}}
                    .dump() +
                '\n';
    }
    ensure_dir(cfg.output_dir);
    write_text(cfg.output_dir / "anomalies.jsonl", text);
    return out;
}

std::vector<anomaly::AnomalyReport> read_anomalies(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::vector<anomaly::AnomalyReport> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            out.push_back(anomaly::report_from_json_line(line));
        } catch (const Error& e) {
            fail(e.code(), path.string() + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

RetrieveOutput run_retrieve(const PipelineConfig& cfg, const std::vector<anomaly::AnomalyReport>& selected) {
    require_path(cfg.symbols, "data.symbols");
    require_path(cfg.corpus, "data.corpus");
    const auto table = query::load_symbol_table(cfg.symbols);
    const auto symbol = query::normalize_symbol(cfg.symbol, table);
    const auto corpus = parse_tweet_stream(cfg.corpus).tweets;

    RetrieveOutput out;
    std::set<std::string> chosen;
    std::string trace_lines;
    for (const auto& a : selected) {
        const auto initial =
            query::build_initial_query(a.timestamp, symbol, cfg.query_days, cfg.query_verified_only,
                                       cfg.query_allow_any_days);
        auto expanded = query::prf_expand(initial, corpus, cfg.prf);
        for (const auto& t : query::corpus_search(expanded.query, corpus)) chosen.insert(t.id);
        trace_lines += json{{"anomaly", format_instant(a.timestamp)},
                            {"severity", a.severity},
                            {"query", query::compose_query_string(expanded.query)},
                            {"trace", json::parse(query::trace_to_json(expanded.trace))}}
                           .dump() +
                       '\n';
        out.expansions.push_back(std::move(expanded));
    }
    for (const auto& t : corpus) {
        if (chosen.contains(t.id)) out.collection.push_back(t);
    }
    ensure_dir(cfg.output_dir);
    write_tweet_stream(cfg.output_dir / "collection.jsonl", out.collection);
    write_text(cfg.output_dir / "queries.jsonl", trace_lines);
    return out;
}

AssessStageOutput run_assess(const PipelineConfig& cfg, const std::vector<Tweet>& collection) {
    require_path(cfg.lexicons, "data.lexicons");
    const auto profanity = load_lexicon(cfg.lexicons / "profanity.txt", LexiconKind::Profanity);
    const auto subjectivity = load_lexicon(cfg.lexicons / "subjectivity.tsv", LexiconKind::Subjectivity);
    const auto sa = textprep::load_sa_lexicons(cfg.lexicons);
    std::optional<SidecarSet> sidecars;
    if (!cfg.sidecar.empty()) sidecars = parse_sidecar(cfg.sidecar);
    std::optional<filters::ProfanityModel> model;
    if (!cfg.profanity_model.empty()) model = filters::load_profanity_model(cfg.profanity_model);

    ensure_dir(cfg.output_dir);
    AssessStageOutput out;
    std::optional<filters::DetectorBundle> bundle;
    if (cfg.assess.enabled.neural) {
        if (!cfg.detector_bundle.empty()) {
            bundle = filters::load_bundle(cfg.detector_bundle);
        } else {
            require_path(cfg.human_corpus, "data.human_corpus");
            const auto human = parse_tweet_stream(cfg.human_corpus).tweets;
            out.training = train_detector(human, cfg.detector, cfg.seed);
            bundle = out.training->bundle;
            filters::save_bundle(*bundle, cfg.output_dir / "detector");
            write_text(cfg.output_dir / "detector" / "training.json", detector_report_json(*out.training) + "\n");
        }
    }

    filters::AssessResources res;
    res.profanity = &profanity;
    res.subjectivity = &subjectivity;
    res.sa = &sa;
    res.profanity_model = model ? &*model : nullptr;
    res.detector = bundle ? &*bundle : nullptr;
    res.sidecars = sidecars ? &*sidecars : nullptr;
    out.assessment = filters::assess(collection, cfg.assess, res);
    filters::write_records(cfg.output_dir / "assessed.jsonl", out.assessment.records);
    return out;
}

std::map<std::string, Label> load_gold_labels(const PipelineConfig& cfg) {
    std::map<std::string, Label> out;
    if (cfg.labels.empty()) return out;
    for (const auto& t : parse_tweet_stream(cfg.labels).tweets) {
        if (t.label) out[t.id] = *t.label;
    }
    return out;
}

ReportOutput run_report(const PipelineConfig& cfg, const std::vector<filters::ReliabilityRecord>& records,
                        std::optional<filters::Direction> direction) {
    const auto gold_by_id = load_gold_labels(cfg);
    ReportOutput out;
    std::vector<Label> gold;
    std::vector<bool> predicted;
    std::vector<filters::ReliabilityRecord> labeled;
    for (const auto& r : records) {
        const auto it = gold_by_id.find(r.id);
        if (it == gold_by_id.end()) {
            ++out.unlabeled;
            continue;
        }
        gold.push_back(it->second);
        predicted.push_back(r.reliable);
        labeled.push_back(r);
    }
    out.labeled = gold.size();
    json doc;
    if (!gold.empty()) {
        out.metrics = compute_metrics(gold, predicted);
        doc = metrics_json(*out.metrics);
        const auto& e = cfg.assess.enabled;
        if (e.feature && e.neural && e.argumentation && e.subjectivity) {
            out.grid = combination_grid(gold, component_flags(labeled));
            write_text(cfg.output_dir / "combination_grid.csv", grid_to_csv(out.grid));
        }
    } else {
        doc = json{{"confusion", nullptr}, {"per_class", nullptr}, {"weighted", nullptr}};
    }
    doc["labeled"] = out.labeled;
    doc["unlabeled"] = out.unlabeled;

    if (direction) {
        // Sentiment of the gold-reliable subset, or of the predicted-reliable
        // records when nothing is labeled.
        std::vector<filters::Sentiment> labels;
        for (const auto& r : records) {
            const auto it = gold_by_id.find(r.id);
            const bool keep = gold_by_id.empty() ? r.reliable : (it != gold_by_id.end() && it->second == Label::Reliable);
            if (keep) labels.push_back(r.sentiment.label);
        }
        if (!labels.empty()) {
            out.alignment = filters::alignment_stats(labels, *direction);
            const auto& a = *out.alignment;
            doc["alignment"] = {{"direction", *direction == filters::Direction::Up ? "up" : "down"},
                                {"pos", a.pos},
                                {"neg", a.neg},
                                {"neu", a.neu},
                                {"total", a.total},
                                {"aligned", a.aligned},
                                {"percent", a.percent}};
        }
    }
    ensure_dir(cfg.output_dir);
    write_text(cfg.output_dir / "metrics.json", doc.dump(2) + "\n");
    return out;
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(name) + " stage: " + e.what());
    } catch (const fs::filesystem_error& e) {
        throw Error(ErrorCode::IoError, std::string(name) + " stage: " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult r;
    r.detect = stage("detect", [&] { return run_detect(cfg); });
    r.retrieve = stage("retrieve", [&] { return run_retrieve(cfg, r.detect.selected); });
    r.assess = stage("assess", [&] { return run_assess(cfg, r.retrieve.collection); });
    std::optional<filters::Direction> direction;
    const anomaly::AnomalyReport* strongest = nullptr;
    for (const auto& a : r.detect.selected) {
        if (!strongest || std::abs(a.error) > std::abs(strongest->error)) strongest = &a;
    }
    if (strongest) direction = strongest->severity < 0 ? filters::Direction::Down : filters::Direction::Up;
    r.report = stage("report", [&] { return run_report(cfg, r.assess.assessment.records, direction); });
    return r;
}

}  // namespace trustscreen::eval
