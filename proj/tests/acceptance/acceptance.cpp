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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Oracles are shared with the unit suite; tolerances are the contract's.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "anomaly_oracles.hpp"
#include "eval_fixtures.hpp"
#include "qp_oracle.hpp"
#include "test_support.hpp"
#include "trustscreen/anomaly.hpp"
#include "trustscreen/evaluation.hpp"
#include "trustscreen/filters.hpp"
#include "trustscreen/learn.hpp"
#include "trustscreen/lmscore.hpp"
#include "trustscreen/query.hpp"
#include "trustscreen/textprep.hpp"

using namespace trustscreen;

namespace {

using Clock = std::chrono::steady_clock;

std::filesystem::path data(const std::string& rel) { return std::filesystem::path(TS_DATA_DIR) / rel; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

/// Collects failed sub-checks of one criterion.
class Outcome {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(std::string s) { notes_.push_back(std::move(s)); }
    bool passed() const { return failures_.empty(); }

    std::string detail() const {
        const auto& items = failures_.empty() ? notes_ : failures_;
        std::string out;
        for (std::size_t i = 0; i < items.size() && i < 6; ++i) out += (i ? "; " : "") + items[i];
        if (items.size() > 6) out += fmt("; +%zu more", items.size() - 6);
        return out;
    }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

int g_failed = 0;

void criterion(int n, const char* name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (!o.passed()) ++g_failed;
    std::printf("%s [%02d] %s (%.2fs): %s\n", o.passed() ? "PASS" : "FAIL", n, name, secs, o.detail().c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------

void baseline_rows(Outcome& o) {
    struct Row {
        const char* symbol;
        std::size_t reliable, unreliable;
        std::array<double, 4> negative, weighted;
    };
    const Row rows[] = {
        {"TWTR", 208, 451, {68.44, 100.00, 81.27, 73.05}, {46.84, 68.44, 55.61, 49.99}},
        {"FB", 216, 836, {79.46, 100.00, 88.56, 82.87}, {63.15, 79.47, 70.38, 65.86}},
    };
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& r : rows) {
        const auto gold = eval::labels_from_counts(r.reliable, r.unreliable);
        const auto m = eval::compute_metrics(gold, eval::baseline(gold.size()));
        const std::array<double, 4> neg{m.unreliable.precision, m.unreliable.recall, m.unreliable.f1,
                                        m.unreliable.f0_5};
        const std::array<double, 4> w{m.weighted.precision, m.weighted.recall, m.weighted.f1, m.weighted.f0_5};
        for (int k = 0; k < 4; ++k) {
            const double dn = std::abs(100.0 * neg[k] - r.negative[k]);
            const double dw = std::abs(100.0 * w[k] - r.weighted[k]);
            worst = std::max({worst, dn, dw});
            o.expect(dn <= 0.02, fmt("%s negative[%d] %.4f vs %.2f", r.symbol, k, 100.0 * neg[k], r.negative[k]));
            o.expect(dw <= 0.02, fmt("%s weighted[%d] %.4f vs %.2f", r.symbol, k, 100.0 * w[k], r.weighted[k]));
        }
    }
    const double secs = seconds_since(t0);
    o.expect(secs < 1.0, fmt("runtime %.3fs", secs));
    o.note(fmt("max deviation %.4f pp, %.4fs", worst, secs));
}

void consensus_weights(Outcome& o) {
    const auto w = filters::derive_consensus_weights({0.92, 0.81, 0.69});
    o.expect(w == std::array<int, 3>{38, 33, 29}, fmt("got (%d, %d, %d)", w[0], w[1], w[2]));
    o.note(fmt("(%d, %d, %d)", w[0], w[1], w[2]));
}

void arima_recovery(Outcome& o) {
    const auto t0 = Clock::now();
    int hits = 0;
    std::size_t fits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = anomaly::stepwise_search(ts_test::ar1(1000, 0.7, s));
        const auto& ord = r.model.order;
        hits += (ord.p == 1 && ord.d == 0 && (ord.q == 0 || ord.q == 1)) ? 1 : 0;
        for (const auto& m : r.evaluated) {
            ++fits;
            const int k = m.include_mean ? 1 : 0;
            o.expect(m.aic == -2.0 * m.loglik + 2.0 * (m.order.p + m.order.q + k + 1),
                     fmt("seed %llu: AIC identity broken", static_cast<unsigned long long>(s)));
        }
    }
    const double secs = seconds_since(t0);
    o.expect(hits >= 16, fmt("%d/20 seeds recovered", hits));
    o.expect(secs < 60.0, fmt("runtime %.1fs", secs));
    o.note(fmt("%d/20 seeds recovered, AIC identity exact on %zu fits", hits, fits));
}

void adf_discrimination(Outcome& o) {
    int noise = 0;
    int walk = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        noise += anomaly::adf_test(ts_test::white_noise(500, 1000 + s)).reject_nonstationary ? 1 : 0;
        walk += anomaly::adf_test(ts_test::random_walk(500, 5000 + s)).reject_nonstationary ? 1 : 0;
    }
    o.expect(noise >= 95, fmt("white noise rejected %d/100", noise));
    o.expect(walk <= 10, fmt("random walk rejected %d/100", walk));
    o.note(fmt("white noise %d/100 rejected, random walk %d/100 rejected", noise, walk));
}

void anomaly_injection(Outcome& o) {
    int graded = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto r = ts_test::injected_spike_report(40 + s);
        const bool ok = r.severity == 3 && r.is_anomaly;
        graded += ok ? 1 : 0;
        o.expect(ok, fmt("seed %llu: severity %d", static_cast<unsigned long long>(40 + s), r.severity));
    }
    std::size_t flagged = 0;
    std::size_t total = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto y = ts_test::ar1(600, 0.5, 60 + s, 10.0);
        const auto model = anomaly::fit_arima(y, {1, 0, 0});
        for (const auto& r : anomaly::rolling_detect_values(y, model, 20, 20)) {
            flagged += r.is_anomaly ? 1 : 0;
            ++total;
        }
    }
    const double frac = static_cast<double>(flagged) / static_cast<double>(total);
    o.expect(frac <= 0.07, fmt("clean flagged fraction %.4f", frac));
    o.note(fmt("spike graded +3 on %d/10 seeds, clean flagged %.2f%%", graded, 100.0 * frac));
}

void multivariate(Outcome& o) {
    double min_lof = 1e300;
    double min_if = 1e300;
    double worst_oracle = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto raw = ts_test::gaussian_cloud_with_outlier(s);
        const auto pts = anomaly::standardize(raw);
        const auto lof = anomaly::lof_scores(pts, 10);
        const auto oracle = ts_test::lof_oracle(pts, 10);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            worst_oracle = std::max(worst_oracle, std::abs(lof.scores[i].score - oracle[i]));
        }
        const auto best = std::max_element(lof.scores.begin(), lof.scores.end(),
                                           [](const auto& a, const auto& b) { return a.score < b.score; });
        o.expect(best->index == 200, fmt("seed %llu: LOF max at %zu", static_cast<unsigned long long>(s), best->index));
        min_lof = std::min(min_lof, lof.scores[200].score);

        anomaly::IForestOptions opt;
        opt.seed = 1000 + s;
        const auto forest = anomaly::iforest_scores(raw, opt);
        const auto top = std::max_element(forest.begin(), forest.end(),
                                          [](const auto& a, const auto& b) { return a.score < b.score; });
        o.expect(top->index == 200, fmt("seed %llu: IForest max at %zu", static_cast<unsigned long long>(s), top->index));
        min_if = std::min(min_if, forest[200].score);
    }
    o.expect(min_lof > 1.5, fmt("outlier LOF %.3f", min_lof));
    o.expect(worst_oracle <= 1e-9, fmt("LOF oracle deviation %.3g", worst_oracle));
    o.expect(min_if > 0.6, fmt("outlier IForest %.3f", min_if));
    for (std::size_t n : {2u, 10u, 256u, 1000u}) {
        o.expect(anomaly::isolation_score(anomaly::average_path_length(n), n) == 0.5,
                 fmt("s(c(%zu), %zu) != 0.5", n, n));
    }
    o.note(fmt("min outlier LOF %.3f (oracle dev %.2g), min IForest %.3f, s(c(n),n) = 0.5", min_lof, worst_oracle,
               min_if));
}

/// Trained once; reused by the consensus criterion.
std::optional<eval::DetectorTraining> g_training;

void gltr_properties(Outcome& o) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TokenProb> probs;
    while (probs.size() < 100000) {
        const double top = 1.0 - u(rng) * 0.999;
        const double actual = top * (1.0 - u(rng));
        if (actual > 0.0) probs.push_back({actual, top});
    }
    const auto scores = lm::score_tokens(probs, lm::TokenList(probs.size(), "w"));
    std::size_t out_of_range = 0;
    for (const auto& s : scores) out_of_range += (s.frac_p > 0.0 && s.frac_p <= 1.0) ? 0 : 1;
    o.expect(out_of_range == 0, fmt("%zu frac_p outside (0,1]", out_of_range));

    double worst_sum = 0.0;
    for (std::size_t at = 0; at + 50 <= scores.size(); at += 1000) {
        const auto h = lm::histogram(std::vector<lm::TokenScore>(scores.begin() + static_cast<std::ptrdiff_t>(at),
                                                                 scores.begin() + static_cast<std::ptrdiff_t>(at + 1 + at % 50)));
        double sum = 0.0;
        for (double b : h.bins) sum += b;
        worst_sum = std::max(worst_sum, std::abs(sum - 100.0));
    }
    o.expect(worst_sum <= 1e-6, fmt("histogram sum deviates by %.3g", worst_sum));

    const auto human = parse_tweet_stream(data("fixtures/human_tweets.jsonl")).tweets;
    std::vector<lm::TokenList> docs;
    for (std::size_t i = 0; i < human.size() / 2; ++i) docs.push_back(lm::lm_tokens(human[i].text));
    const auto model = lm::NgramLm::train(docs, 3, 0.1);
    lm::SampleOptions greedy;
    greedy.temperature = 0.0;
    double min_top = 100.0;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        greedy.seed = seed;
        const auto text = lm::generate(model, {}, greedy);
        o.expect(!text.empty(), "greedy generation is empty");
        if (!text.empty()) min_top = std::min(min_top, lm::histogram(lm::score_tokens(model, text)).bins[9]);
    }
    o.expect(min_top == 100.0, fmt("greedy top-bin %.2f%%", min_top));

    const auto cfg = eval::default_config(TS_DATA_DIR);
    g_training = eval::train_detector(parse_tweet_stream(cfg.human_corpus).tweets, cfg.detector, cfg.seed);
    o.expect(g_training->human_rows == 200 && g_training->synthetic_rows == 200,
             fmt("training rows %zu human / %zu synthetic", g_training->human_rows, g_training->synthetic_rows));
    for (int c = 0; c < 2; ++c) {
        const double cv = g_training->channels[c].cv_accuracy;
        o.expect(cv >= 0.75, fmt("channel %d CV accuracy %.4f", c, cv));
    }
    o.note(fmt("1e5 frac_p in range, hist dev %.1g, greedy top-bin %.0f%%, CV %.4f / %.4f", worst_sum, min_top,
               g_training->channels[0].cv_accuracy, g_training->channels[1].cv_accuracy));
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const learn::KernelSpec& s) {
    Eigen::MatrixXd K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.rows(); ++j) {
            K(i, j) = learn::kernel(s, X.row(i).transpose(), X.row(j).transpose());
        }
    }
    return K;
}

void smo_correctness(Outcome& o) {
    double worst_gap = 0.0;
    double worst_kkt = 0.0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto q = ts_test::overlapping_clouds(30, seed);
        for (const learn::KernelSpec& s : {learn::KernelSpec{learn::KernelKind::Rbf, 1.0, 0.5, 3, 1.0},
                                           learn::KernelSpec{learn::KernelKind::Poly, 2.0, 0.5, 2, 1.0}}) {
            const auto r = learn::smo_train(q.X, q.y, s);
            o.expect(r.converged, "SMO did not converge");
            const auto oracle = ts_test::solve_dual_qp(gram(q.X, s), q.y, s.C);
            worst_gap = std::max(worst_gap, std::abs(learn::dual_objective(q.X, q.y, s, r.alphas) - oracle.objective));
            worst_kkt = std::max(worst_kkt, learn::kkt_residual(q.X, q.y, r.model, r.alphas));
        }
    }
    o.expect(worst_gap <= 1e-3, fmt("dual gap to oracle %.3g", worst_gap));
    o.expect(worst_kkt <= 1e-3, fmt("KKT residual %.3g", worst_kkt));

    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 1, 1, 0, 1, 1, 0;
    const std::vector<int> y{1, 1, -1, -1};
    const auto x = learn::smo_train(X, y, {learn::KernelKind::Rbf, 10.0, 1.0, 3, 1.0});
    const double acc = learn::accuracy(x.model, X, y);
    o.expect(acc == 1.0, fmt("XOR accuracy %.2f", acc));
    o.note(fmt("dual gap %.2g, KKT %.2g, XOR %.0f%%", worst_gap, worst_kkt, 100.0 * acc));
}

void consensus_rules(Outcome& o) {
    using filters::Verdict;
    filters::ConsensusConfig recall;
    filters::ConsensusConfig precision;
    precision.mode = filters::ConsensusMode::Precision;

    // Neural consensus.
    const double weighted = filters::gltr_weighted_fake({0.7, 0.5}, {0.81, 0.69});
    o.expect(std::abs(weighted - 0.392) < 1e-12, fmt("weighted fake %.6f", weighted));
    const auto human = filters::synthetic_consensus(0.8, weighted, recall);
    o.expect(human.verdict == Verdict::Human && human.flag, "rule: 0.8 / 0.392 is not HUMAN");
    for (double g : {0.0, 0.5, 1.0}) {
        const auto s = filters::synthetic_consensus(0.2, g, precision);
        o.expect(s.verdict == Verdict::Synthetic && !s.flag, fmt("rule: 0.2 / %.1f is not SYNTHETIC", g));
    }
    const auto ir = filters::synthetic_consensus(0.6, 0.5, recall);
    const auto ip = filters::synthetic_consensus(0.6, 0.5, precision);
    o.expect(ir.verdict == Verdict::Inconclusive && ir.flag && ip.verdict == Verdict::Inconclusive && !ip.flag,
             "rule: 0.6 / 0.5 inconclusive flags wrong");

    // Argumentation.
    using enum ArgTag;
    const std::vector<ArgTag> worked{Claim, Claim, Claim, Claim, Claim, Claim, Claim,
                                              Premise, Premise, Premise, Premise, Premise, Premise, Premise};
    o.expect(filters::argumentation_decide(worked, filters::ArgMode::Relaxed) &&
                 filters::argumentation_decide(worked, filters::ArgMode::Strict),
             "rule: claim + premise example");
    const std::vector<ArgTag> outside(8, Outside);
    o.expect(!filters::argumentation_decide(outside, filters::ArgMode::Relaxed) &&
                 !filters::argumentation_decide(outside, filters::ArgMode::Strict),
             "rule: all-outside example");
    const std::vector<ArgTag> premise_only{Outside, Premise, Premise};
    o.expect(filters::argumentation_decide(premise_only, filters::ArgMode::Relaxed) &&
                 !filters::argumentation_decide(premise_only, filters::ArgMode::Strict),
             "rule: premise-only example");

    // Subjectivity.
    const auto both = filters::subjectivity_consensus(0.9, 0.8, filters::LexiconSubjectivity{0.1, 1, false});
    o.expect(both.subjective && !both.flag, "rule: (0.9, 0.8) not subjective");
    o.expect(filters::subjectivity_consensus(0.9, 0.2, filters::LexiconSubjectivity{0.6, 2, false}).subjective,
             "rule: disagreement with lexicon 0.6 not subjective");
    const auto lower = filters::subjectivity_consensus(0.9, 0.2, filters::LexiconSubjectivity{0.3, 2, false});
    o.expect(!lower.subjective && lower.flag, "rule: disagreement with lexicon 0.3 not objective");

    // Precision passes are recall passes: random score pairs.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    for (int i = 0; i < 100000; ++i) {
        const std::optional<double> rr = i % 10 == 0 ? std::nullopt : std::optional<double>(u(rng));
        const double g = u(rng);
        if (filters::synthetic_consensus(rr, g, precision).flag && !filters::synthetic_consensus(rr, g, recall).flag) {
            ++violations;
        }
    }
    o.expect(violations == 0, fmt("%zu random pairs pass precision but not recall", violations));

    // ...and on the labeled fixture, reusing the trained detector.
    o.expect(g_training.has_value(), "no trained detector available");
    if (!g_training) return;
    const auto tweets = parse_tweet_stream(data("fixtures/twtr_labeled.jsonl")).tweets;
    const auto profanity = load_lexicon(data("lexicons/profanity.txt"), LexiconKind::Profanity);
    const auto subjectivity =
        load_lexicon(data("lexicons/subjectivity.tsv"), LexiconKind::Subjectivity);
    const auto sa = textprep::load_sa_lexicons(data("lexicons"));
    const auto sidecars = parse_sidecar(data("fixtures/twtr_sidecar.jsonl"));
    std::size_t rec_pass = 0;
    std::size_t prec_pass = 0;
    for (const bool with_sidecars : {true, false}) {
        filters::AssessResources res;
        res.profanity = &profanity;
        res.subjectivity = &subjectivity;
        res.sa = &sa;
        res.detector = &g_training->bundle;
        res.sidecars = with_sidecars ? &sidecars : nullptr;
        filters::AssessConfig rc;
        filters::AssessConfig pc;
        pc.consensus.mode = filters::ConsensusMode::Precision;
        const auto a = filters::assess(tweets, rc, res);
        const auto b = filters::assess(tweets, pc, res);
        for (std::size_t i = 0; i < tweets.size(); ++i) {
            const bool ra = a.records[i].neural_filter->flag;
            const bool pb = b.records[i].neural_filter->flag;
            o.expect(!pb || ra, fmt("fixture tweet %s passes precision only", tweets[i].id.c_str()));
            o.expect(!b.records[i].reliable || a.records[i].reliable,
                     fmt("fixture tweet %s reliable in precision only", tweets[i].id.c_str()));
            if (with_sidecars) {
                rec_pass += ra;
                prec_pass += pb;
            }
        }
    }
    o.note(fmt("9 rule examples exact; 1e5 random pairs and %zu fixture tweets nested (%zu precision passes within %zu recall passes)",
               tweets.size(), prec_pass, rec_pass));
}

void prf_determinism(Outcome& o) {
    const auto corpus = parse_tweet_stream(data("fixtures/twtr_corpus.jsonl")).tweets;
    const auto symbol = query::normalize_symbol("TWTR", query::load_symbol_table(data("symbols.tsv")));
    const auto initial = query::build_initial_query(*parse_instant("2021-04-30T00:00:00Z"), symbol, 3);
    const query::PrfOptions opts;
    const auto r = query::prf_expand(initial, corpus, opts);
    o.expect(r.state.converged, "did not converge");
    o.expect(r.state.iteration <= opts.max_iters, fmt("%d iterations", r.state.iteration));
    o.expect(query::replay_trace(r.trace) == r.query, "trace replay differs");
    o.expect(query::replay_trace(query::trace_from_json(query::trace_to_json(r.trace))) == r.query,
             "serialized trace replay differs");
    o.expect(query::prf_expand(initial, corpus, opts).query == r.query, "second run differs");

    std::vector<Tweet> plain;
    for (int i = 0; i < 20; ++i) {
        Tweet t;
        t.id = std::to_string(i);
        t.text = "stock price of Twitter today";
        t.created_at = *parse_instant("2021-04-29T12:00:00Z");
        t.lang = "en";
        plain.push_back(t);
    }
    query::SearchQuery q;
    q.flags = query::QueryFlags{"en", false, false, false};
    q.domain_terms = {"stock"};
    q.name_terms = {"Twitter"};
    const auto flat = query::prf_expand(q, plain, opts);
    o.expect(flat.query == q, "tag-free corpus changed the query");
    o.expect(flat.state.converged, "tag-free corpus did not converge");
    o.note(fmt("converged after %d of %d iterations, replay identical, tag-free query unchanged", r.state.iteration,
               opts.max_iters));
}

void alignment(Outcome& o) {
    const auto down = filters::alignment_stats(33, 125, 50, filters::Direction::Down);
    const auto up = filters::alignment_stats(156, 45, 15, filters::Direction::Up);
    const std::string d = fmt("%.2f", down.percent);
    const std::string u = fmt("%.2f", up.percent);
    o.expect(d == "60.10", "down alignment " + d);
    o.expect(u == "72.22", "up alignment " + u);
    o.note("down " + d + "%, up " + u + "%");
}

void sweep_machinery(Outcome& o) {
    const auto fx = ts_test::planted_sweep_fixture();
    const auto s = eval::threshold_sweep(fx.gold, fx.roberta_real, fx.gltr_fake, filters::ConsensusConfig{});
    o.expect(s.rows.size() == 101, fmt("%zu rows", s.rows.size()));
    for (const char* key : {"neg_f0_5", "neg_f1", "neg_precision", "w_f0_5", "w_f1", "w_recall"}) {
        const double t = s.argmax.at(key);
        o.expect(t == 0.8, fmt("%s argmax %.2f", key, t));
    }
    o.note(fmt("%zu rows, planted argmax %.2f", s.rows.size(), s.argmax.at("neg_f0_5")));
}

void combination_grid(Outcome& o) {
    const auto fx = ts_test::grid_fixture();
    const auto rows = eval::combination_grid(fx.gold, fx.flags);
    const auto& expected = ts_test::grid_expectations();
    o.expect(rows.size() == expected.size(), fmt("%zu rows", rows.size()));
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min(rows.size(), expected.size()); ++i) {
        const auto& r = rows[i].metrics;
        const auto& e = expected[i];
        o.expect(rows[i].name == e.name, fmt("row %zu named %s", i, rows[i].name.c_str()));
        o.expect(r.confusion == eval::ConfusionMatrix{e.tp, e.fp, e.tn, e.fn}, fmt("%s: confusion", e.name));
        const double got[12] = {r.unreliable.precision, r.unreliable.recall, r.unreliable.f1, r.unreliable.f0_5,
                                r.reliable.precision,   r.reliable.recall,   r.reliable.f1,   r.reliable.f0_5,
                                r.weighted.precision,   r.weighted.recall,   r.weighted.f1,   r.weighted.f0_5};
        for (int k = 0; k < 12; ++k) worst = std::max(worst, std::abs(got[k] - e.values[k]));
    }
    o.expect(worst <= 1e-12, fmt("max deviation %.3g", worst));
    o.note(fmt("%zu subsets, max deviation %.2g", rows.size(), worst));
}

}  // namespace

int main() {
    criterion(1, "baseline rows from class counts", baseline_rows);
    criterion(2, "consensus weights", consensus_weights);
    criterion(3, "ARIMA order recovery", arima_recovery);
    criterion(4, "ADF discrimination", adf_discrimination);
    criterion(5, "anomaly injection", anomaly_injection);
    criterion(6, "multivariate detectors", multivariate);
    criterion(7, "n-gram detector properties", gltr_properties);
    criterion(8, "SMO correctness", smo_correctness);
    criterion(9, "consensus rule table", consensus_rules);
    criterion(10, "PRF determinism and convergence", prf_determinism);
    criterion(11, "sentiment alignment arithmetic", alignment);
    criterion(12, "sweep machinery", sweep_machinery);
    criterion(13, "combination grid oracle", combination_grid);
    std::printf("%d/13 criteria passed\n", 13 - g_failed);
    return g_failed == 0 ? 0 : 1;
}
