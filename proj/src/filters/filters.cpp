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
#include "trustscreen/filters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace trustscreen::filters {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && ascii_lower(s.substr(0, prefix.size())) == prefix;
}

bool is_link(std::string_view t) {
    return starts_with_ci(t, "http://") || starts_with_ci(t, "https://") || starts_with_ci(t, "www.");
}

/// Hashtag, cashtag, mention or link.
bool is_special(std::string_view t) {
    if (t.size() >= 2) {
        if (t[0] == '#' && alnum(t[1])) return true;
        if (t[0] == '$' && alpha(t[1])) return true;
        if (t[0] == '@' && (alnum(t[1]) || t[1] == '_')) return true;
    }
    return is_link(t);
}

/// Lower-cased token with leading and trailing non-alphanumerics removed.
std::string bare(std::string_view t) {
    std::size_t b = 0;
    std::size_t e = t.size();
    while (b < e && !alnum(t[b])) ++b;
    while (e > b && !alnum(t[e - 1])) --e;
    return ascii_lower(t.substr(b, e - b));
}

double logistic(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

// ---------------------------------------------------------------------------

void validate(const FeatureThresholds& th) {
    if (!(th.beta > 0.0 && th.beta <= 1.0)) fail(ErrorCode::ConfigError, "filters.beta must lie in (0, 1]");
    if (!in_open_unit(th.profanity_threshold)) {
        fail(ErrorCode::ConfigError, "filters.profanity_threshold must lie in (0, 1)");
    }
    if (th.min_account_age_days < 0 || th.min_followers < 0 || th.min_tweets < 0) {
        fail(ErrorCode::ConfigError, "user minima must be non-negative");
    }
}

ProfanityModel load_profanity_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    ProfanityModel m;
    std::string line;
    std::size_t lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        double w = 0.0;
        try {
            std::size_t used = 0;
            if (tab == std::string::npos) throw std::invalid_argument("no tab");
            w = std::stod(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1 || !std::isfinite(w)) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            fail(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>weight");
        }
        const auto key = line.substr(0, tab);
        if (key == "<bias>") {
            m.bias = w;
        } else {
            m.weights[ascii_lower(key)] = w;
        }
        any = true;
    }
    if (!any) fail(ErrorCode::EmptyLexicon, path.string() + " has no weights");
    return m;
}

double profanity_probability(std::string_view cleaned_text, const Lexicon& lexicon, const ProfanityModel* model) {
    std::size_t total = 0;
    std::size_t hits = 0;
    double z = model ? model->bias : 0.0;
    for (const auto& raw : textprep::whitespace_tokens(cleaned_text)) {
        const auto t = bare(raw);
        if (t.empty()) continue;
        ++total;
        if (model) {
            if (auto it = model->weights.find(t); it != model->weights.end()) z += it->second;
        } else if (lexicon.words.count(t)) {
            ++hits;
        }
    }
    if (model) return logistic(z);
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

FeatureResult feature_filter(const Tweet& tweet, const textprep::CleanText& cleaned, const FeatureThresholds& th,
                             const Lexicon& profanity, const ProfanityModel* model) {
    FeatureResult r;
    // short links were stripped by cleaning but still count as link tokens
    const auto tokens = textprep::whitespace_tokens(cleaned.cleaned);
    std::size_t special = cleaned.removed_urls;
    for (const auto& t : tokens) special += is_special(t) ? 1 : 0;
    const std::size_t total = tokens.size() + cleaned.removed_urls;
    r.tag_density = total == 0 ? 0.0 : static_cast<double>(special) / static_cast<double>(total);
    if (r.tag_density > th.beta) r.reasons.emplace_back("tag-density");

    const auto& m = tweet.metrics;
    const auto& lo = th.min_engagement;
    if (!(m.retweet_count > lo.retweet_count || m.reply_count > lo.reply_count || m.like_count > lo.like_count ||
          m.quote_count > lo.quote_count)) {
        r.reasons.emplace_back("zero-engagement");
    }

    r.profanity = profanity_probability(cleaned.cleaned, profanity, model);
    if (r.profanity > th.profanity_threshold) r.reasons.emplace_back("profanity");

    const auto age = std::chrono::floor<std::chrono::days>(tweet.created_at - tweet.author.created_at).count();
    if (age < th.min_account_age_days) r.reasons.emplace_back("account-age");
    if (tweet.author.followers_count < th.min_followers) r.reasons.emplace_back("low-followers");
    if (tweet.author.tweet_count < th.min_tweets) r.reasons.emplace_back("low-tweet-count");

    r.pass = r.reasons.empty();
    return r;
}

// ---------------------------------------------------------------------------

void validate(const ConsensusConfig& cfg) {
    for (double v : {cfg.roberta_real_hi, cfg.roberta_fake_hi, cfg.gltr_fake_lo, cfg.gltr_fake_hi}) {
        if (!in_open_unit(v)) fail(ErrorCode::ConfigError, "consensus thresholds must lie in (0, 1)");
    }
    for (double a : cfg.detector_accuracies) {
        if (!(a > 0.0 && a <= 1.0)) fail(ErrorCode::ConfigError, "detector accuracies must lie in (0, 1]");
    }
}

std::array<int, 3> derive_consensus_weights(const std::array<double, 3>& acc) {
    for (double a : acc) {
        if (!(a > 0.0) || !std::isfinite(a)) fail(ErrorCode::ConfigError, "detector accuracies must be positive");
    }
    const double sum = acc[0] + acc[1] + acc[2];
    std::array<int, 3> out{};
    std::array<double, 3> rem{};
    int used = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double share = 100.0 * acc[i] / sum;
        out[i] = static_cast<int>(std::floor(share));
        rem[i] = share - out[i];
        used += out[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (int k = 0; k < 100 - used; ++k) ++out[order[static_cast<std::size_t>(k) % 3]];
    return out;
}

double gltr_weighted_fake(const std::array<double, 2>& p_human, const std::array<double, 2>& acc) {
    if (!(acc[0] > 0.0) || !(acc[1] > 0.0)) fail(ErrorCode::ConfigError, "channel accuracies must be positive");
    for (double p : p_human) {
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "channel probability outside [0, 1]");
    }
    const double sum = acc[0] + acc[1];
    return acc[0] / sum * (1.0 - p_human[0]) + acc[1] / sum * (1.0 - p_human[1]);
}

ConsensusResult synthetic_consensus(std::optional<double> roberta_real, double gltr_fake, const ConsensusConfig& cfg) {
    if (!(gltr_fake >= 0.0 && gltr_fake <= 1.0)) fail(ErrorCode::InvalidArgument, "gltr fake probability outside [0, 1]");
    if (roberta_real && !(*roberta_real >= 0.0 && *roberta_real <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "discriminator probability outside [0, 1]");
    }
    ConsensusResult r;
    r.discriminator_missing = !roberta_real.has_value();
    if (roberta_real && *roberta_real > cfg.roberta_real_hi && gltr_fake < cfg.gltr_fake_lo) {
        r.verdict = Verdict::Human;
    } else if ((roberta_real && 1.0 - *roberta_real > cfg.roberta_fake_hi) || gltr_fake > cfg.gltr_fake_hi) {
        r.verdict = Verdict::Synthetic;
    } else {
        r.verdict = Verdict::Inconclusive;
    }
    switch (r.verdict) {
        case Verdict::Human: r.flag = true; break;
        case Verdict::Synthetic: r.flag = false; break;
        case Verdict::Inconclusive: r.flag = cfg.mode == ConsensusMode::Recall; break;
    }
    return r;
}

// ---------------------------------------------------------------------------

bool argumentation_decide(const std::vector<ArgTag>& tags, ArgMode mode) {
    const bool premise = std::find(tags.begin(), tags.end(), ArgTag::Premise) != tags.end();
    const bool claim = std::find(tags.begin(), tags.end(), ArgTag::Claim) != tags.end();
    return mode == ArgMode::Strict ? (premise && claim) : premise;
}

std::vector<ArgTag> heuristic_tag(std::string_view text) {
    static const std::set<std::string> markers{"because", "since", "as", "after"};
    static const std::set<std::string> modals{"should", "must", "will"};
    static const std::set<std::string> imperatives{"buy", "sell", "hold", "short", "dump", "avoid", "grab", "get",
                                                   "watch", "invest", "keep"};
    const auto raw = textprep::whitespace_tokens(text);
    const std::size_t n = raw.size();
    std::vector<std::string> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = bare(raw[i]);
    std::vector<ArgTag> tags(n, ArgTag::Outside);

    auto marker_len = [&](std::size_t i) -> std::size_t {
        if (markers.count(w[i])) return 1;
        if (w[i] == "due" && i + 1 < n && w[i + 1] == "to") return 2;
        return 0;
    };
    auto close = [&](std::size_t b, std::size_t e, bool premise) {
        if (b >= e) return;
        ArgTag tag = ArgTag::Outside;
        if (premise) {
            tag = ArgTag::Premise;
        } else {
            bool claim = imperatives.count(w[b]) > 0;
            for (std::size_t i = b; i < e && !claim; ++i) {
                claim = modals.count(w[i]) > 0 ||
                        (w[i] == "is" && i + 2 < e && w[i + 1] == "going" && w[i + 2] == "to");
            }
            if (claim) tag = ArgTag::Claim;
        }
        std::fill(tags.begin() + static_cast<std::ptrdiff_t>(b), tags.begin() + static_cast<std::ptrdiff_t>(e), tag);
    };

    std::size_t start = 0;
    bool premise = false;
    std::size_t i = 0;
    while (i < n) {
        if (const auto m = marker_len(i); m > 0) {
            close(start, i, premise);
            i += m;  // marker tokens stay OUTSIDE
            start = i;
            premise = true;
            continue;
        }
        const char last = raw[i].back();
        ++i;
        if (last == ',' || last == ';' || last == '.' || last == '!' || last == '?') {
            close(start, i, premise);
            start = i;
            premise = false;
        }
    }
    close(start, n, premise);
    return tags;
}

// ---------------------------------------------------------------------------

LexiconSubjectivity lexicon_subjectivity(std::string_view text, const Lexicon& lexicon) {
    LexiconSubjectivity r;
    double sum = 0.0;
    for (const auto& raw : textprep::whitespace_tokens(text)) {
        if (auto it = lexicon.scores.find(bare(raw)); it != lexicon.scores.end()) {
            sum += it->second;
            ++r.coverage;
        }
    }
    r.no_coverage = r.coverage == 0;
    r.score = r.no_coverage ? 0.0 : sum / static_cast<double>(r.coverage);
    return r;
}

SubjectivityResult subjectivity_consensus(std::optional<double> word_clf, std::optional<double> sent_clf,
                                          std::optional<LexiconSubjectivity> lex, double threshold) {
    if (!word_clf && !sent_clf && !lex) fail(ErrorCode::InvalidArgument, "no subjectivity evidence");
    SubjectivityResult r;
    const bool lex_subjective = lex && lex->score > threshold;
    if (word_clf && sent_clf) {
        const bool a = *word_clf > threshold;
        const bool b = *sent_clf > threshold;
        r.subjective = a == b ? a : lex_subjective;
    } else if (lex) {
        r.lexicon_only = true;
        r.subjective = lex_subjective;
    } else {
        r.subjective = (word_clf ? *word_clf : *sent_clf) > threshold;
    }
    r.flag = !r.subjective;
    return r;
}

// ---------------------------------------------------------------------------

SentimentResult sentiment_annotate(const std::optional<SentimentProbs>& probs) {
    SentimentResult r;
    if (!probs) {
        r.defaulted = true;
        return r;
    }
    r.label = Sentiment::Pos;
    double best = probs->pos;
    if (probs->neg > best) {
        r.label = Sentiment::Neg;
        best = probs->neg;
    }
    if (probs->neu > best) r.label = Sentiment::Neu;
    r.score = std::min(1.0, std::abs(probs->pos - probs->neg));
    return r;
}

AlignmentStats alignment_stats(std::size_t pos, std::size_t neg, std::size_t neu, Direction direction) {
    AlignmentStats s{pos, neg, neu, pos + neg + neu, direction == Direction::Up ? pos : neg, 0.0};
    if (s.total == 0) fail(ErrorCode::EmptySubset, "no sentiment labels in the selected subset");
    s.percent = 100.0 * static_cast<double>(s.aligned) / static_cast<double>(s.total);
    return s;
}

AlignmentStats alignment_stats(const std::vector<Sentiment>& labels, Direction direction) {
    std::size_t c[3] = {0, 0, 0};
    for (auto l : labels) ++c[static_cast<int>(l)];
    return alignment_stats(c[0], c[1], c[2], direction);
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Human: return "human";
        case Verdict::Synthetic: return "synthetic";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string_view sentiment_name(Sentiment s) {
    switch (s) {
        case Sentiment::Pos: return "pos";
        case Sentiment::Neg: return "neg";
        case Sentiment::Neu: return "neu";
    }
    return "neu";
}

Sentiment parse_sentiment(std::string_view s) {
    if (s == "pos") return Sentiment::Pos;
    if (s == "neg") return Sentiment::Neg;
    if (s == "neu") return Sentiment::Neu;
    fail(ErrorCode::InvalidArgument, "unknown sentiment label '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
    if (s == "up") return Direction::Up;
    if (s == "down") return Direction::Down;
    fail(ErrorCode::InvalidArgument, "direction must be 'up' or 'down'");
}

// ---------------------------------------------------------------------------

Eigen::VectorXd frac_features(const std::vector<lm::TokenScore>& scores) {
    const auto h = lm::histogram(scores);
    Eigen::VectorXd x(10);
    for (int i = 0; i < 10; ++i) x[i] = h.bins[static_cast<std::size_t>(i)] / 100.0;
    return x;
}

double channel_human_probability(const DetectorChannel& channel, std::string_view text,
                                 const std::optional<std::vector<TokenProb>>& sidecar, bool* sidecar_used) {
    if (sidecar_used) *sidecar_used = false;
    const auto tokens = lm::lm_tokens(text);
    if (tokens.empty()) return 0.5;  // nothing to score: uninformative
    std::vector<lm::TokenScore> scores;
    if (sidecar && sidecar->size() == tokens.size()) {
        scores = lm::score_tokens(*sidecar, tokens);
        if (sidecar_used) *sidecar_used = true;
    } else {
        scores = lm::score_tokens(channel.scorer, tokens);
    }
    return learn::predict_proba(channel.svm, frac_features(scores));
}

namespace {
constexpr const char* kBundleFormat = "trustscreen-detector";
constexpr int kBundleVersion = 1;
}  // namespace

void save_bundle(const DetectorBundle& bundle, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
    for (std::size_t c = 0; c < bundle.channels.size(); ++c) {
        bundle.channels[c].scorer.save(dir / ("channel" + std::to_string(c) + ".lm"));
        learn::save_model(bundle.channels[c].svm, dir / ("channel" + std::to_string(c) + ".svm.json"));
    }
    std::ofstream out(dir / "bundle.json");
    out << nlohmann::json{{"format", kBundleFormat}, {"version", kBundleVersion}, {"channels", bundle.channels.size()}}.dump()
        << '\n';
    if (!out) fail(ErrorCode::IoError, "cannot write bundle manifest in " + dir.string());
}

DetectorBundle load_bundle(const std::filesystem::path& dir) {
    std::ifstream in(dir / "bundle.json");
    if (!in) fail(ErrorCode::IoError, "no detector bundle at " + dir.string());
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("format") != kBundleFormat || j.at("version") != kBundleVersion || j.at("channels") != 2) {
            fail(ErrorCode::MalformedModelFile, "unsupported detector bundle manifest");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedModelFile, std::string("bundle manifest: ") + e.what());
    }
    DetectorBundle b;
    for (std::size_t c = 0; c < b.channels.size(); ++c) {
        b.channels[c].scorer = lm::NgramLm::load_file(dir / ("channel" + std::to_string(c) + ".lm"));
        b.channels[c].svm = learn::load_model(dir / ("channel" + std::to_string(c) + ".svm.json"));
        if (!b.channels[c].svm.calibrated()) fail(ErrorCode::MalformedModelFile, "detector SVM is not calibrated");
    }
    return b;
}

// ---------------------------------------------------------------------------

bool conjunction(const ReliabilityRecord& r) {
    return r.feature_filter.value_or(true) && (!r.neural_filter || r.neural_filter->flag) && r.arg_filter.value_or(true) &&
           r.subj_filter.value_or(true);
}

AssessOutput assess(const std::vector<Tweet>& tweets, const AssessConfig& cfg, const AssessResources& res) {
    validate(cfg.feature);
    validate(cfg.consensus);
    if (!in_open_unit(cfg.subjectivity_threshold)) fail(ErrorCode::ConfigError, "subjectivity threshold must lie in (0, 1)");
    if (cfg.enabled.feature && !res.profanity) fail(ErrorCode::ConfigError, "feature filter needs a profanity lexicon");
    if (cfg.enabled.neural && !res.detector) fail(ErrorCode::ConfigError, "neural filter needs a detector bundle");
    if (cfg.enabled.subjectivity && (!res.subjectivity || !res.sa)) {
        fail(ErrorCode::ConfigError, "subjectivity filter needs subjectivity and preprocessing lexicons");
    }

    struct Notes {
        bool no_discriminator = false;
        bool lexicon_only = false;
        bool no_sentiment = false;
        bool sidecar_tokens_mismatch = false;
    };
    AssessOutput out;
    out.records.resize(tweets.size());
    std::vector<Notes> notes(tweets.size());
    const std::array<double, 2> gltr_acc{cfg.consensus.detector_accuracies[1], cfg.consensus.detector_accuracies[2]};

    detail::parallel_for(tweets.size(), [&](std::size_t k) {
        const Tweet& t = tweets[k];
        ReliabilityRecord& r = out.records[k];
        Notes& note = notes[k];
        r.id = t.id;
        const ScoreSidecar* sc = nullptr;
        if (res.sidecars) {
            if (auto it = res.sidecars->records.find(t.id); it != res.sidecars->records.end()) sc = &it->second;
        }
        const auto cleaned = textprep::general_clean(t.text);

        if (cfg.enabled.feature) {
            auto f = feature_filter(t, cleaned, cfg.feature, *res.profanity, res.profanity_model);
            r.feature_filter = f.pass;
            for (auto& why : f.reasons) r.reasons.push_back("feature:" + why);
        }
        if (cfg.enabled.neural) {
            std::array<double, 2> p{};
            const std::optional<std::vector<TokenProb>> probs = sc ? sc->token_probs : std::nullopt;
            bool used = false;
            p[0] = channel_human_probability(res.detector->channels[0], t.text, probs, &used);
            p[1] = channel_human_probability(res.detector->channels[1], t.text);
            note.sidecar_tokens_mismatch = probs.has_value() && !used;
            NeuralOutcome n;
            n.roberta_real = sc ? sc->discriminator_real : std::nullopt;
            n.gltr_fake = gltr_weighted_fake(p, gltr_acc);
            const auto c = synthetic_consensus(n.roberta_real, n.gltr_fake, cfg.consensus);
            n.verdict = c.verdict;
            n.flag = c.flag;
            note.no_discriminator = c.discriminator_missing;
            if (!n.flag) r.reasons.push_back("neural:" + std::string(verdict_name(n.verdict)));
            r.neural_filter = n;
        }
        if (cfg.enabled.argumentation) {
            const auto tags = sc && sc->arg_tags ? *sc->arg_tags : heuristic_tag(cleaned.cleaned);
            r.arg_filter = argumentation_decide(tags, cfg.arg_mode);
            if (!*r.arg_filter) {
                r.reasons.emplace_back(cfg.arg_mode == ArgMode::Strict ? "argumentation:no-claim-and-premise"
                                                                       : "argumentation:no-premise");
            }
        }
        if (cfg.enabled.subjectivity) {
            const auto lex = lexicon_subjectivity(textprep::sa_preprocess(t.text, *res.sa), *res.subjectivity);
            const auto s = subjectivity_consensus(sc ? sc->subj_word : std::nullopt, sc ? sc->subj_sentence : std::nullopt,
                                                  lex, cfg.subjectivity_threshold);
            r.subj_filter = s.flag;
            note.lexicon_only = s.lexicon_only;
            if (!s.flag) r.reasons.emplace_back("subjectivity:subjective");
        }
        const auto sent = sentiment_annotate(sc ? sc->sentiment : std::nullopt);
        r.sentiment = {sent.label, sent.score};
        note.no_sentiment = sent.defaulted;
        r.reliable = conjunction(r);
    });

    auto count = [&](bool Notes::*field) {
        return std::count_if(notes.begin(), notes.end(), [&](const Notes& n) { return n.*field; });
    };
    if (auto c = count(&Notes::no_discriminator)) {
        out.warnings.push_back(std::to_string(c) + " tweets lack a discriminator score; only the n-gram clause can mark them synthetic");
    }
    if (auto c = count(&Notes::lexicon_only)) {
        out.warnings.push_back(std::to_string(c) + " tweets lack classifier subjectivity scores; decided by lexicon alone");
    }
    if (auto c = count(&Notes::no_sentiment)) {
        out.warnings.push_back(std::to_string(c) + " tweets lack sentiment scores; annotated neutral");
    }
    if (auto c = count(&Notes::sidecar_tokens_mismatch)) {
        out.warnings.push_back(std::to_string(c) +
                               " sidecar token-probability lists do not match local tokens; built-in scorer used");
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json opt_bool(const std::optional<bool>& b) { return b ? nlohmann::json(*b) : nlohmann::json(nullptr); }

std::optional<bool> bool_field(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<bool>();
}

Verdict parse_verdict(const std::string& s) {
    if (s == "human") return Verdict::Human;
    if (s == "synthetic") return Verdict::Synthetic;
    if (s == "inconclusive") return Verdict::Inconclusive;
    throw std::invalid_argument("unknown verdict " + s);
}

}  // namespace

std::string record_to_json_line(const ReliabilityRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["feature_filter"] = opt_bool(r.feature_filter);
    if (r.neural_filter) {
        const auto& n = *r.neural_filter;
        j["neural_filter"] = {{"verdict", verdict_name(n.verdict)},
                              {"flag", n.flag},
                              {"roberta_real", n.roberta_real ? nlohmann::json(*n.roberta_real) : nlohmann::json(nullptr)},
                              {"gltr_fake", n.gltr_fake}};
    } else {
        j["neural_filter"] = nullptr;
    }
    j["arg_filter"] = opt_bool(r.arg_filter);
    j["subj_filter"] = opt_bool(r.subj_filter);
    j["sentiment"] = {{"label", sentiment_name(r.sentiment.label)}, {"score", r.sentiment.score}};
    j["reliable"] = r.reliable;
    j["reasons"] = r.reasons;
    return j.dump();
}

ReliabilityRecord record_from_json_line(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        ReliabilityRecord r;
        r.id = j.at("id").get<std::string>();
        r.feature_filter = bool_field(j, "feature_filter");
        if (const auto& n = j.at("neural_filter"); !n.is_null()) {
            NeuralOutcome o;
            o.verdict = parse_verdict(n.at("verdict").get<std::string>());
            o.flag = n.at("flag").get<bool>();
            if (!n.at("roberta_real").is_null()) o.roberta_real = n.at("roberta_real").get<double>();
            o.gltr_fake = n.at("gltr_fake").get<double>();
            r.neural_filter = o;
        }
        r.arg_filter = bool_field(j, "arg_filter");
        r.subj_filter = bool_field(j, "subj_filter");
        r.sentiment.label = parse_sentiment(j.at("sentiment").at("label").get<std::string>());
        r.sentiment.score = j.at("sentiment").at("score").get<double>();
        if (!(r.sentiment.score >= 0.0 && r.sentiment.score <= 1.0)) throw std::invalid_argument("sentiment score");
        r.reliable = j.at("reliable").get<bool>();
        r.reasons = j.value("reasons", std::vector<std::string>{});
        if (r.reliable != conjunction(r)) throw std::invalid_argument("reliable disagrees with the filter flags");
        return r;
    } catch (const Error& e) {
        fail(ErrorCode::MalformedRow, e.what());
    } catch (const std::exception& e) {
        fail(ErrorCode::MalformedRow, std::string("assessment record: ") + e.what());
    }
}

void write_records(const std::filesystem::path& path, const std::vector<ReliabilityRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<ReliabilityRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::vector<ReliabilityRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(record_from_json_line(line));
        } catch (const Error& e) {
            fail(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace trustscreen::filters
