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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trustscreen/ingest.hpp"
#include "trustscreen/learn.hpp"
#include "trustscreen/lmscore.hpp"
#include "trustscreen/textprep.hpp"

namespace trustscreen::filters {

// ---------------------------------------------------------------------------
// Feature-based screening

struct FeatureThresholds {
    double beta = 0.5;  ///< max share of tag/link/mention tokens, in (0, 1]
    double profanity_threshold = 0.8;
    EngagementMetrics min_engagement{};  ///< pass needs one metric above its minimum
    std::int64_t min_account_age_days = 30;
    std::int64_t min_followers = 0;
    std::int64_t min_tweets = 0;
};

/// Throws ConfigError when beta or the profanity threshold is out of range.
void validate(const FeatureThresholds& th);

/// Logistic bag-of-words model: p = sigmoid(bias + sum of token weights).
struct ProfanityModel {
    std::map<std::string, double> weights;
    double bias = 0.0;
};

/// `word<TAB>weight` rows plus one `<bias><TAB>value` row; '#' comments.
ProfanityModel load_profanity_model(const std::filesystem::path& path);

/// Model probability when a model is given, else the share of tokens found in
/// the profanity lexicon.
double profanity_probability(std::string_view cleaned_text, const Lexicon& lexicon,
                             const ProfanityModel* model = nullptr);

struct FeatureResult {
    bool pass = true;
    double tag_density = 0.0;
    double profanity = 0.0;
    std::vector<std::string> reasons;  ///< every violated rule
};

/// Reasons: tag-density, zero-engagement, profanity, account-age,
/// low-followers, low-tweet-count. Account age is measured at the tweet's
/// own timestamp.
FeatureResult feature_filter(const Tweet& tweet, const textprep::CleanText& cleaned, const FeatureThresholds& th,
                             const Lexicon& profanity, const ProfanityModel* model = nullptr);

// ---------------------------------------------------------------------------
// Synthetic-text consensus

enum class ConsensusMode { Recall, Precision };
enum class Verdict { Human, Synthetic, Inconclusive };

struct ConsensusConfig {
    double roberta_real_hi = 0.7;
    double roberta_fake_hi = 0.7;
    double gltr_fake_lo = 0.4;
    double gltr_fake_hi = 0.9;
    /// discriminator, first n-gram channel, second n-gram channel
    std::array<double, 3> detector_accuracies{0.92, 0.81, 0.69};
    ConsensusMode mode = ConsensusMode::Recall;
};

void validate(const ConsensusConfig& cfg);

/// Largest-remainder integer percentages; ConfigError unless all > 0.
std::array<int, 3> derive_consensus_weights(const std::array<double, 3>& accuracies);

/// Accuracy-weighted mean of the channels' fake probabilities (1 - p_human).
double gltr_weighted_fake(const std::array<double, 2>& p_human, const std::array<double, 2>& accuracies);

struct ConsensusResult {
    Verdict verdict = Verdict::Inconclusive;
    bool flag = false;
    bool discriminator_missing = false;
};

/// The human rule is tested before the synthetic rule; the two cannot both
/// hold for thresholds at or above 0.5.
ConsensusResult synthetic_consensus(std::optional<double> roberta_real, double gltr_fake, const ConsensusConfig& cfg);

// ---------------------------------------------------------------------------
// Argumentation

enum class ArgMode { Relaxed, Strict };

bool argumentation_decide(const std::vector<ArgTag>& tags, ArgMode mode);

/// One tag per whitespace token. Clauses end at , ; . ! ? and before a
/// discourse marker (because, since, due to, as, after); the clause after a
/// marker is PREMISE. Otherwise a clause holding should/must/will/is going to,
/// or opening with an imperative trading verb, is CLAIM.
std::vector<ArgTag> heuristic_tag(std::string_view text);

// ---------------------------------------------------------------------------
// Subjectivity

struct LexiconSubjectivity {
    double score = 0.0;
    std::size_t coverage = 0;
    bool no_coverage = true;
};

LexiconSubjectivity lexicon_subjectivity(std::string_view preprocessed_text, const Lexicon& lexicon);

struct SubjectivityResult {
    bool subjective = false;
    bool flag = true;  ///< true = objective
    bool lexicon_only = false;
};

/**
 * Both classifiers present: agreement decides, disagreement defers to the
 * lexicon score. A missing classifier makes the decision lexicon-only. With no
 * input at all this throws InvalidArgument.
 */
SubjectivityResult subjectivity_consensus(std::optional<double> word_clf, std::optional<double> sent_clf,
                                          std::optional<LexiconSubjectivity> lex, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Sentiment

enum class Sentiment { Pos, Neg, Neu };

struct SentimentResult {
    Sentiment label = Sentiment::Neu;
    double score = 0.0;
    bool defaulted = false;  ///< no sidecar scores
};

/// Argmax with ties broken pos > neg > neu; score = |pos - neg|.
SentimentResult sentiment_annotate(const std::optional<SentimentProbs>& probs);

enum class Direction { Up, Down };

struct AlignmentStats {
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::size_t neu = 0;
    std::size_t total = 0;
    std::size_t aligned = 0;
    double percent = 0.0;
};

/// EmptySubset when there are no labels.
AlignmentStats alignment_stats(std::size_t pos, std::size_t neg, std::size_t neu, Direction direction);
AlignmentStats alignment_stats(const std::vector<Sentiment>& labels, Direction direction);

std::string_view verdict_name(Verdict v);
std::string_view sentiment_name(Sentiment s);
Sentiment parse_sentiment(std::string_view s);
Direction parse_direction(std::string_view s);

// ---------------------------------------------------------------------------
// Detector bundle: one n-gram scorer and one calibrated SVM per channel

struct DetectorChannel {
    lm::NgramLm scorer;
    learn::SvmModel svm;
};

struct DetectorBundle {
    std::array<DetectorChannel, 2> channels;
};

/// Histogram bins as fractions in [0, 1], the SVM's feature layout.
Eigen::VectorXd frac_features(const std::vector<lm::TokenScore>& scores);

/// P(human) from one channel. Sidecar token probabilities, when present and
/// aligned with the channel's tokens, replace the built-in scorer.
double channel_human_probability(const DetectorChannel& channel, std::string_view text,
                                 const std::optional<std::vector<TokenProb>>& sidecar = std::nullopt,
                                 bool* sidecar_used = nullptr);

void save_bundle(const DetectorBundle& bundle, const std::filesystem::path& dir);
DetectorBundle load_bundle(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Assessment

struct EnabledFilters {
    bool feature = true;
    bool neural = true;
    bool argumentation = true;
    bool subjectivity = true;
};

struct AssessConfig {
    FeatureThresholds feature;
    ConsensusConfig consensus;
    ArgMode arg_mode = ArgMode::Relaxed;
    double subjectivity_threshold = 0.5;
    EnabledFilters enabled;
};

struct AssessResources {
    const Lexicon* profanity = nullptr;
    const Lexicon* subjectivity = nullptr;
    const textprep::SaLexicons* sa = nullptr;
    const ProfanityModel* profanity_model = nullptr;  ///< optional
    const DetectorBundle* detector = nullptr;         ///< needed when neural is enabled
    const SidecarSet* sidecars = nullptr;             ///< optional
};

struct NeuralOutcome {
    Verdict verdict = Verdict::Inconclusive;
    bool flag = false;
    std::optional<double> roberta_real;
    double gltr_fake = 0.0;
};

struct SentimentOutcome {
    Sentiment label = Sentiment::Neu;
    double score = 0.0;
};

/// Flags of disabled filters are absent and do not enter `reliable`.
struct ReliabilityRecord {
    std::string id;
    std::optional<bool> feature_filter;
    std::optional<NeuralOutcome> neural_filter;
    std::optional<bool> arg_filter;
    std::optional<bool> subj_filter;
    SentimentOutcome sentiment;
    bool reliable = true;
    std::vector<std::string> reasons;
};

/// AND of the enabled flags.
bool conjunction(const ReliabilityRecord& r);

struct AssessOutput {
    std::vector<ReliabilityRecord> records;  ///< input order
    std::vector<std::string> warnings;       ///< corpus level, one line per kind with a count
};

/// ConfigError for invalid thresholds or a missing resource an enabled filter needs.
AssessOutput assess(const std::vector<Tweet>& tweets, const AssessConfig& cfg, const AssessResources& res);

std::string record_to_json_line(const ReliabilityRecord& r);
ReliabilityRecord record_from_json_line(const std::string& line);
void write_records(const std::filesystem::path& path, const std::vector<ReliabilityRecord>& records);
std::vector<ReliabilityRecord> read_records(const std::filesystem::path& path);

}  // namespace trustscreen::filters
