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
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "trustscreen/error.hpp"
#include "trustscreen/timeutil.hpp"

namespace trustscreen {

// ---------------------------------------------------------------------------
// Prices

struct PricePoint {
    Instant timestamp;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;
};

struct PriceSeries {
    std::string symbol;
    std::chrono::seconds interval{0};  ///< smallest spacing; larger gaps are multiples
    std::vector<PricePoint> points;

    std::vector<double> closes() const;
};

/// Strict: the first bad row aborts with MalformedRow (line number in the
/// message), duplicate timestamps with NonMonotonicTimestamp.
PriceSeries parse_price_csv(const std::filesystem::path& path);
PriceSeries parse_price_csv_text(const std::string& text, std::string symbol = {});

// ---------------------------------------------------------------------------
// Tweets

enum class Label { Reliable, Unreliable };

struct EngagementMetrics {
    std::int64_t retweet_count = 0;
    std::int64_t reply_count = 0;
    std::int64_t like_count = 0;
    std::int64_t quote_count = 0;

    bool operator==(const EngagementMetrics&) const = default;
};

struct AuthorProfile {
    std::int64_t followers_count = 0;
    std::int64_t following_count = 0;
    std::int64_t tweet_count = 0;
    std::int64_t listed_count = 0;
    Instant created_at{};

    bool operator==(const AuthorProfile&) const = default;
};

/// Entity strings are stored without their # $ @ sigils.
struct Entities {
    std::vector<std::string> hashtags;
    std::vector<std::string> cashtags;
    std::vector<std::string> mentions;
    std::vector<std::string> urls;
    std::vector<std::string> annotations;

    bool operator==(const Entities&) const = default;
};

struct Tweet {
    std::string id;
    std::string text;
    Instant created_at{};
    std::string lang;
    bool is_retweet = false;
    bool verified = false;
    EngagementMetrics metrics;
    AuthorProfile author;
    Entities entities;
    std::optional<Label> label;

    bool operator==(const Tweet&) const = default;
};

struct RejectedLine {
    std::size_t line = 0;
    std::string reason;
};

struct TweetStream {
    std::vector<Tweet> tweets;
    std::vector<RejectedLine> rejects;
};

TweetStream parse_tweet_stream(const std::filesystem::path& path);
TweetStream parse_tweet_lines(std::istream& in);

/// Throws InvalidArgument on the first violated invariant.
Tweet tweet_from_json_line(const std::string& line);
std::string tweet_to_json_line(const Tweet& tweet);

void write_tweet_stream(const std::filesystem::path& path, const std::vector<Tweet>& tweets);

std::string_view label_name(Label label);

// ---------------------------------------------------------------------------
// Score sidecars

enum class ArgTag { Claim, Premise, Outside };

struct SentimentProbs {
    double pos = 0.0;
    double neg = 0.0;
    double neu = 0.0;
};

struct TokenProb {
    double actual_prob = 0.0;
    double top_prob = 0.0;
};

struct ScoreSidecar {
    std::string id;
    std::optional<double> discriminator_real;
    std::optional<double> subj_word;
    std::optional<double> subj_sentence;
    std::optional<SentimentProbs> sentiment;
    std::optional<std::vector<ArgTag>> arg_tags;
    std::optional<std::vector<TokenProb>> token_probs;
};

struct SidecarSet {
    std::map<std::string, ScoreSidecar> records;
    std::optional<std::string> header;  ///< raw JSON of an id-less header record
    std::vector<std::string> warnings;
    std::size_t duplicate_count = 0;
};

/// ProbabilityOutOfRange on the first invalid record; unknown fields and
/// duplicate ids only produce warnings (later record wins).
SidecarSet parse_sidecar(const std::filesystem::path& path);
SidecarSet parse_sidecar_lines(std::istream& in);

std::string_view arg_tag_name(ArgTag tag);

// ---------------------------------------------------------------------------
// Lexicons

enum class LexiconKind { Subjectivity, Profanity, SegmentationFrequencies };

struct Lexicon {
    LexiconKind kind = LexiconKind::Subjectivity;
    std::unordered_map<std::string, double> scores;        ///< subjectivity
    std::set<std::string> words;                           ///< profanity
    std::unordered_map<std::string, std::uint64_t> counts;  ///< frequencies
    std::uint64_t total_count = 0;

    std::size_t size() const;
};

/// Keys are case-folded. ScoreOutOfRange for subjectivity scores outside
/// [0,1]; EmptyLexicon when the file has no entries.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconKind kind);
Lexicon parse_lexicon(std::istream& in, LexiconKind kind);

/// Two-column `key<TAB>value` table (contractions, emoji names).
std::vector<std::pair<std::string, std::string>> load_pair_table(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
std::string ascii_lower(std::string_view s);

}  // namespace trustscreen
