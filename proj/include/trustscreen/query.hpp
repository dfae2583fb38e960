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

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustscreen/ingest.hpp"

namespace trustscreen::query {

// ---------------------------------------------------------------------------
// Symbols

struct SymbolInfo {
    std::string ticker;
    std::string ric;
    std::vector<std::string> names;

    bool operator==(const SymbolInfo&) const = default;
};

/// Rows of `ticker<TAB>ric<TAB>name1|name2|...`.
class SymbolTable {
public:
    void add(SymbolInfo info);
    const std::vector<SymbolInfo>& entries() const { return entries_; }

    /// Ticker (case-insensitive) or RIC (case-insensitive). Throws UnknownSymbol.
    const SymbolInfo& lookup(const std::string& raw) const;

private:
    std::vector<SymbolInfo> entries_;
};

SymbolTable load_symbol_table(const std::filesystem::path& path);
SymbolTable parse_symbol_table(std::istream& in);

SymbolInfo normalize_symbol(const std::string& raw, const SymbolTable& table);

// ---------------------------------------------------------------------------
// Queries

struct QueryFlags {
    std::string lang = "en";  ///< empty = any language
    bool exclude_retweets = true;
    bool verified_only = false;
    bool exclude_promoted = true;  ///< rendered; offline records carry no promotion marker

    bool operator==(const QueryFlags&) const = default;
};

/// Half-open [start, end).
struct DateRange {
    Instant start;
    Instant end;

    bool operator==(const DateRange&) const = default;
};

enum class Group { Domain, Names, Tags, Related, Keywords };
inline constexpr Group kAllGroups[] = {Group::Domain, Group::Names, Group::Tags, Group::Related, Group::Keywords};
std::string_view group_name(Group g);
Group group_from_name(std::string_view name);

/**
 * Conjunction of OR-groups. A tweet matches when it matches every
 * non-empty group, satisfies every flag and falls inside `date_range`.
 * Tag terms carry their sigil (`$TWTR`, `#earnings`).
 */
struct SearchQuery {
    std::vector<std::string> domain_terms;
    std::vector<std::string> name_terms;
    std::vector<std::string> tag_terms;
    std::vector<std::string> related_entities;
    std::vector<std::string> descriptive_keywords;
    QueryFlags flags;
    std::optional<DateRange> date_range;

    std::vector<std::string>& group(Group g);
    const std::vector<std::string>& group(Group g) const;
    bool all_groups_empty() const;
    bool contains(Group g, const std::string& term) const;

    bool operator==(const SearchQuery&) const = default;
};

/// Throws ConfigError unless 1 <= days and (3 <= days <= 14 or allow_any_days).
SearchQuery build_initial_query(Instant anomaly_time, const SymbolInfo& symbol, int days,
                                bool verified_only = false, bool allow_any_days = false);

/// Lower-cased whole tokens; `$ # @` stay attached as prefixes, every other
/// non-alphanumeric byte separates tokens.
std::vector<std::string> tokenize_for_match(std::string_view text);

bool term_matches(const std::string& term, const Tweet& tweet, const std::vector<std::string>& tokens);
bool query_matches(const SearchQuery& query, const Tweet& tweet);

/// Corpus order preserved. Throws ConfigError when every group is empty.
std::vector<Tweet> corpus_search(const SearchQuery& query, const std::vector<Tweet>& corpus);

// ---------------------------------------------------------------------------
// Ranking

struct RankParams {
    double lambda = 1.0;
    std::chrono::seconds tau = std::chrono::hours(24);
    double verified_bonus = 0.5;
};

/// log1p(engagement) + lambda*exp(-age/tau) + bonus*verified; age clamped at 0.
double prf_score(const Tweet& tweet, Instant now, const RankParams& params = {});

/// Descending score, ties by ascending id.
std::vector<Tweet> rank_for_prf(std::vector<Tweet> matches, Instant now, const RankParams& params = {});

// ---------------------------------------------------------------------------
// Pseudo-relevance feedback

struct PrfOptions {
    std::size_t gamma = 10;
    std::size_t top_k_terms = 2;
    int max_iters = 50;
    int stabilization = 5;
    RankParams rank;
};

struct PrfState {
    int iteration = 0;
    std::size_t gamma = 10;
    std::map<std::string, int> candidate_counts;  ///< last iteration's tallies, sigils attached
    int stable_iterations = 0;
    bool converged = false;
};

struct TermAddition {
    Group group = Group::Tags;
    std::string term;

    bool operator==(const TermAddition&) const = default;
};

struct PrfIteration {
    int iteration = 0;
    std::size_t matched = 0;
    std::vector<std::string> top_ids;
    std::vector<std::pair<std::string, int>> hashtags;  ///< tallies, count-descending
    std::vector<std::pair<std::string, int>> cashtags;
    std::vector<std::pair<std::string, int>> annotations;
    std::vector<TermAddition> added;
};

struct PrfTrace {
    SearchQuery initial;
    std::vector<PrfIteration> iterations;
    bool converged = false;
    std::string note;
};

struct PrfResult {
    SearchQuery query;
    PrfState state;
    PrfTrace trace;
};

/// Throws ConfigError when gamma == 0. The ranking clock is the end of the
/// query's date range (or the newest corpus record when the range is open).
PrfResult prf_expand(const SearchQuery& query, const std::vector<Tweet>& corpus, const PrfOptions& options = {});

/// Re-applies every recorded addition to the trace's initial query.
SearchQuery replay_trace(const PrfTrace& trace);

std::string trace_to_json(const PrfTrace& trace);
PrfTrace trace_from_json(const std::string& text);

std::string query_to_json(const SearchQuery& query);
SearchQuery query_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Query strings

/**
 * `(a OR b) (c) ... lang:en -is:retweet -is:nullcast is:verified since:... until:...`.
 * Groups appear in Group order; an empty group followed by a non-empty one
 * renders as `()` so positions survive parsing, trailing empty groups are
 * omitted. Terms with spaces, quotes, parentheses or the bare word OR are
 * double-quoted.
 */
std::string compose_query_string(const SearchQuery& query);

/// Inverse of compose_query_string. Throws InvalidArgument on bad syntax.
SearchQuery parse_query_string(const std::string& text);

}  // namespace trustscreen::query
