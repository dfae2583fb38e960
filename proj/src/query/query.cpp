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
#include "trustscreen/query.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace trustscreen::query {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_sigil(char c) { return c == '$' || c == '#' || c == '@'; }

}  // namespace

// ---------------------------------------------------------------------------
// Symbols

void SymbolTable::add(SymbolInfo info) { entries_.push_back(std::move(info)); }

const SymbolInfo& SymbolTable::lookup(const std::string& raw) const {
    const std::string key = ascii_lower(trim(raw));
    for (const auto& e : entries_) {
        if (ascii_lower(e.ticker) == key || ascii_lower(e.ric) == key) return e;
    }
    throw Error(ErrorCode::UnknownSymbol, "unknown symbol '" + raw + "'");
}

SymbolTable parse_symbol_table(std::istream& in) {
    SymbolTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 3 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
            throw Error(ErrorCode::MalformedRow, "symbol table line " + std::to_string(lineno) +
                                                     ": expected ticker<TAB>ric<TAB>names");
        }
        SymbolInfo info{trim(cols[0]), trim(cols[1]), {}};
        for (const auto& n : split(cols[2], '|')) {
            if (!trim(n).empty()) info.names.push_back(trim(n));
        }
        table.add(std::move(info));
    }
    return table;
}

SymbolTable load_symbol_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_symbol_table(in);
}

SymbolInfo normalize_symbol(const std::string& raw, const SymbolTable& table) { return table.lookup(raw); }

// ---------------------------------------------------------------------------
// Queries

std::string_view group_name(Group g) {
    switch (g) {
        case Group::Domain: return "domain";
        case Group::Names: return "names";
        case Group::Tags: return "tags";
        case Group::Related: return "related";
        case Group::Keywords: return "keywords";
    }
    return "?";
}

Group group_from_name(std::string_view name) {
    for (Group g : kAllGroups) {
        if (group_name(g) == name) return g;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown query group '" + std::string(name) + "'");
}

std::vector<std::string>& SearchQuery::group(Group g) {
    return const_cast<std::vector<std::string>&>(std::as_const(*this).group(g));
}

const std::vector<std::string>& SearchQuery::group(Group g) const {
    switch (g) {
        case Group::Domain: return domain_terms;
        case Group::Names: return name_terms;
        case Group::Tags: return tag_terms;
        case Group::Related: return related_entities;
        case Group::Keywords: return descriptive_keywords;
    }
    return domain_terms;
}

bool SearchQuery::all_groups_empty() const {
    return std::all_of(std::begin(kAllGroups), std::end(kAllGroups), [&](Group g) { return group(g).empty(); });
}

bool SearchQuery::contains(Group g, const std::string& term) const {
    const auto& terms = group(g);
    return std::find(terms.begin(), terms.end(), term) != terms.end();
}

SearchQuery build_initial_query(Instant anomaly_time, const SymbolInfo& symbol, int days, bool verified_only,
                                bool allow_any_days) {
    if (days < 1 || (!allow_any_days && (days < 3 || days > 14))) {
        throw Error(ErrorCode::ConfigError, "look-back D must lie in [3, 14] days (got " + std::to_string(days) + ")");
    }
    SearchQuery q;
    q.domain_terms = {"stock", "price"};
    q.name_terms = symbol.names.empty() ? std::vector<std::string>{symbol.ticker} : symbol.names;
    q.flags.verified_only = verified_only;
    const Instant day = floor_to_day(anomaly_time);
    q.date_range = DateRange{day - std::chrono::days(days), day + std::chrono::days(1)};
    return q;
}

std::vector<std::string> tokenize_for_match(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        // a bare sigil is not a token
        if (!cur.empty() && !(cur.size() == 1 && is_sigil(cur[0]))) out.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || u >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (is_sigil(c) && cur.empty()) {
            cur.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

namespace {

bool entity_equals(const std::vector<std::string>& entities, const std::string& lowered) {
    return std::any_of(entities.begin(), entities.end(), [&](const std::string& e) { return ascii_lower(e) == lowered; });
}

bool contains_sequence(const std::vector<std::string>& tokens, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > tokens.size()) return false;
    return std::search(tokens.begin(), tokens.end(), needle.begin(), needle.end()) != tokens.end();
}

}  // namespace

bool term_matches(const std::string& term, const Tweet& tweet, const std::vector<std::string>& tokens) {
    if (term.empty()) return false;
    const std::string lowered = ascii_lower(term);
    if (is_sigil(term[0])) {
        const std::string bare = lowered.substr(1);
        const auto& e = tweet.entities;
        const auto& pool = term[0] == '$' ? e.cashtags : term[0] == '#' ? e.hashtags : e.mentions;
        if (entity_equals(pool, bare)) return true;
        return std::find(tokens.begin(), tokens.end(), lowered) != tokens.end();
    }
    const auto& e = tweet.entities;
    if (entity_equals(e.annotations, lowered) || entity_equals(e.cashtags, lowered) ||
        entity_equals(e.hashtags, lowered) || entity_equals(e.mentions, lowered)) {
        return true;
    }
    return contains_sequence(tokens, tokenize_for_match(term));
}

bool query_matches(const SearchQuery& query, const Tweet& tweet) {
    const auto& f = query.flags;
    if (!f.lang.empty() && ascii_lower(tweet.lang) != ascii_lower(f.lang)) return false;
    if (f.exclude_retweets && tweet.is_retweet) return false;
    if (f.verified_only && !tweet.verified) return false;
    if (query.date_range &&
        (tweet.created_at < query.date_range->start || !(tweet.created_at < query.date_range->end))) {
        return false;
    }
    const auto tokens = tokenize_for_match(tweet.text);
    for (Group g : kAllGroups) {
        const auto& terms = query.group(g);
        if (terms.empty()) continue;
        const bool any = std::any_of(terms.begin(), terms.end(),
                                     [&](const std::string& t) { return term_matches(t, tweet, tokens); });
        if (!any) return false;
    }
    return true;
}

std::vector<Tweet> corpus_search(const SearchQuery& query, const std::vector<Tweet>& corpus) {
    if (query.all_groups_empty()) throw Error(ErrorCode::ConfigError, "refusing a query with no term groups");
    std::vector<Tweet> out;
    for (const auto& t : corpus) {
        if (query_matches(query, t)) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ranking

double prf_score(const Tweet& tweet, Instant now, const RankParams& params) {
    const auto& m = tweet.metrics;
    const double engagement =
        static_cast<double>(m.like_count + m.retweet_count + m.reply_count + m.quote_count);
    const double age = std::max(0.0, epoch_seconds(now) - epoch_seconds(tweet.created_at));
    const double tau = static_cast<double>(params.tau.count());
    return std::log1p(engagement) + params.lambda * std::exp(-age / tau) +
           (tweet.verified ? params.verified_bonus : 0.0);
}

std::vector<Tweet> rank_for_prf(std::vector<Tweet> matches, Instant now, const RankParams& params) {
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) keyed.emplace_back(prf_score(matches[i], now, params), i);
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return matches[a.second].id < matches[b.second].id;
    });
    std::vector<Tweet> out;
    out.reserve(matches.size());
    for (const auto& k : keyed) out.push_back(std::move(matches[k.second]));
    return out;
}

// ---------------------------------------------------------------------------
// Pseudo-relevance feedback

namespace {

using Tally = std::vector<std::pair<std::string, int>>;

Tally sorted_tally(const std::map<std::string, int>& counts) {
    Tally t(counts.begin(), counts.end());
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return t;
}

Instant ranking_clock(const SearchQuery& q, const std::vector<Tweet>& corpus) {
    if (q.date_range) return q.date_range->end;
    Instant latest{};
    for (const auto& t : corpus) latest = std::max(latest, t.created_at);
    return latest;
}

}  // namespace

PrfResult prf_expand(const SearchQuery& query, const std::vector<Tweet>& corpus, const PrfOptions& options) {
    if (options.gamma == 0) throw Error(ErrorCode::ConfigError, "PRF gamma must be at least 1");
    if (options.max_iters < 1) throw Error(ErrorCode::ConfigError, "PRF max_iters must be at least 1");

    PrfResult r;
    r.query = query;
    r.trace.initial = query;
    r.state.gamma = options.gamma;
    const Instant now = ranking_clock(query, corpus);

    while (r.state.iteration < options.max_iters) {
        ++r.state.iteration;
        PrfIteration it;
        it.iteration = r.state.iteration;

        const auto ranked = rank_for_prf(corpus_search(r.query, corpus), now, options.rank);
        it.matched = ranked.size();
        std::map<std::string, int> hashtags;
        std::map<std::string, int> cashtags;
        std::map<std::string, int> annotations;
        for (std::size_t i = 0; i < ranked.size() && i < options.gamma; ++i) {
            const auto& t = ranked[i];
            it.top_ids.push_back(t.id);
            if (r.query.flags.verified_only && !t.verified) continue;
            for (const auto& h : t.entities.hashtags) ++hashtags["#" + h];
            for (const auto& c : t.entities.cashtags) ++cashtags["$" + c];
            for (const auto& a : t.entities.annotations) ++annotations[a];
        }
        it.hashtags = sorted_tally(hashtags);
        it.cashtags = sorted_tally(cashtags);
        it.annotations = sorted_tally(annotations);

        r.state.candidate_counts.clear();
        for (const auto* m : {&hashtags, &cashtags, &annotations}) r.state.candidate_counts.insert(m->begin(), m->end());

        auto take = [&](const Tally& tally, Group g) {
            for (std::size_t i = 0; i < tally.size() && i < options.top_k_terms; ++i) {
                if (r.query.contains(g, tally[i].first)) continue;
                r.query.group(g).push_back(tally[i].first);
                it.added.push_back({g, tally[i].first});
            }
        };
        take(it.hashtags, Group::Tags);
        take(it.cashtags, Group::Tags);
        take(it.annotations, Group::Related);

        r.state.stable_iterations = it.added.empty() ? r.state.stable_iterations + 1 : 0;
        r.trace.iterations.push_back(std::move(it));
        if (r.state.stable_iterations >= options.stabilization) {
            r.state.converged = true;
            break;
        }
    }
    r.trace.converged = r.state.converged;
    if (!r.state.converged) {
        r.trace.note = "max_iters (" + std::to_string(options.max_iters) + ") reached before " +
                       std::to_string(options.stabilization) + " stable iterations";
    }
    return r;
}

SearchQuery replay_trace(const PrfTrace& trace) {
    SearchQuery q = trace.initial;
    for (const auto& it : trace.iterations) {
        for (const auto& a : it.added) {
            if (!q.contains(a.group, a.term)) q.group(a.group).push_back(a.term);
        }
    }
    return q;
}

namespace {

nlohmann::json query_json(const SearchQuery& q) {
    nlohmann::json j;
    for (Group g : kAllGroups) j[std::string(group_name(g))] = q.group(g);
    j["flags"] = {{"lang", q.flags.lang},
                  {"exclude_retweets", q.flags.exclude_retweets},
                  {"verified_only", q.flags.verified_only},
                  {"exclude_promoted", q.flags.exclude_promoted}};
    if (q.date_range) {
        j["date_range"] = {format_instant(q.date_range->start), format_instant(q.date_range->end)};
    } else {
        j["date_range"] = nullptr;
    }
    j["query_string"] = compose_query_string(q);
    return j;
}

Instant instant_field(const nlohmann::json& v) {
    const auto t = parse_instant(v.get<std::string>());
    if (!t) throw Error(ErrorCode::InvalidArgument, "bad timestamp in query JSON");
    return *t;
}

SearchQuery query_from(const nlohmann::json& j) {
    SearchQuery q;
    for (Group g : kAllGroups) q.group(g) = j.at(std::string(group_name(g))).get<std::vector<std::string>>();
    const auto& f = j.at("flags");
    q.flags.lang = f.at("lang").get<std::string>();
    q.flags.exclude_retweets = f.at("exclude_retweets").get<bool>();
    q.flags.verified_only = f.at("verified_only").get<bool>();
    q.flags.exclude_promoted = f.at("exclude_promoted").get<bool>();
    if (j.contains("date_range") && !j["date_range"].is_null()) {
        q.date_range = DateRange{instant_field(j["date_range"].at(0)), instant_field(j["date_range"].at(1))};
    }
    return q;
}

nlohmann::json tally_json(const Tally& t) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [k, v] : t) a.push_back({k, v});
    return a;
}

Tally tally_from(const nlohmann::json& j) {
    Tally t;
    for (const auto& e : j) t.emplace_back(e.at(0).get<std::string>(), e.at(1).get<int>());
    return t;
}

}  // namespace

std::string query_to_json(const SearchQuery& query) { return query_json(query).dump(2); }

SearchQuery query_from_json(const std::string& text) {
    try {
        return query_from(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad query JSON: ") + e.what());
    }
}

std::string trace_to_json(const PrfTrace& trace) {
    nlohmann::json j;
    j["format"] = "trustscreen-prf-trace";
    j["version"] = 1;
    j["initial_query"] = query_json(trace.initial);
    j["final_query"] = query_json(replay_trace(trace));
    j["converged"] = trace.converged;
    j["note"] = trace.note;
    auto& its = j["iterations"] = nlohmann::json::array();
    for (const auto& it : trace.iterations) {
        nlohmann::json e;
        e["iteration"] = it.iteration;
        e["matched"] = it.matched;
        e["top_ids"] = it.top_ids;
        e["hashtags"] = tally_json(it.hashtags);
        e["cashtags"] = tally_json(it.cashtags);
        e["annotations"] = tally_json(it.annotations);
        auto& added = e["added"] = nlohmann::json::array();
        for (const auto& a : it.added) added.push_back({{"group", group_name(a.group)}, {"term", a.term}});
        its.push_back(std::move(e));
    }
    return j.dump(2);
}

PrfTrace trace_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", "") != "trustscreen-prf-trace" || j.value("version", 0) != 1) {
            throw Error(ErrorCode::InvalidArgument, "not a version-1 PRF trace");
        }
        PrfTrace t;
        t.initial = query_from(j.at("initial_query"));
        t.converged = j.at("converged").get<bool>();
        t.note = j.value("note", "");
        for (const auto& e : j.at("iterations")) {
            PrfIteration it;
            it.iteration = e.at("iteration").get<int>();
            it.matched = e.at("matched").get<std::size_t>();
            it.top_ids = e.at("top_ids").get<std::vector<std::string>>();
            it.hashtags = tally_from(e.at("hashtags"));
            it.cashtags = tally_from(e.at("cashtags"));
            it.annotations = tally_from(e.at("annotations"));
            for (const auto& a : e.at("added")) {
                it.added.push_back({group_from_name(a.at("group").get<std::string>()), a.at("term").get<std::string>()});
            }
            t.iterations.push_back(std::move(it));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad PRF trace: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Query strings

namespace {

bool needs_quotes(const std::string& term) {
    if (term.empty() || term == "OR") return true;
    for (char c : term) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '"' || c == '\\') {
            return true;
        }
    }
    // a leading flag-like prefix would be read back as a parameter
    return term.find(':') != std::string::npos || term[0] == '-';
}

std::string render_term(const std::string& term) {
    if (!needs_quotes(term)) return term;
    std::string out = "\"";
    for (char c : term) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string render_instant(Instant t) { return floor_to_day(t) == t ? format_date(t) : format_instant(t); }

}  // namespace

std::string compose_query_string(const SearchQuery& query) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < std::size(kAllGroups); ++i) {
        if (!query.group(kAllGroups[i]).empty()) last = i + 1;
    }
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < last; ++i) {
        const auto& terms = query.group(kAllGroups[i]);
        std::string g = "(";
        for (std::size_t k = 0; k < terms.size(); ++k) {
            if (k > 0) g += " OR ";
            g += render_term(terms[k]);
        }
        g += ")";
        parts.push_back(std::move(g));
    }
    const auto& f = query.flags;
    if (!f.lang.empty()) parts.push_back("lang:" + f.lang);
    if (f.exclude_retweets) parts.push_back("-is:retweet");
    if (f.exclude_promoted) parts.push_back("-is:nullcast");
    if (f.verified_only) parts.push_back("is:verified");
    if (query.date_range) {
        parts.push_back("since:" + render_instant(query.date_range->start));
        parts.push_back("until:" + render_instant(query.date_range->end));
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += parts[i];
    }
    return out;
}

namespace {

class QueryLexer {
public:
    explicit QueryLexer(const std::string& s) : s_(s) {}

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() {
        skip_space();
        return pos_ >= s_.size();
    }
    char peek() { return done() ? '\0' : s_[pos_]; }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    /// Quoted or bare term; `quoted` reports which.
    std::string term(bool& quoted) {
        skip_space();
        quoted = pos_ < s_.size() && s_[pos_] == '"';
        std::string out;
        if (quoted) {
            ++pos_;
            while (true) {
                if (pos_ >= s_.size()) fail("unterminated quote");
                char c = s_[pos_++];
                if (c == '"') break;
                if (c == '\\') {
                    if (pos_ >= s_.size()) fail("dangling escape");
                    c = s_[pos_++];
                }
                out.push_back(c);
            }
            return out;
        }
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
               s_[pos_] != ')') {
            out.push_back(s_[pos_++]);
        }
        if (out.empty()) fail("expected a term");
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::InvalidArgument, "query string: " + what + " at offset " + std::to_string(pos_));
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

SearchQuery parse_query_string(const std::string& text) {
    SearchQuery q;
    q.flags.lang.clear();
    q.flags.exclude_retweets = false;
    q.flags.exclude_promoted = false;
    q.flags.verified_only = false;

    QueryLexer lex(text);
    std::size_t group_index = 0;
    while (lex.peek() == '(') {
        if (group_index >= std::size(kAllGroups)) lex.fail("too many groups");
        lex.expect('(');
        auto& terms = q.group(kAllGroups[group_index++]);
        if (lex.peek() != ')') {
            while (true) {
                bool quoted = false;
                terms.push_back(lex.term(quoted));
                if (lex.peek() == ')') break;
                bool or_quoted = false;
                if (lex.term(or_quoted) != "OR" || or_quoted) lex.fail("expected OR");
            }
        }
        lex.expect(')');
    }

    std::optional<Instant> since;
    std::optional<Instant> until;
    while (!lex.done()) {
        bool quoted = false;
        const std::string tok = lex.term(quoted);
        if (quoted) lex.fail("unexpected quoted term after groups");
        if (tok.rfind("lang:", 0) == 0) {
            q.flags.lang = tok.substr(5);
        } else if (tok == "-is:retweet") {
            q.flags.exclude_retweets = true;
        } else if (tok == "-is:nullcast") {
            q.flags.exclude_promoted = true;
        } else if (tok == "is:verified") {
            q.flags.verified_only = true;
        } else if (tok.rfind("since:", 0) == 0) {
            since = parse_instant(tok.substr(6));
            if (!since) lex.fail("bad since: date");
        } else if (tok.rfind("until:", 0) == 0) {
            until = parse_instant(tok.substr(6));
            if (!until) lex.fail("bad until: date");
        } else {
            lex.fail("unknown parameter '" + tok + "'");
        }
    }
    if (since.has_value() != until.has_value()) lex.fail("since: and until: must appear together");
    if (since) q.date_range = DateRange{*since, *until};
    return q;
}

}  // namespace trustscreen::query
