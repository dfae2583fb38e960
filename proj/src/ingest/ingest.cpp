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
#include "trustscreen/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace trustscreen {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line) + ": " + why);
}

}  // namespace

// ---------------------------------------------------------------------------
// Prices

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.close);
    return out;
}

PriceSeries parse_price_csv_text(const std::string& text, std::string symbol) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    PriceSeries series;
    series.symbol = std::move(symbol);

    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (!header_seen) {
            if (row != "timestamp,open,high,low,close,volume") {
                malformed(lineno, "header must be exactly timestamp,open,high,low,close,volume");
            }
            header_seen = true;
            continue;
        }
        if (row.empty()) continue;
        const auto fields = split(row, ',');
        if (fields.size() != 6) malformed(lineno, "expected 6 fields");
        const auto ts = parse_instant(trim(fields[0]));
        if (!ts) malformed(lineno, "bad timestamp");
        std::array<double, 5> v{};
        for (std::size_t i = 0; i < 5; ++i) {
            const auto d = parse_double(fields[i + 1]);
            if (!d) malformed(lineno, "bad number in column " + std::to_string(i + 2));
            v[i] = *d;
        }
        PricePoint p{*ts, v[0], v[1], v[2], v[3], v[4]};
        if (p.low > std::min(p.open, p.close)) malformed(lineno, "low above open/close");
        if (p.high < std::max(p.open, p.close)) malformed(lineno, "high below open/close");
        if (p.volume < 0.0) malformed(lineno, "negative volume");
        series.points.push_back(p);
    }
    if (!header_seen) malformed(1, "missing header");
    if (series.points.empty()) throw Error(ErrorCode::EmptySeries, "price file has no rows");

    std::stable_sort(series.points.begin(), series.points.end(),
                     [](const PricePoint& a, const PricePoint& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 1; i < series.points.size(); ++i) {
        if (series.points[i].timestamp == series.points[i - 1].timestamp) {
            throw Error(ErrorCode::NonMonotonicTimestamp,
                        "duplicate timestamp " + format_instant(series.points[i].timestamp));
        }
    }

    // Gaps are allowed (market closures) as long as they are whole multiples
    // of the base interval.
    if (series.points.size() >= 2) {
        std::int64_t step = 0;
        for (std::size_t i = 1; i < series.points.size(); ++i) {
            const auto gap = (series.points[i].timestamp - series.points[i - 1].timestamp).count();
            step = step == 0 ? gap : std::min<std::int64_t>(step, gap);
        }
        std::int64_t base = 0;
        for (std::size_t i = 1; i < series.points.size(); ++i) {
            base = std::gcd(base, (series.points[i].timestamp - series.points[i - 1].timestamp).count());
        }
        if (base != step) {
            throw Error(ErrorCode::MalformedRow, "inter-point spacing is not a multiple of " +
                                                     std::to_string(step) + "s");
        }
        series.interval = std::chrono::seconds{step};
    }
    return series;
}

PriceSeries parse_price_csv(const std::filesystem::path& path) {
    return parse_price_csv_text(read_file(path), path.stem().string());
}

// ---------------------------------------------------------------------------
// Tweets

std::string_view label_name(Label label) {
    return label == Label::Reliable ? "reliable" : "unreliable";
}

namespace {

void invalid(const std::string& why) { throw Error(ErrorCode::InvalidArgument, why); }

std::int64_t count_field(const json& obj, const char* key) {
    if (!obj.contains(key)) return 0;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) invalid(std::string(key) + " must be an integer");
    const auto n = v.get<std::int64_t>();
    if (n < 0) invalid(std::string(key) + " must be non-negative");
    return n;
}

Instant instant_field(const json& obj, const char* key, bool required) {
    if (!obj.contains(key) || obj.at(key).is_null()) {
        if (required) invalid(std::string("missing ") + key);
        return Instant{};
    }
    if (!obj.at(key).is_string()) invalid(std::string(key) + " must be a string");
    const auto t = parse_instant(obj.at(key).get<std::string>());
    if (!t) invalid(std::string("bad timestamp in ") + key);
    return *t;
}

std::vector<std::string> entity_list(const json& ents, const char* key, char sigil) {
    std::vector<std::string> out;
    if (!ents.contains(key)) return out;
    const auto& arr = ents.at(key);
    if (!arr.is_array()) invalid(std::string("entities.") + key + " must be an array");
    for (const auto& e : arr) {
        if (!e.is_string()) invalid(std::string("entities.") + key + " entries must be strings");
        auto s = e.get<std::string>();
        if (sigil != '\0' && !s.empty() && s.front() == sigil) s.erase(0, 1);
        if (s.empty()) invalid(std::string("empty entry in entities.") + key);
        out.push_back(std::move(s));
    }
    return out;
}

bool bool_field(const json& obj, const char* key) {
    if (!obj.contains(key)) return false;
    if (!obj.at(key).is_boolean()) invalid(std::string(key) + " must be a boolean");
    return obj.at(key).get<bool>();
}

}  // namespace

Tweet tweet_from_json_line(const std::string& line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        invalid(std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) invalid("record is not an object");

    Tweet t;
    if (!obj.contains("id") || !obj.at("id").is_string()) invalid("id must be a string");
    t.id = obj.at("id").get<std::string>();
    if (t.id.empty()) invalid("id is empty");
    if (!obj.contains("text") || !obj.at("text").is_string()) invalid("text must be a string");
    t.text = obj.at("text").get<std::string>();
    t.created_at = instant_field(obj, "created_at", true);
    if (obj.contains("lang")) {
        if (!obj.at("lang").is_string()) invalid("lang must be a string");
        t.lang = obj.at("lang").get<std::string>();
    }
    t.is_retweet = bool_field(obj, "is_retweet");
    t.verified = bool_field(obj, "verified");

    const json empty = json::object();
    const auto& m = obj.contains("metrics") ? obj.at("metrics") : empty;
    if (!m.is_object()) invalid("metrics must be an object");
    t.metrics.retweet_count = count_field(m, "retweet_count");
    t.metrics.reply_count = count_field(m, "reply_count");
    t.metrics.like_count = count_field(m, "like_count");
    t.metrics.quote_count = count_field(m, "quote_count");

    const auto& a = obj.contains("author") ? obj.at("author") : empty;
    if (!a.is_object()) invalid("author must be an object");
    t.author.followers_count = count_field(a, "followers_count");
    t.author.following_count = count_field(a, "following_count");
    t.author.tweet_count = count_field(a, "tweet_count");
    t.author.listed_count = count_field(a, "listed_count");
    t.author.created_at = instant_field(a, "created_at", false);

    const auto& e = obj.contains("entities") ? obj.at("entities") : empty;
    if (!e.is_object()) invalid("entities must be an object");
    t.entities.hashtags = entity_list(e, "hashtags", '#');
    t.entities.cashtags = entity_list(e, "cashtags", '$');
    t.entities.mentions = entity_list(e, "mentions", '@');
    t.entities.urls = entity_list(e, "urls", '\0');
    t.entities.annotations = entity_list(e, "annotations", '\0');

    if (obj.contains("label") && !obj.at("label").is_null()) {
        const auto& l = obj.at("label");
        if (!l.is_string()) invalid("label must be a string");
        const auto s = l.get<std::string>();
        if (s == "reliable") {
            t.label = Label::Reliable;
        } else if (s == "unreliable") {
            t.label = Label::Unreliable;
        } else {
            invalid("label must be reliable or unreliable");
        }
    }
    return t;
}

std::string tweet_to_json_line(const Tweet& t) {
    json obj;
    obj["id"] = t.id;
    obj["text"] = t.text;
    obj["created_at"] = format_instant(t.created_at);
    obj["lang"] = t.lang;
    obj["is_retweet"] = t.is_retweet;
    obj["verified"] = t.verified;
    obj["metrics"] = {{"retweet_count", t.metrics.retweet_count},
                      {"reply_count", t.metrics.reply_count},
                      {"like_count", t.metrics.like_count},
                      {"quote_count", t.metrics.quote_count}};
    obj["author"] = {{"followers_count", t.author.followers_count},
                     {"following_count", t.author.following_count},
                     {"tweet_count", t.author.tweet_count},
                     {"listed_count", t.author.listed_count},
                     {"created_at", format_instant(t.author.created_at)}};
    obj["entities"] = {{"hashtags", t.entities.hashtags},
                       {"cashtags", t.entities.cashtags},
                       {"mentions", t.entities.mentions},
                       {"urls", t.entities.urls},
                       {"annotations", t.entities.annotations}};
    if (t.label) {
        obj["label"] = std::string(label_name(*t.label));
    } else {
        obj["label"] = nullptr;
    }
    return obj.dump();
}

TweetStream parse_tweet_lines(std::istream& in) {
    TweetStream out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto t = tweet_from_json_line(line);
            if (!seen.insert(t.id).second) invalid("duplicate id " + t.id);
            out.tweets.push_back(std::move(t));
        } catch (const Error& e) {
            out.rejects.push_back({lineno, e.what()});
        }
    }
    return out;
}

TweetStream parse_tweet_stream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_tweet_lines(in);
}

void write_tweet_stream(const std::filesystem::path& path, const std::vector<Tweet>& tweets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& t : tweets) out << tweet_to_json_line(t) << '\n';
}

// ---------------------------------------------------------------------------
// Sidecars

std::string_view arg_tag_name(ArgTag tag) {
    switch (tag) {
        case ArgTag::Claim: return "CLAIM";
        case ArgTag::Premise: return "PREMISE";
        case ArgTag::Outside: return "OUTSIDE";
    }
    return "OUTSIDE";
}

namespace {

[[noreturn]] void out_of_range(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::ProbabilityOutOfRange, "line " + std::to_string(line) + ": " + why);
}

double probability(const json& v, std::size_t line, const std::string& name) {
    if (!v.is_number()) out_of_range(line, name + " is not a number");
    const double p = v.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) out_of_range(line, name + " outside [0,1]");
    return p;
}

const std::set<std::string>& known_sidecar_fields() {
    static const std::set<std::string> fields{"id",        "discriminator_real", "subj_word",
                                              "subj_sentence", "sentiment",     "arg_tags",
                                              "token_probs"};
    return fields;
}

}  // namespace

SidecarSet parse_sidecar_lines(std::istream& in) {
    SidecarSet out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::InvalidArgument,
                        "line " + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": not an object");
        }
        if (!obj.contains("id")) {
            if (obj.contains("header")) {
                out.header = obj.at("header").dump();
                continue;
            }
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": missing id");
        }
        ScoreSidecar rec;
        if (!obj.at("id").is_string() || obj.at("id").get<std::string>().empty()) {
            throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": bad id");
        }
        rec.id = obj.at("id").get<std::string>();

        for (const auto& [key, value] : obj.items()) {
            if (!known_sidecar_fields().count(key)) {
                out.warnings.push_back("line " + std::to_string(lineno) + ": unknown field '" + key +
                                       "' ignored");
            }
        }
        auto opt_prob = [&](const char* key) -> std::optional<double> {
            if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
            return probability(obj.at(key), lineno, key);
        };
        rec.discriminator_real = opt_prob("discriminator_real");
        rec.subj_word = opt_prob("subj_word");
        rec.subj_sentence = opt_prob("subj_sentence");

        if (obj.contains("sentiment") && !obj.at("sentiment").is_null()) {
            const auto& s = obj.at("sentiment");
            if (!s.is_object() || !s.contains("pos") || !s.contains("neg") || !s.contains("neu")) {
                out_of_range(lineno, "sentiment must carry pos, neg and neu");
            }
            SentimentProbs sp{probability(s.at("pos"), lineno, "sentiment.pos"),
                              probability(s.at("neg"), lineno, "sentiment.neg"),
                              probability(s.at("neu"), lineno, "sentiment.neu")};
            if (std::abs(sp.pos + sp.neg + sp.neu - 1.0) > 1e-6) {
                out_of_range(lineno, "sentiment probabilities do not sum to 1");
            }
            rec.sentiment = sp;
        }
        if (obj.contains("arg_tags") && !obj.at("arg_tags").is_null()) {
            std::vector<ArgTag> tags;
            for (const auto& v : obj.at("arg_tags")) {
                const auto s = v.is_string() ? v.get<std::string>() : std::string{};
                if (s == "CLAIM") {
                    tags.push_back(ArgTag::Claim);
                } else if (s == "PREMISE") {
                    tags.push_back(ArgTag::Premise);
                } else if (s == "OUTSIDE") {
                    tags.push_back(ArgTag::Outside);
                } else {
                    throw Error(ErrorCode::InvalidArgument,
                                "line " + std::to_string(lineno) + ": unknown argument tag");
                }
            }
            rec.arg_tags = std::move(tags);
        }
        if (obj.contains("token_probs") && !obj.at("token_probs").is_null()) {
            std::vector<TokenProb> probs;
            for (const auto& v : obj.at("token_probs")) {
                TokenProb tp;
                if (v.is_array() && v.size() == 2) {
                    tp.actual_prob = probability(v[0], lineno, "token_probs.actual_prob");
                    tp.top_prob = probability(v[1], lineno, "token_probs.top_prob");
                } else if (v.is_object() && v.contains("actual_prob") && v.contains("top_prob")) {
                    tp.actual_prob = probability(v.at("actual_prob"), lineno, "token_probs.actual_prob");
                    tp.top_prob = probability(v.at("top_prob"), lineno, "token_probs.top_prob");
                } else {
                    out_of_range(lineno, "token_probs entries must be {actual_prob, top_prob}");
                }
                if (tp.actual_prob <= 0.0) out_of_range(lineno, "token_probs.actual_prob must be positive");
                if (tp.actual_prob > tp.top_prob) out_of_range(lineno, "actual_prob exceeds top_prob");
                probs.push_back(tp);
            }
            rec.token_probs = std::move(probs);
        }

        auto [it, inserted] = out.records.insert_or_assign(rec.id, std::move(rec));
        if (!inserted) {
            ++out.duplicate_count;
            out.warnings.push_back("line " + std::to_string(lineno) + ": duplicate id '" + it->first +
                                   "', later record kept");
        }
    }
    return out;
}

SidecarSet parse_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_sidecar_lines(in);
}

// ---------------------------------------------------------------------------
// Lexicons

std::size_t Lexicon::size() const {
    switch (kind) {
        case LexiconKind::Subjectivity: return scores.size();
        case LexiconKind::Profanity: return words.size();
        case LexiconKind::SegmentationFrequencies: return counts.size();
    }
    return 0;
}

Lexicon parse_lexicon(std::istream& in, LexiconKind kind) {
    Lexicon lex;
    lex.kind = kind;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        if (kind == LexiconKind::Profanity) {
            lex.words.insert(ascii_lower(row));
            continue;
        }
        const auto tab = row.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::MalformedRow, "line " + std::to_string(lineno) + ": expected word<TAB>value");
        }
        const auto word = ascii_lower(trim(row.substr(0, tab)));
        const auto value = trim(row.substr(tab + 1));
        if (kind == LexiconKind::Subjectivity) {
            const auto score = parse_double(value);
            if (!score) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(lineno) + ": bad score");
            if (*score < 0.0 || *score > 1.0) {
                throw Error(ErrorCode::ScoreOutOfRange,
                            "line " + std::to_string(lineno) + ": score outside [0,1] for '" + word + "'");
            }
            lex.scores[word] = *score;
        } else {
            std::uint64_t count = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), count);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw Error(ErrorCode::MalformedRow, "line " + std::to_string(lineno) + ": bad count");
            }
            lex.counts[word] += count;
            lex.total_count += count;
        }
    }
    if (lex.size() == 0) throw Error(ErrorCode::EmptyLexicon, "lexicon has no entries");
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return parse_lexicon(in, kind);
}

std::vector<std::pair<std::string, std::string>> load_pair_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto tab = row.find('\t');
        if (tab == std::string_view::npos) {
            throw Error(ErrorCode::MalformedRow, "line " + std::to_string(lineno) + ": expected key<TAB>value");
        }
        out.emplace_back(std::string(trim(row.substr(0, tab))), std::string(trim(row.substr(tab + 1))));
    }
    return out;
}

}  // namespace trustscreen
