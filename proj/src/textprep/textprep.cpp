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
#include "trustscreen/textprep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <regex>

namespace trustscreen::textprep {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_alpha(char c) { return is_lower(c) || (c >= 'A' && c <= 'Z'); }
bool is_high(char c) { return static_cast<unsigned char>(c) >= 0x80; }

std::size_t utf8_length(char lead) {
    const auto u = static_cast<unsigned char>(lead);
    if (u >= 0xF0) return 4;
    if (u >= 0xE0) return 3;
    if (u >= 0xC0) return 2;
    return 1;
}

std::string encode_utf8(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

const std::string kVariationSelector = "\xEF\xB8\x8F";  // U+FE0F

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Emoji

void EmojiTable::add(std::string_view key, std::string name) {
    if (key.size() > 2 && (key.substr(0, 2) == "U+" || key.substr(0, 2) == "u+")) {
        std::uint32_t cp = 0;
        const auto hex = key.substr(2);
        auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
        if (ec != std::errc{} || ptr != hex.data() + hex.size() || cp > 0x10FFFF) {
            throw Error(ErrorCode::MalformedRow, "bad emoji codepoint '" + std::string(key) + "'");
        }
        glyphs_[encode_utf8(cp)] = std::move(name);
    } else if (!key.empty() && is_high(key[0])) {
        glyphs_[std::string(key)] = std::move(name);
    } else {
        emoticons_[std::string(key)] = std::move(name);
    }
}

const std::string* EmojiTable::emoticon(std::string_view token) const {
    const auto it = emoticons_.find(std::string(token));
    return it == emoticons_.end() ? nullptr : &it->second;
}

const EmojiTable& default_emoji_table() {
    static const EmojiTable table = [] {
        EmojiTable t;
        const std::pair<const char*, const char*> rows[] = {
            {":-)", ":smiley-face:"},         {":)", ":smiley-face:"},
            {":-(", ":sad-face:"},            {":(", ":sad-face:"},
            {";-)", ":winking-face:"},        {":D", ":grinning-face:"},
            {"U+1F600", ":grinning-face:"},   {"U+1F680", ":rocket:"},
            {"U+1F4C9", ":chart-decreasing:"}, {"U+1F4C8", ":chart-increasing:"},
            {"U+1F525", ":fire:"},            {"U+1F4B0", ":money-bag:"},
            {"U+1F62D", ":loudly-crying-face:"}, {"U+1F914", ":thinking-face:"},
        };
        for (const auto& [k, v] : rows) t.add(k, v);
        return t;
    }();
    return table;
}

EmojiTable load_emoji_table(const std::filesystem::path& path) {
    EmojiTable t;
    for (auto& [k, v] : load_pair_table(path)) t.add(k, std::move(v));
    return t;
}

// ---------------------------------------------------------------------------
// General cleaning

namespace {

const std::regex& short_link_pattern() {
    static const std::regex re(R"(https?://t\.co/[A-Za-z0-9_]+)", std::regex::icase);
    return re;
}

/// Replaces table glyphs (and a trailing U+FE0F) with " :name: ".
std::string convert_glyphs(std::string_view s, const EmojiTable& emoji, bool& converted) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        const std::size_t n = std::min(utf8_length(s[i]), s.size() - i);
        if (n > 1) {
            const auto it = emoji.glyphs().find(std::string(s.substr(i, n)));
            if (it != emoji.glyphs().end()) {
                out += " " + it->second + " ";
                converted = true;
                i += n;
                if (s.substr(i, kVariationSelector.size()) == kVariationSelector) i += kVariationSelector.size();
                continue;
            }
        }
        out.append(s.substr(i, n));
        i += n;
    }
    return out;
}

std::string convert_emoticons(std::string_view s, const EmojiTable& emoji, bool& converted) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (is_space(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && !is_space(s[j])) ++j;
        const auto token = s.substr(i, j - i);
        if (const auto* name = emoji.emoticon(token)) {
            out += *name;
            converted = true;
        } else {
            out.append(token);
        }
        i = j;
    }
    return out;
}

}  // namespace

std::size_t whitespace_token_count(std::string_view text) { return whitespace_tokens(text).size(); }

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

CleanText general_clean(std::string_view text, bool convert_emoji, const EmojiTable& emoji) {
    CleanText r;
    r.original = std::string(text);
    std::string s(text);
    // links are replaced by a space, so removal cannot splice a new one together
    const auto begin = std::sregex_iterator(s.begin(), s.end(), short_link_pattern());
    r.removed_urls = static_cast<std::size_t>(std::distance(begin, std::sregex_iterator()));
    if (r.removed_urls > 0) s = std::regex_replace(s, short_link_pattern(), " ");
    if (convert_emoji) {
        s = convert_glyphs(s, emoji, r.emoji_converted);
        s = convert_emoticons(s, emoji, r.emoji_converted);
    }
    r.cleaned = (r.removed_urls > 0 || r.emoji_converted) ? collapse_whitespace(s) : std::move(s);
    r.token_count = whitespace_token_count(r.cleaned);
    return r;
}

// ---------------------------------------------------------------------------
// Subjectivity-analysis preprocessing

SaLexicons load_sa_lexicons(const std::filesystem::path& dir) {
    SaLexicons lex;
    for (auto& [k, v] : load_pair_table(dir / "contractions.tsv")) lex.contractions[ascii_lower(k)] = ascii_lower(v);
    lex.frequencies = load_lexicon(dir / "frequencies.tsv", LexiconKind::SegmentationFrequencies);
    lex.emoji = load_emoji_table(dir / "emoji.tsv");
    return lex;
}

std::string correct_spelling(const std::string& word, const Lexicon& frequencies) {
    if (word.empty() || frequencies.counts.count(word) != 0) return word;
    static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
    std::string best = word;
    std::uint64_t best_count = 0;
    auto consider = [&](const std::string& cand) {
        const auto it = frequencies.counts.find(cand);
        if (it == frequencies.counts.end()) return;
        if (it->second > best_count || (it->second == best_count && best_count > 0 && cand < best)) {
            best = cand;
            best_count = it->second;
        }
    };
    for (std::size_t i = 0; i <= word.size(); ++i) {
        const auto left = word.substr(0, i);
        const auto right = word.substr(i);
        if (!right.empty()) consider(left + right.substr(1));
        if (right.size() > 1) consider(left + right[1] + right[0] + right.substr(2));
        for (char c : kLetters) {
            if (!right.empty()) consider(left + c + right.substr(1));
            consider(left + c + right);
        }
    }
    return best;
}

std::vector<std::string> segment_words(std::string_view run, const Lexicon& frequencies) {
    if (run.empty()) return {};
    constexpr std::size_t kMaxWord = 24;
    const double total = static_cast<double>(std::max<std::uint64_t>(frequencies.total_count, 1));
    auto word_logp = [&](std::string_view w) {
        const auto it = frequencies.counts.find(std::string(w));
        if (it != frequencies.counts.end() && it->second > 0) return std::log(static_cast<double>(it->second) / total);
        // unseen pieces: probability shrinks tenfold per letter
        return std::log(10.0 / total) - static_cast<double>(w.size()) * std::log(10.0);
    };
    const std::size_t n = run.size();
    std::vector<double> best(n + 1, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> back(n + 1, 0);
    best[0] = 0.0;
    for (std::size_t end = 1; end <= n; ++end) {
        for (std::size_t len = 1; len <= std::min(kMaxWord, end); ++len) {
            const double score = best[end - len] + word_logp(run.substr(end - len, len));
            if (score > best[end]) {
                best[end] = score;
                back[end] = end - len;
            }
        }
    }
    std::vector<std::string> out;
    for (std::size_t end = n; end > 0; end = back[end]) out.emplace_back(run.substr(back[end], end - back[end]));
    std::reverse(out.begin(), out.end());
    return out;
}

namespace {

enum class Kind { Word, Url, Email, Mention, Tag, Emoji, Numeric };

struct Piece {
    Kind kind = Kind::Word;
    std::string text;
};

bool is_kept_punct(char c) { return c == '!' || c == '?' || c == ',' || c == '.' || c == ';'; }

const std::regex& email_pattern() {
    static const std::regex re(R"(^[^@\s]+@[a-z0-9-]+(\.[a-z0-9-]+)+[.,;!?]*$)");
    return re;
}

/// Tokens carrying digits and no letters: numbers, prices, percentages,
/// dates, times and phone numbers.
bool is_numeric_token(std::string_view t) {
    bool digit = false;
    for (char c : t) {
        if (is_alpha(c) || is_high(c)) return false;
        digit = digit || is_digit(c);
    }
    return digit;
}

Kind classify(std::string_view t) {
    if (t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")) return Kind::Url;
    if (t.size() > 2 && t.front() == ':' && t.back() == ':') return Kind::Emoji;
    if (t.find('@') != std::string_view::npos && std::regex_match(t.begin(), t.end(), email_pattern())) {
        return Kind::Email;
    }
    if (t.size() > 1 && t[0] == '@') return Kind::Mention;
    if (t.size() > 1 && (t[0] == '#' || t[0] == '$') && is_alpha(t[1])) return Kind::Tag;
    if (is_numeric_token(t)) return Kind::Numeric;
    return Kind::Word;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) {
        s.replace(p, from.size(), to);
    }
    return s;
}

/// Typographic quotes and dashes folded to ASCII before tokenizing.
std::string fold_typography(std::string s) {
    s = replace_all(std::move(s), "\xE2\x80\x99", "'");
    s = replace_all(std::move(s), "\xE2\x80\x98", "'");
    s = replace_all(std::move(s), "\xE2\x80\x9C", "\"");
    s = replace_all(std::move(s), "\xE2\x80\x9D", "\"");
    s = replace_all(std::move(s), "\xE2\x80\x94", " - ");
    s = replace_all(std::move(s), "\xE2\x80\x93", " - ");
    s = replace_all(std::move(s), "\xE2\x80\xA6", "...");
    return s;
}

/// Splits `word` into leading junk, core (letters, digits, apostrophes,
/// high bytes) and trailing junk.
void split_core(const std::string& word, std::string& lead, std::string& core, std::string& trail) {
    auto core_char = [](char c) { return is_alpha(c) || is_digit(c) || is_high(c) || c == '\''; };
    std::size_t b = 0;
    while (b < word.size() && !core_char(word[b])) ++b;
    std::size_t e = word.size();
    while (e > b && !core_char(word[e - 1])) --e;
    lead = word.substr(0, b);
    core = word.substr(b, e - b);
    trail = word.substr(e);
}

std::string expand_contraction(const std::string& word, const SaLexicons& lex) {
    std::string lead, core, trail;
    split_core(word, lead, core, trail);
    while (!core.empty() && core.back() == '\'') core.pop_back();
    while (!core.empty() && core.front() == '\'') core.erase(core.begin());
    if (const auto it = lex.contractions.find(core); it != lex.contractions.end()) {
        core = it->second;
    } else if (core.size() > 2 && core.ends_with("'s")) {
        core.resize(core.size() - 2);
    }
    return lead + core + trail;
}

std::string strip_punctuation(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (is_alpha(c) || is_digit(c) || is_high(c) || is_kept_punct(c) || c == ' ') out.push_back(c);
        else out.push_back(' ');
    }
    return out;
}

/// Corrects every letter run of length >= 2 not glued to digits or
/// non-ASCII bytes.
std::string correct_runs(const std::string& s, const Lexicon& freq) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_lower(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && is_lower(s[j])) ++j;
        const std::string run = s.substr(i, j - i);
        const bool glued = (i > 0 && (is_digit(s[i - 1]) || is_high(s[i - 1]))) ||
                           (j < s.size() && (is_digit(s[j]) || is_high(s[j])));
        out += (run.size() >= 2 && !glued) ? correct_spelling(run, freq) : run;
        i = j;
    }
    return out;
}

std::string unpack_tag(const std::string& tag, const Lexicon& freq) {
    std::string lead, core, trail;
    split_core(tag.substr(1), lead, core, trail);
    std::string out;
    std::size_t i = 0;
    while (i < core.size()) {
        std::size_t j = i;
        if (is_lower(core[i])) {
            while (j < core.size() && is_lower(core[j])) ++j;
            for (const auto& w : segment_words(std::string_view(core).substr(i, j - i), freq)) out += " " + w;
        } else {
            // digits, underscores and other bytes become separators
            j = i + 1;
            out += ' ';
        }
        i = j;
    }
    std::string kept;
    for (char c : trail) {
        if (is_kept_punct(c)) kept.push_back(c);
    }
    return out + kept;
}

std::string unpack_emoji(const std::string& token, const EmojiTable& emoji) {
    std::string name = token;
    if (const auto* mapped = emoji.emoticon(token)) name = *mapped;
    std::string out;
    for (char c : name) {
        if (is_alpha(c) || is_high(c)) out.push_back(c);
        else out.push_back(' ');
    }
    return ascii_lower(out);
}

}  // namespace

std::string sa_preprocess(std::string_view text, const SaLexicons& lexicons) {
    const Lexicon& freq = lexicons.frequencies;
    if (freq.counts.empty()) throw Error(ErrorCode::EmptyLexicon, "segmentation frequency lexicon is empty");

    bool converted = false;
    const std::string s = convert_glyphs(fold_typography(std::string(text)), lexicons.emoji, converted);

    std::vector<Piece> pieces;
    for (const auto& tok : whitespace_tokens(s)) {
        // emoticons are matched before case folding (":D")
        if (lexicons.emoji.emoticon(tok) != nullptr) {
            pieces.push_back({Kind::Emoji, tok});
            continue;
        }
        auto lower = ascii_lower(tok);
        const Kind kind = classify(lower);
        pieces.push_back({kind, std::move(lower)});
    }

    // 1. contractions
    for (auto& p : pieces) {
        if (p.kind == Kind::Word) p.text = expand_contraction(p.text, lexicons);
    }
    // 2. punctuation
    for (auto& p : pieces) {
        if (p.kind == Kind::Word) p.text = strip_punctuation(p.text);
    }
    // 3. spelling
    for (auto& p : pieces) {
        if (p.kind == Kind::Word) p.text = correct_runs(p.text, freq);
    }
    // 4. tags and emoji
    for (auto& p : pieces) {
        if (p.kind == Kind::Tag) p.text = unpack_tag(p.text, freq);
        if (p.kind == Kind::Emoji) p.text = unpack_emoji(p.text, lexicons.emoji);
    }
    // 5. entities, digits, whitespace
    std::string out;
    for (const auto& p : pieces) {
        if (p.kind == Kind::Url || p.kind == Kind::Email || p.kind == Kind::Mention || p.kind == Kind::Numeric) {
            continue;
        }
        out.push_back(' ');
        for (char c : p.text) {
            if (!is_digit(c)) out.push_back(c);
        }
    }
    return collapse_whitespace(out);
}

// ---------------------------------------------------------------------------
// Truncation

std::pair<std::size_t, std::size_t> mid_truncate_start_range(std::size_t len, std::size_t max_len) {
    if (max_len < 2) throw Error(ErrorCode::InvalidArgument, "mid_truncate needs max_len >= 2");
    if (len <= max_len) return {0, 0};
    const std::size_t lo = std::max<std::size_t>(1, (len + 3) / 4);
    const std::size_t hi = std::min(3 * len / 4, max_len - 1);
    // a tiny max_len pushes the quartile window past the last admissible start
    if (lo > hi) return {max_len - 1, max_len - 1};
    return {lo, hi};
}

std::vector<std::string> mid_truncate(const std::vector<std::string>& tokens, std::size_t max_len,
                                      std::mt19937_64& rng) {
    const auto [lo, hi] = mid_truncate_start_range(tokens.size(), max_len);
    if (tokens.size() <= max_len) return tokens;
    const std::size_t drop = tokens.size() - max_len;
    const std::size_t start = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    std::vector<std::string> out(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(start));
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(start + drop), tokens.end());
    return out;
}

std::vector<std::string> mid_truncate(const std::vector<std::string>& tokens, std::size_t max_len,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return mid_truncate(tokens, max_len, rng);
}

}  // namespace trustscreen::textprep
