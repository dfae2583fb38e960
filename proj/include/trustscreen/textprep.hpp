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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trustscreen/ingest.hpp"

namespace trustscreen::textprep {

/// Emoticons (`:-)`) and single-codepoint emoji (`U+1F680`) mapped to
/// `:name:` tokens. Codepoint keys are stored as UTF-8.
class EmojiTable {
public:
    void add(std::string_view key, std::string name);
    const std::string* emoticon(std::string_view token) const;
    const std::unordered_map<std::string, std::string>& glyphs() const { return glyphs_; }
    bool empty() const { return emoticons_.empty() && glyphs_.empty(); }

private:
    std::unordered_map<std::string, std::string> emoticons_;
    std::unordered_map<std::string, std::string> glyphs_;
};

/// The table shipped in data/lexicons/emoji.tsv.
const EmojiTable& default_emoji_table();
EmojiTable load_emoji_table(const std::filesystem::path& path);

struct CleanText {
    std::string original;
    std::string cleaned;
    std::size_t removed_urls = 0;
    bool emoji_converted = false;
    std::size_t token_count = 0;
};

/**
 * Strips platform short links (`http(s)://t.co/...`) and, when asked,
 * replaces emoticons and emoji with ` :name: ` tokens. Whitespace is only
 * normalized when something was removed or converted, so untouched text
 * comes back byte-identical. Idempotent.
 */
CleanText general_clean(std::string_view text, bool convert_emoji = false,
                        const EmojiTable& emoji = default_emoji_table());

std::size_t whitespace_token_count(std::string_view text);
std::vector<std::string> whitespace_tokens(std::string_view text);

// ---------------------------------------------------------------------------
// Subjectivity-analysis preprocessing

struct SaLexicons {
    std::unordered_map<std::string, std::string> contractions;  ///< lower-case keys
    Lexicon frequencies;                                        ///< SegmentationFrequencies
    EmojiTable emoji;
};

/// Loads contractions.tsv, frequencies.tsv and emoji.tsv from `dir`.
SaLexicons load_sa_lexicons(const std::filesystem::path& dir);

/// Highest-count dictionary word at edit distance 1 (ties: lexicographically
/// smallest); the word itself when already known or when nothing is in reach.
std::string correct_spelling(const std::string& word, const Lexicon& frequencies);

/// Max-probability split of a lower-case letter run under unigram
/// log-frequencies; unknown pieces are penalized by length.
std::vector<std::string> segment_words(std::string_view run, const Lexicon& frequencies);

/**
 * Lower-cases, then in order: contraction expansion (remaining `'s` endings
 * dropped), punctuation removal keeping `! ? , . ;`, spelling correction,
 * tag and emoji unpacking, removal of emails, numbers, phones, dates, urls
 * and mentions, and whitespace repair. Throws EmptyLexicon when the
 * frequency lexicon is empty.
 */
std::string sa_preprocess(std::string_view text, const SaLexicons& lexicons);

// ---------------------------------------------------------------------------
// Truncation

/**
 * Drops one contiguous span of `len - max_len` tokens whose start is drawn
 * uniformly from [ceil(len/4), floor(3 len/4)], clipped so the first and
 * last tokens survive. Throws InvalidArgument when max_len < 2.
 */
std::vector<std::string> mid_truncate(const std::vector<std::string>& tokens, std::size_t max_len,
                                      std::mt19937_64& rng);
std::vector<std::string> mid_truncate(const std::vector<std::string>& tokens, std::size_t max_len,
                                      std::uint64_t seed);

/// Inclusive range of admissible span starts for a (len, max_len) pair.
std::pair<std::size_t, std::size_t> mid_truncate_start_range(std::size_t len, std::size_t max_len);

}  // namespace trustscreen::textprep
