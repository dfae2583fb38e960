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
#include <doctest.h>

#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "trustscreen/textprep.hpp"

using namespace trustscreen;
using namespace trustscreen::textprep;

namespace {

const SaLexicons& bundled() {
    static const SaLexicons lex = load_sa_lexicons(std::filesystem::path(TS_DATA_DIR) / "lexicons");
    return lex;
}

Lexicon tiny_dictionary(const std::string& rows) {
    std::istringstream in(rows);
    return parse_lexicon(in, LexiconKind::SegmentationFrequencies);
}

std::vector<std::string> fixture_texts() {
    std::vector<std::string> out;
    for (const char* f : {"twtr_corpus.jsonl", "human_tweets.jsonl"}) {
        for (const auto& t : parse_tweet_stream(std::filesystem::path(TS_DATA_DIR) / "fixtures" / f).tweets) {
            out.push_back(t.text);
        }
    }
    return out;
}

std::vector<std::string> numbered(std::size_t n) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("w" + std::to_string(i));
    return v;
}

}  // namespace

TEST_CASE("general_clean examples") {
    const auto c = general_clean("buy now https://t.co/abc123");
    CHECK(c.cleaned == "buy now");
    CHECK(c.removed_urls == 1);
    CHECK(c.token_count == 2);
    CHECK_FALSE(c.emoji_converted);

    const std::string plain = "nothing  to\tclean here :-)";
    CHECK(general_clean(plain).cleaned == plain);

    const auto e = general_clean("so happy :-) today", true);
    CHECK(e.emoji_converted);
    CHECK(e.cleaned == "so happy :smiley-face: today");

    const auto g = general_clean("to the moon\xF0\x9F\x9A\x80\xEF\xB8\x8F!", true);
    CHECK(g.cleaned == "to the moon :rocket: !");

    const auto other = general_clean("see https://example.com/x and http://t.co/Zz9 and https://t.co/q1");
    CHECK(other.cleaned == "see https://example.com/x and and");
    CHECK(other.removed_urls == 2);
}

TEST_CASE("general_clean invariants over fixture tweets and random noise") {
    const std::regex short_link(R"(https?://t\.co/[A-Za-z0-9_]+)", std::regex::icase);
    auto texts = fixture_texts();
    std::mt19937_64 rng(5);
    const std::vector<std::string> bits{"https://t.co/", "abc", " ", "  ", ":-)", ":)", "\xF0\x9F\x94\xA5", "x",
                                        "\xEF\xB8\x8F", "t.co", "http", "\t", "9", ":D"};
    std::uniform_int_distribution<std::size_t> pick(0, bits.size() - 1);
    for (int i = 0; i < 300; ++i) {
        std::string s;
        for (int k = 0; k < 12; ++k) s += bits[pick(rng)];
        texts.push_back(s);
    }
    for (const auto& t : texts) {
        for (bool emoji : {false, true}) {
            const auto once = general_clean(t, emoji);
            CHECK_FALSE(std::regex_search(once.cleaned, short_link));
            CHECK(once.token_count == whitespace_token_count(once.cleaned));
            CHECK(general_clean(once.cleaned, emoji).cleaned == once.cleaned);
        }
    }
}

TEST_CASE("emoji table file") {
    ts_test::TempFile f("U+1F600\t:grinning-face:\n:P\t:tongue:\n", ".tsv");
    const auto t = load_emoji_table(f.path());
    CHECK(general_clean("hi :P \xF0\x9F\x98\x80", true, t).cleaned == "hi :tongue: :grinning-face:");
    ts_test::TempFile bad("U+ZZZ\t:x:\n", ".tsv");
    try {
        load_emoji_table(bad.path());
        FAIL("expected MalformedRow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedRow);
    }
}

TEST_CASE("correct_spelling: edit distance one, highest count wins") {
    const auto d = tiny_dictionary("great\t700\nstock\t50\ngrapes\t3\ncat\t10\ncar\t10\n");
    CHECK(correct_spelling("graet", d) == "great");   // transposition
    CHECK(correct_spelling("gret", d) == "great");    // insertion
    CHECK(correct_spelling("greeat", d) == "great");  // deletion
    CHECK(correct_spelling("stick", d) == "stock");   // substitution
    CHECK(correct_spelling("stock", d) == "stock");
    CHECK(correct_spelling("cab", d) == "car");  // tie on count: lexicographically smaller
    CHECK(correct_spelling("zzzzz", d) == "zzzzz");
    CHECK(correct_spelling("grate", d) == "grate");  // "great" sits at distance two
}

TEST_CASE("segment_words") {
    const auto& f = bundled().frequencies;
    CHECK(segment_words("technicalanalysis", f) == std::vector<std::string>{"technical", "analysis"});
    CHECK(segment_words("makingmoney", f) == std::vector<std::string>{"making", "money"});
    CHECK(segment_words("stock", f) == std::vector<std::string>{"stock"});
    CHECK(segment_words("", f).empty());
    // an unknown run is kept whole rather than shattered
    CHECK(segment_words("qzx", f) == std::vector<std::string>{"qzx"});
}

TEST_CASE("sa_preprocess examples") {
    const auto& lex = bundled();
    CHECK(sa_preprocess("you're", lex) == "you are");
    CHECK(sa_preprocess("#technicalanalysis", lex) == "technical analysis");
    CHECK(sa_preprocess("You\xE2\x80\x99re right", lex) == "you are right");
    // "grate" is not in the bundled dictionary and has no known neighbour at
    // distance one, so it passes through; the doubled ! is kept punctuation
    CHECK(sa_preprocess("grate stock!!", lex) == "grate stock!!");
    CHECK(sa_preprocess("gret stock!!", lex) == "great stock!!");
    CHECK(sa_preprocess("Twitter's price fell 5.3% on 2021-04-30, see https://t.co/x @jack a@b.com", lex) ==
          "twitter price fell on see");
    CHECK(sa_preprocess("$TWTR #MakingMoney :-) \xF0\x9F\x9A\x80", lex) == "twtr making money smiley face rocket");
    CHECK(sa_preprocess("call 555-123-4567 (now) \"please\"", lex) == "call now please");

    SaLexicons empty = lex;
    empty.frequencies.counts.clear();
    try {
        sa_preprocess("x", empty);
        FAIL("expected EmptyLexicon");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyLexicon);
    }
}

TEST_CASE("sa_preprocess output has no removed character classes") {
    const auto& lex = bundled();
    const std::regex forbidden(R"([^a-z !?,.;\x80-\xff]|https?|  |^ | $)");
    auto texts = fixture_texts();
    texts.push_back("Email me: joe.bloggs@example.org or +1 (555) 010-9999 at 10:30 on 04/30/2021 #Q1earnings!!");
    for (const auto& t : texts) {
        const auto out = sa_preprocess(t, lex);
        const std::string note = t + " -> " + out;
        CHECK_MESSAGE(!std::regex_search(out, forbidden), note);
    }
}

TEST_CASE("mid_truncate") {
    SUBCASE("short input is unchanged") {
        const auto v = numbered(50);
        CHECK(mid_truncate(v, 64, std::uint64_t{1}) == v);
    }
    SUBCASE("80 tokens to 64: span start in [20, 60] over 1000 draws") {
        const auto v = numbered(80);
        std::mt19937_64 rng(99);
        std::set<std::size_t> starts;
        for (int i = 0; i < 1000; ++i) {
            const auto out = mid_truncate(v, 64, rng);
            REQUIRE(out.size() == 64);
            std::size_t start = 0;
            while (start < out.size() && out[start] == v[start]) ++start;
            // the kept suffix is contiguous and exactly 16 tokens were removed
            for (std::size_t k = start; k < out.size(); ++k) REQUIRE(out[k] == v[k + 16]);
            CHECK(start >= 20);
            CHECK(start <= 60);
            starts.insert(start);
        }
        CHECK(starts.size() == 41);  // every admissible start is reachable
        CHECK(mid_truncate_start_range(80, 64) == std::pair<std::size_t, std::size_t>{20, 60});
    }
    SUBCASE("random inputs keep both ends and the length bound") {
        std::mt19937_64 rng(3);
        std::uniform_int_distribution<std::size_t> len(0, 300);
        std::uniform_int_distribution<std::size_t> cap(2, 120);
        for (int i = 0; i < 2000; ++i) {
            const auto v = numbered(len(rng));
            const std::size_t m = cap(rng);
            const auto out = mid_truncate(v, m, rng);
            REQUIRE(out.size() == std::min(v.size(), m));
            if (!v.empty()) {
                CHECK(out.front() == v.front());
                CHECK(out.back() == v.back());
            }
        }
    }
    SUBCASE("seeded calls are reproducible; bad max_len") {
        const auto v = numbered(200);
        CHECK(mid_truncate(v, 64, std::uint64_t{7}) == mid_truncate(v, 64, std::uint64_t{7}));
        try {
            mid_truncate(v, 1, std::uint64_t{7});
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
        }
    }
}
