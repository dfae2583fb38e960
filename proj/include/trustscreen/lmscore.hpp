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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trustscreen/ingest.hpp"

namespace trustscreen::lm {

using TokenList = std::vector<std::string>;

/// Lower-cased whitespace tokens of the short-link-cleaned text.
TokenList lm_tokens(std::string_view text);

/**
 * Word n-gram model with add-k smoothing. Prediction vocabulary is
 * {EOS, UNK, training words}; BOS only pads contexts. A context never seen in
 * training backs off to its longest seen suffix, so every conditional
 * distribution is a proper add-k distribution over the whole vocabulary.
 */
class NgramLm {
public:
    static constexpr int kEos = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = -1;

    /// Throws EmptyCorpus when no document has a token; InvalidArgument for
    /// order < 1 or add_k <= 0.
    static NgramLm train(const std::vector<TokenList>& corpus, int order = 3, double add_k = 0.1);

    int order() const { return order_; }
    double add_k() const { return add_k_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    const std::string& token(int id) const { return vocab_.at(static_cast<std::size_t>(id)); }
    int id_of(const std::string& token) const;  ///< kUnk when unseen

    /// p(. | history); only the last order-1 ids of `history` matter, missing
    /// positions are BOS.
    std::vector<double> distribution(std::span<const int> history) const;
    double prob(std::span<const int> history, int next) const;

    std::vector<int> encode(const TokenList& tokens) const;

    /// Versioned text dump; load(dump()) reproduces every count.
    std::string dump() const;
    static NgramLm load(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static NgramLm load_file(const std::filesystem::path& path);

    bool operator==(const NgramLm&) const = default;

private:
    struct Node {
        std::uint64_t total = 0;
        std::map<int, std::uint64_t> next;

        bool operator==(const Node&) const = default;
    };

    static NgramLm parse(const std::string& text);
    const Node& context_node(std::span<const int> history) const;

    int order_ = 3;
    double add_k_ = 0.1;
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, int> index_;
    std::map<std::vector<int>, Node> contexts_;  ///< keyed by context ids, lengths 0..order-1
};

struct SampleOptions {
    double nucleus_p = 0.9;
    double temperature = 1.0;  ///< 0 selects argmax decoding
    std::size_t max_len = 40;  ///< total tokens including the prompt
    std::uint64_t seed = 0;
};

/// Continues `prompt` until EOS or max_len. UNK is never emitted.
TokenList generate(const NgramLm& lm, const TokenList& prompt, const SampleOptions& options);

/// Prompt = first n source tokens, n uniform in [2, max(2, floor(len/3))].
/// Throws PromptTooShort when the source has fewer than 3 tokens.
TokenList sample_synthetic(const NgramLm& lm, const TokenList& source, const SampleOptions& options);

/// One sample per source with at least 3 tokens; source i uses seed
/// options.seed + i. Shorter sources are skipped.
std::vector<TokenList> generate_synthetic_set(const NgramLm& generator, const std::vector<TokenList>& sources,
                                              const SampleOptions& options);

/// The candidate set sampling draws from for one step, renormalized:
/// (token id, probability) in descending probability, ties by id.
std::vector<std::pair<int, double>> nucleus(const std::vector<double>& dist, double nucleus_p, double temperature);

struct TokenScore {
    std::string token;
    double actual_prob = 0.0;
    double top_prob = 0.0;
    double frac_p = 0.0;
};

std::vector<TokenScore> score_tokens(const NgramLm& lm, const TokenList& tokens);

/// Throws LengthMismatch when the sidecar length differs from the token
/// count and ProbabilityOutOfRange unless 0 < actual <= top <= 1.
std::vector<TokenScore> score_tokens(const std::vector<TokenProb>& sidecar, const TokenList& tokens);

/// Bin i covers [i/10, (i+1)/10); the last bin is closed.
struct FracPHistogram {
    std::array<double, 10> bins{};
};

/// Percentages. Throws EmptyScores for an empty list.
FracPHistogram histogram(const std::vector<TokenScore>& scores);
std::size_t frac_bin(double frac_p);

}  // namespace trustscreen::lm
