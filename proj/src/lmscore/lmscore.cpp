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
#include "trustscreen/lmscore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "trustscreen/textprep.hpp"

namespace trustscreen::lm {

namespace {

constexpr std::string_view kMagic = "trustscreen-ngram";
constexpr int kVersion = 1;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

TokenList lm_tokens(std::string_view text) {
    return textprep::whitespace_tokens(ascii_lower(textprep::general_clean(text).cleaned));
}

// ---------------------------------------------------------------------------
// NgramLm

NgramLm NgramLm::train(const std::vector<TokenList>& corpus, int order, double add_k) {
    if (order < 1) throw Error(ErrorCode::InvalidArgument, "n-gram order must be at least 1");
    if (!(add_k > 0.0)) throw Error(ErrorCode::InvalidArgument, "add-k must be positive");

    std::set<std::string> words;
    for (const auto& doc : corpus) words.insert(doc.begin(), doc.end());
    // literal reserved spellings fold onto the reserved ids
    words.erase("</s>");
    words.erase("<unk>");
    if (words.empty()) throw Error(ErrorCode::EmptyCorpus, "language-model corpus has no tokens");

    NgramLm lm;
    lm.order_ = order;
    lm.add_k_ = add_k;
    lm.vocab_ = {"</s>", "<unk>"};
    lm.vocab_.insert(lm.vocab_.end(), words.begin(), words.end());
    for (std::size_t i = 0; i < lm.vocab_.size(); ++i) lm.index_[lm.vocab_[i]] = static_cast<int>(i);

    const auto ctx_len = static_cast<std::size_t>(order - 1);
    for (const auto& doc : corpus) {
        if (doc.empty()) continue;
        std::vector<int> seq(ctx_len, kBos);
        for (const auto& w : doc) seq.push_back(lm.id_of(w));
        seq.push_back(kEos);
        for (std::size_t pos = ctx_len; pos < seq.size(); ++pos) {
            for (std::size_t len = 0; len <= ctx_len; ++len) {
                std::vector<int> ctx(seq.begin() + static_cast<std::ptrdiff_t>(pos - len),
                                     seq.begin() + static_cast<std::ptrdiff_t>(pos));
                auto& node = lm.contexts_[std::move(ctx)];
                ++node.total;
                ++node.next[seq[pos]];
            }
        }
    }
    return lm;
}

int NgramLm::id_of(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

std::vector<int> NgramLm::encode(const TokenList& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id_of(t));
    return out;
}

const NgramLm::Node& NgramLm::context_node(std::span<const int> history) const {
    const auto ctx_len = static_cast<std::size_t>(order_ - 1);
    std::vector<int> ctx(ctx_len, kBos);
    const std::size_t take = std::min(ctx_len, history.size());
    std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
              ctx.end() - static_cast<std::ptrdiff_t>(take));
    for (std::size_t drop = 0; drop <= ctx_len; ++drop) {
        const std::vector<int> suffix(ctx.begin() + static_cast<std::ptrdiff_t>(drop), ctx.end());
        const auto it = contexts_.find(suffix);
        if (it != contexts_.end()) return it->second;
    }
    throw Error(ErrorCode::Internal, "n-gram model has no empty context");
}

std::vector<double> NgramLm::distribution(std::span<const int> history) const {
    const Node& node = context_node(history);
    const double v = static_cast<double>(vocab_.size());
    const double denom = static_cast<double>(node.total) + add_k_ * v;
    std::vector<double> p(vocab_.size(), add_k_ / denom);
    for (const auto& [id, c] : node.next) p[static_cast<std::size_t>(id)] = (static_cast<double>(c) + add_k_) / denom;
    return p;
}

double NgramLm::prob(std::span<const int> history, int next) const {
    const Node& node = context_node(history);
    const auto it = node.next.find(next);
    const double c = it == node.next.end() ? 0.0 : static_cast<double>(it->second);
    return (c + add_k_) / (static_cast<double>(node.total) + add_k_ * static_cast<double>(vocab_.size()));
}

std::string NgramLm::dump() const {
    std::ostringstream out;
    out << kMagic << ' ' << kVersion << '\n';
    out << "order " << order_ << '\n';
    out << "add_k " << format_double(add_k_) << '\n';
    out << "vocab " << vocab_.size() << '\n';
    for (const auto& w : vocab_) out << w << '\n';
    out << "contexts " << contexts_.size() << '\n';
    for (const auto& [ctx, node] : contexts_) {
        out << ctx.size();
        for (int id : ctx) out << ' ' << id;
        out << ' ' << node.next.size();
        for (const auto& [id, c] : node.next) out << ' ' << id << ':' << c;
        out << '\n';
    }
    return out.str();
}

NgramLm NgramLm::load(const std::string& text) {
    try {
        return parse(text);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::MalformedModelFile, std::string("n-gram model: ") + e.what());
    }
}

NgramLm NgramLm::parse(const std::string& text) {
    auto bad = [](const std::string& what) { return Error(ErrorCode::MalformedModelFile, "n-gram model: " + what); };
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != kMagic) throw bad("missing header");
    if (version != kVersion) throw bad("unsupported version " + std::to_string(version));

    NgramLm lm;
    std::string key;
    std::string add_k;
    std::size_t n_vocab = 0;
    if (!(in >> key >> lm.order_) || key != "order" || lm.order_ < 1) throw bad("bad order");
    if (!(in >> key >> add_k) || key != "add_k") throw bad("bad add_k");
    lm.add_k_ = std::stod(add_k);
    if (!(lm.add_k_ > 0.0)) throw bad("add_k must be positive");
    if (!(in >> key >> n_vocab) || key != "vocab" || n_vocab < 2) throw bad("bad vocab size");
    in.ignore(1);
    lm.vocab_.resize(n_vocab);
    for (auto& w : lm.vocab_) {
        if (!std::getline(in, w) || w.empty()) throw bad("truncated vocabulary");
    }
    for (std::size_t i = 0; i < n_vocab; ++i) lm.index_[lm.vocab_[i]] = static_cast<int>(i);
    if (lm.index_.size() != n_vocab) throw bad("duplicate vocabulary entry");

    std::size_t n_ctx = 0;
    if (!(in >> key >> n_ctx) || key != "contexts") throw bad("bad context count");
    const auto valid_id = [&](long long id, bool allow_bos) {
        return (allow_bos && id == kBos) || (id >= 0 && static_cast<std::size_t>(id) < n_vocab);
    };
    for (std::size_t i = 0; i < n_ctx; ++i) {
        std::size_t len = 0;
        if (!(in >> len) || len >= static_cast<std::size_t>(lm.order_)) throw bad("bad context length");
        std::vector<int> ctx(len);
        for (auto& id : ctx) {
            long long v = 0;
            if (!(in >> v) || !valid_id(v, true)) throw bad("bad context id");
            id = static_cast<int>(v);
        }
        std::size_t n_next = 0;
        if (!(in >> n_next)) throw bad("bad successor count");
        Node node;
        for (std::size_t k = 0; k < n_next; ++k) {
            std::string pair;
            if (!(in >> pair)) throw bad("truncated successor list");
            const auto colon = pair.find(':');
            if (colon == std::string::npos) throw bad("bad successor entry");
            const long long id = std::stoll(pair.substr(0, colon));
            const std::uint64_t c = std::stoull(pair.substr(colon + 1));
            if (!valid_id(id, false) || c == 0) throw bad("bad successor entry");
            node.next[static_cast<int>(id)] = c;
            node.total += c;
        }
        lm.contexts_[std::move(ctx)] = std::move(node);
    }
    if (lm.contexts_.count({}) == 0) throw bad("missing unigram context");
    return lm;
}

void NgramLm::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << dump();
}

NgramLm NgramLm::load_file(const std::filesystem::path& path) { return load(read_file(path)); }

// ---------------------------------------------------------------------------
// Sampling

std::vector<std::pair<int, double>> nucleus(const std::vector<double>& dist, double nucleus_p, double temperature) {
    std::vector<std::pair<int, double>> cand;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (static_cast<int>(i) != NgramLm::kUnk) cand.emplace_back(static_cast<int>(i), dist[i]);
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (cand.empty()) return cand;
    if (temperature <= 0.0) return {{cand.front().first, 1.0}};

    // p^(1/T) is softmax(log p / T); the shift by the max keeps it finite
    const double top = std::log(cand.front().second);
    double z = 0.0;
    for (auto& [id, p] : cand) {
        p = std::exp((std::log(p) - top) / temperature);
        z += p;
    }
    for (auto& c : cand) c.second /= z;

    double mass = 0.0;
    std::size_t keep = 0;
    while (keep < cand.size()) {
        mass += cand[keep++].second;
        if (mass > nucleus_p) break;
    }
    cand.resize(keep);
    for (auto& c : cand) c.second /= mass;
    return cand;
}

TokenList generate(const NgramLm& lm, const TokenList& prompt, const SampleOptions& options) {
    if (!(options.nucleus_p > 0.0 && options.nucleus_p <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "nucleus_p must lie in (0, 1]");
    }
    if (options.temperature < 0.0) throw Error(ErrorCode::InvalidArgument, "temperature must be non-negative");
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TokenList out = prompt;
    std::vector<int> history = lm.encode(prompt);
    while (out.size() < options.max_len) {
        const auto cand = nucleus(lm.distribution(history), options.nucleus_p, options.temperature);
        double u = unit(rng);
        int pick = cand.back().first;
        for (const auto& [id, p] : cand) {
            if (u < p) {
                pick = id;
                break;
            }
            u -= p;
        }
        if (pick == NgramLm::kEos) break;
        out.push_back(lm.token(pick));
        history.push_back(pick);
    }
    return out;
}

TokenList sample_synthetic(const NgramLm& lm, const TokenList& source, const SampleOptions& options) {
    if (source.size() < 3) throw Error(ErrorCode::PromptTooShort, "prompt source needs at least 3 tokens");
    std::mt19937_64 rng(options.seed ^ 0x9E3779B97F4A7C15ULL);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, std::max<std::size_t>(2, source.size() / 3))(rng);
    const TokenList prompt(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(n));
    return generate(lm, prompt, options);
}

std::vector<TokenList> generate_synthetic_set(const NgramLm& generator, const std::vector<TokenList>& sources,
                                              const SampleOptions& options) {
    std::vector<TokenList> out;
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (sources[i].size() < 3) continue;
        SampleOptions o = options;
        o.seed = options.seed + i;
        out.push_back(sample_synthetic(generator, sources[i], o));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

std::vector<TokenScore> score_tokens(const NgramLm& lm, const TokenList& tokens) {
    std::vector<TokenScore> out;
    out.reserve(tokens.size());
    std::vector<int> history;
    for (const auto& t : tokens) {
        const auto dist = lm.distribution(history);
        const int id = lm.id_of(t);
        const double top = *std::max_element(dist.begin(), dist.end());
        const double actual = dist[static_cast<std::size_t>(id)];
        out.push_back({t, actual, top, actual / top});
        history.push_back(id);
    }
    return out;
}

std::vector<TokenScore> score_tokens(const std::vector<TokenProb>& sidecar, const TokenList& tokens) {
    if (sidecar.size() != tokens.size()) {
        throw Error(ErrorCode::LengthMismatch, "sidecar has " + std::to_string(sidecar.size()) +
                                                   " token probabilities for " + std::to_string(tokens.size()) +
                                                   " tokens");
    }
    std::vector<TokenScore> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tp = sidecar[i];
        if (!(tp.actual_prob > 0.0 && tp.actual_prob <= tp.top_prob && tp.top_prob <= 1.0)) {
            throw Error(ErrorCode::ProbabilityOutOfRange, "token " + std::to_string(i) + ": need 0 < actual <= top <= 1");
        }
        out.push_back({tokens[i], tp.actual_prob, tp.top_prob, tp.actual_prob / tp.top_prob});
    }
    return out;
}

std::size_t frac_bin(double frac_p) {
    if (!(frac_p >= 0.0)) return 0;
    return std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(frac_p * 10.0)));
}

FracPHistogram histogram(const std::vector<TokenScore>& scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyScores, "cannot build a histogram from zero tokens");
    std::array<std::size_t, 10> counts{};
    for (const auto& s : scores) ++counts[frac_bin(s.frac_p)];
    FracPHistogram h;
    const double n = static_cast<double>(scores.size());
    for (std::size_t i = 0; i < 10; ++i) h.bins[i] = 100.0 * static_cast<double>(counts[i]) / n;
    return h;
}

}  // namespace trustscreen::lm
