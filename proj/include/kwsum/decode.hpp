#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "kwsum/dataset.hpp"
#include "kwsum/model.hpp"
#include "kwsum/rng.hpp"
#include "kwsum/tokenizer.hpp"

namespace kwsum {

struct DecodeParams {
    double temperature = 1.0;
    double top_p = 0.8;
    int top_k = 50;
    bool greedy = false; // "top 1": argmax instead of sampling
    int max_new_tokens = 64;
    std::uint64_t seed = 42;

    void validate() const {
        if (temperature <= 0) throw std::invalid_argument("DecodeParams: temperature must be > 0");
        if (top_p <= 0 || top_p > 1) {
            throw std::invalid_argument("DecodeParams: top_p must be in (0, 1]");
        }
        if (top_k < 1) throw std::invalid_argument("DecodeParams: top_k must be >= 1");
        if (max_new_tokens < 0) {
            throw std::invalid_argument("DecodeParams: max_new_tokens must be >= 0");
        }
    }
};

// softmax(logits / t) with max subtraction; sums to 1 within 1e-9.
inline std::vector<double> apply_temperature(const std::vector<double>& logits, double t) {
    if (t <= 0) throw std::invalid_argument("apply_temperature: temperature must be > 0");
    if (logits.empty()) throw std::invalid_argument("apply_temperature: empty logits");
    double maxv = logits[0] / t;
    for (const double u : logits) maxv = std::max(maxv, u / t);
    std::vector<double> probs(logits.size());
    double denom = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] / t - maxv);
        denom += probs[i];
    }
    for (auto& p : probs) p /= denom;
    return probs;
}

// Smallest prefix of ids, ordered by probability descending (lower id first
// on ties), whose cumulative mass reaches p; then capped to at most k ids.
// Never empty.
inline std::vector<int> top_p_candidates(const std::vector<double>& probs, double p, int k) {
    std::vector<int> ids(probs.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (probs[static_cast<size_t>(a)] != probs[static_cast<size_t>(b)]) {
            return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)];
        }
        return a < b;
    });
    std::vector<int> out;
    double cum = 0.0;
    for (const int id : ids) {
        out.push_back(id);
        cum += probs[static_cast<size_t>(id)];
        if (cum >= p) break;
    }
    if (static_cast<int>(out.size()) > k) out.resize(static_cast<size_t>(k));
    return out;
}

// Greedy: argmax (lowest id on exact ties). Otherwise renormalize over the
// candidate set and draw with the caller's generator.
inline int sample_next(const std::vector<double>& probs, const DecodeParams& dp, Rng& rng) {
    if (dp.greedy) {
        int best = 0;
        for (int i = 1; i < static_cast<int>(probs.size()); ++i) {
            if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(best)]) best = i;
        }
        return best;
    }
    const auto candidates = top_p_candidates(probs, dp.top_p, dp.top_k);
    double total = 0.0;
    for (const int id : candidates) total += probs[static_cast<size_t>(id)];
    const double u = rng.real01() * total;
    double cum = 0.0;
    for (const int id : candidates) {
        cum += probs[static_cast<size_t>(id)];
        if (u < cum) return id;
    }
    return candidates.back();
}

// Autoregressive generation conditioned on the keyword prompt
// [BOS] keywords [SUM]; stops at EOS, the token budget, or a full context.
// Returns the decoded text strictly between the separator and the EOS.
inline std::string generate(const ModelParams& params, const KeywordSet& keywords,
                            const DecodeParams& dp, const Vocab& vocab) {
    dp.validate();
    std::string joined;
    for (const auto& w : keywords.words) {
        if (!joined.empty()) joined.push_back(' ');
        joined += w;
    }
    TokenSequence row;
    row.push_back(special::bos);
    for (const int id : encode(joined, vocab)) row.push_back(id);
    row.push_back(special::sum);
    if (static_cast<int>(row.size()) > params.config.max_len - 1) {
        throw DataError("prompt too long");
    }

    Rng rng(dp.seed);
    TokenSequence generated;
    for (int n = 0; n < dp.max_new_tokens; ++n) {
        if (static_cast<int>(row.size()) >= params.config.max_len) break;
        const ForwardOutput out = forward(params, row);
        const double* last = out.lm_logits.row(out.lm_logits.rows - 1);
        const std::vector<double> logits(last, last + out.lm_logits.cols);
        const auto probs = apply_temperature(logits, dp.temperature);
        const int next = sample_next(probs, dp, rng);
        if (next == special::eos) break;
        row.push_back(next);
        generated.push_back(next);
    }
    return decode(generated, vocab);
}

} // namespace kwsum
