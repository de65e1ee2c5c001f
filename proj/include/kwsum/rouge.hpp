#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "kwsum/errors.hpp"
#include "kwsum/text.hpp"

namespace kwsum {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    std::string variant;
};

namespace detail {

inline double f_score(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

inline std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& toks,
                                                             int n) {
    std::map<std::vector<std::string>, long> counts;
    if (static_cast<int>(toks.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + static_cast<long>(i),
                                          toks.begin() + static_cast<long>(i) + n)];
    }
    return counts;
}

inline long lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const size_t m = a.size(), n = b.size();
    std::vector<long> prev(n + 1, 0), cur(n + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

// Weighted LCS with weight f(len) = len^alpha on runs of matches consecutive
// in both sequences. Exact maximum over all alignments, computed bottom-up on
// the state (i, j, current run length):
//   S(i,j,r) = max( match: f(r+1)-f(r) + S(i+1,j+1,r+1),
//                   skip either side with the run reset to 0 ).
// The common two-table shortcut that tracks one run length per cell is not
// exact (e.g. "x x" vs "x x y x" loses the length-2 run).
inline double wlcs_score(const std::vector<std::string>& a, const std::vector<std::string>& b,
                         double alpha) {
    const size_t m = a.size(), n = b.size();
    if (m == 0 || n == 0) return 0.0;
    const size_t r_max = std::min(m, n);
    std::vector<double> fw(r_max + 2, 0.0);
    for (size_t r = 0; r < fw.size(); ++r) fw[r] = std::pow(static_cast<double>(r), alpha);

    const auto idx = [&](size_t j, size_t r) { return j * (r_max + 1) + r; };
    std::vector<double> next((n + 1) * (r_max + 1), 0.0); // layer i+1
    std::vector<double> cur((n + 1) * (r_max + 1), 0.0);  // layer i
    for (size_t ii = m; ii-- > 0;) {
        for (size_t j = n; j-- > 0;) {
            const bool match = a[ii] == b[j];
            const double skip_a = next[idx(j, 0)];
            const double skip_b = cur[idx(j + 1, 0)];
            const double best_skip = std::max(skip_a, skip_b);
            const size_t r_top = std::min({ii, j, r_max});
            for (size_t r = 0; r <= r_top; ++r) {
                double best = best_skip;
                if (match && r + 1 <= r_max) { // a run never exceeds min(m, n)
                    const double take = fw[r + 1] - fw[r] + next[idx(j + 1, r + 1)];
                    best = std::max(best, take);
                }
                cur[idx(j, r)] = best;
            }
        }
        std::swap(next, cur);
        std::fill(cur.begin(), cur.end(), 0.0);
    }
    return next[idx(0, 0)];
}

} // namespace detail

// Clipped n-gram overlap. Tokenization matches the generator side: case
// folded, punctuation split.
inline RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n) {
    if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
    RougeScore s;
    s.variant = std::to_string(n);
    const auto cand = detail::ngram_counts(words(candidate), n);
    const auto ref = detail::ngram_counts(words(reference), n);
    long cand_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [g, c] : cand) cand_total += c;
    for (const auto& [g, c] : ref) ref_total += c;
    for (const auto& [g, c] : cand) {
        const auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    s.precision = cand_total == 0 ? 0.0 : static_cast<double>(overlap) / cand_total;
    s.recall = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / ref_total;
    s.f = detail::f_score(s.precision, s.recall);
    return s;
}

inline RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    RougeScore s;
    s.variant = "l";
    const auto cand = words(candidate);
    const auto ref = words(reference);
    const long lcs = detail::lcs_length(cand, ref);
    s.precision = cand.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(cand.size());
    s.recall = ref.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(ref.size());
    s.f = detail::f_score(s.precision, s.recall);
    return s;
}

// Consecutive-run-weighted LCS; recall and precision invert the weight
// function: R = (WLCS / f(|ref|))^(1/alpha), and likewise for precision.
inline RougeScore rouge_w(const std::string& candidate, const std::string& reference,
                          double alpha = 1.2) {
    if (alpha <= 1.0) throw std::invalid_argument("rouge_w: alpha must be > 1");
    RougeScore s;
    s.variant = "w";
    const auto cand = words(candidate);
    const auto ref = words(reference);
    if (cand.empty() || ref.empty()) return s;
    const double wlcs = detail::wlcs_score(cand, ref, alpha);
    const double inv = 1.0 / alpha;
    s.precision = std::pow(wlcs / std::pow(static_cast<double>(cand.size()), alpha), inv);
    s.recall = std::pow(wlcs / std::pow(static_cast<double>(ref.size()), alpha), inv);
    s.f = detail::f_score(s.precision, s.recall);
    return s;
}

struct RougeVariant {
    enum class Kind { N, L, W } kind = Kind::N;
    int n = 1;
    double alpha = 1.2;

    std::string name() const {
        switch (kind) {
            case Kind::N: return std::to_string(n);
            case Kind::L: return "l";
            case Kind::W: return "w";
        }
        return "?";
    }

    static RougeVariant parse(const std::string& s) {
        RougeVariant v;
        if (s == "l" || s == "L") {
            v.kind = Kind::L;
        } else if (s == "w" || s == "W") {
            v.kind = Kind::W;
        } else {
            v.kind = Kind::N;
            try {
                v.n = std::stoi(s);
            } catch (const std::exception&) {
                throw std::invalid_argument("unknown rouge variant: " + s);
            }
            if (v.n < 1) throw std::invalid_argument("unknown rouge variant: " + s);
        }
        return v;
    }
};

inline RougeScore score_variant(const std::string& candidate, const std::string& reference,
                                const RougeVariant& v) {
    switch (v.kind) {
        case RougeVariant::Kind::L: return rouge_l(candidate, reference);
        case RougeVariant::Kind::W: return rouge_w(candidate, reference, v.alpha);
        case RougeVariant::Kind::N: default: return rouge_n(candidate, reference, v.n);
    }
}

// Arithmetic mean of P/R/F per variant over (candidate, reference) pairs.
inline std::vector<RougeScore> evaluate_corpus(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<RougeVariant>& variants) {
    if (pairs.empty()) throw DataError("evaluate_corpus: empty pair list");
    std::vector<RougeScore> means;
    for (const auto& v : variants) {
        RougeScore mean;
        mean.variant = v.name();
        for (const auto& [cand, ref] : pairs) {
            const RougeScore s = score_variant(cand, ref, v);
            mean.precision += s.precision;
            mean.recall += s.recall;
            mean.f += s.f;
        }
        const auto n = static_cast<double>(pairs.size());
        mean.precision /= n;
        mean.recall /= n;
        mean.f /= n;
        means.push_back(mean);
    }
    return means;
}

} // namespace kwsum
