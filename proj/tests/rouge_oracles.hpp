#pragma once

// Independent reference implementations of LCS and weighted LCS, written as
// direct recursions on their definitions. Used to check the DP code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Seq = std::vector<std::string>;

// Plain recursion, no memo: max over match/skip-left/skip-right.
inline long lcs_naive(const Seq& a, const Seq& b, size_t i = 0, size_t j = 0) {
    if (i == a.size() || j == b.size()) return 0;
    long best = 0;
    if (a[i] == b[j]) best = 1 + lcs_naive(a, b, i + 1, j + 1);
    best = std::max(best, lcs_naive(a, b, i + 1, j));
    best = std::max(best, lcs_naive(a, b, i, j + 1));
    return best;
}

// Weighted LCS, f(len) = len^alpha. State carries the length of the run of
// consecutive (in both sequences) matches ending just before (i, j); any skip
// resets it.
inline double wlcs_naive(const Seq& a, const Seq& b, double alpha, size_t i = 0, size_t j = 0,
                         long run = 0) {
    if (i == a.size() || j == b.size()) return 0.0;
    double best = 0.0;
    if (a[i] == b[j]) {
        const double gain = std::pow(static_cast<double>(run + 1), alpha) -
                            std::pow(static_cast<double>(run), alpha);
        best = gain + wlcs_naive(a, b, alpha, i + 1, j + 1, run + 1);
    }
    best = std::max(best, wlcs_naive(a, b, alpha, i + 1, j, 0));
    best = std::max(best, wlcs_naive(a, b, alpha, i, j + 1, 0));
    return best;
}

// The same recursions with memoized states; values coincide with the no-memo
// versions (cross-checked in the tests) but run fast enough for exhaustive
// sweeps.
struct MemoLcs {
    const Seq& a;
    const Seq& b;
    std::map<std::pair<size_t, size_t>, long> memo;

    long run(size_t i, size_t j) {
        if (i == a.size() || j == b.size()) return 0;
        const auto key = std::make_pair(i, j);
        const auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        long best = 0;
        if (a[i] == b[j]) best = 1 + run(i + 1, j + 1);
        best = std::max(best, run(i + 1, j));
        best = std::max(best, run(i, j + 1));
        memo[key] = best;
        return best;
    }
};

struct MemoWlcs {
    const Seq& a;
    const Seq& b;
    double alpha;
    std::map<std::tuple<size_t, size_t, long>, double> memo;

    double run(size_t i, size_t j, long r) {
        if (i == a.size() || j == b.size()) return 0.0;
        const auto key = std::make_tuple(i, j, r);
        const auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        double best = 0.0;
        if (a[i] == b[j]) {
            const double gain = std::pow(static_cast<double>(r + 1), alpha) -
                                std::pow(static_cast<double>(r), alpha);
            best = gain + run(i + 1, j + 1, r + 1);
        }
        best = std::max(best, run(i + 1, j, 0));
        best = std::max(best, run(i, j + 1, 0));
        memo[key] = best;
        return best;
    }
};

inline long lcs_memo(const Seq& a, const Seq& b) { return MemoLcs{a, b, {}}.run(0, 0); }

inline double wlcs_memo(const Seq& a, const Seq& b, double alpha) {
    return MemoWlcs{a, b, alpha, {}}.run(0, 0, 0);
}

// Array-backed memo versions of the same recursions, fast enough for the
// exhaustive length-6 sweep. Values equal the std::map versions (same
// recursion); both are cross-checked against the no-memo forms on shorter
// inputs.
inline long lcs_memo_flat(const Seq& a, const Seq& b) {
    const size_t m = a.size(), n = b.size();
    std::vector<long> memo((m + 1) * (n + 1), -1);
    const auto idx = [&](size_t i, size_t j) { return i * (n + 1) + j; };
    const std::function<long(size_t, size_t)> rec = [&](size_t i, size_t j) -> long {
        if (i == m || j == n) return 0;
        long& slot = memo[idx(i, j)];
        if (slot >= 0) return slot;
        long best = 0;
        if (a[i] == b[j]) best = 1 + rec(i + 1, j + 1);
        best = std::max(best, rec(i + 1, j));
        best = std::max(best, rec(i, j + 1));
        slot = best;
        return best;
    };
    return rec(0, 0);
}

inline double wlcs_memo_flat(const Seq& a, const Seq& b, double alpha) {
    const size_t m = a.size(), n = b.size();
    const size_t rdim = std::min(m, n) + 1;
    std::vector<double> memo((m + 1) * (n + 1) * rdim, -1.0);
    const auto idx = [&](size_t i, size_t j, size_t r) { return (i * (n + 1) + j) * rdim + r; };
    const std::function<double(size_t, size_t, size_t)> rec = [&](size_t i, size_t j,
                                                                  size_t r) -> double {
        if (i == m || j == n) return 0.0;
        double& slot = memo[idx(i, j, r)];
        if (slot >= 0.0) return slot;
        double best = 0.0;
        if (a[i] == b[j]) {
            const double gain = std::pow(static_cast<double>(r + 1), alpha) -
                                std::pow(static_cast<double>(r), alpha);
            best = gain + rec(i + 1, j + 1, r + 1);
        }
        best = std::max(best, rec(i + 1, j, 0));
        best = std::max(best, rec(i, j + 1, 0));
        slot = best;
        return best;
    };
    return rec(0, 0, 0);
}

// All sequences over {x, y, z} up to max_len, shortest first.
inline std::vector<Seq> all_sequences(int max_len) {
    const std::vector<std::string> alphabet = {"x", "y", "z"};
    std::vector<Seq> out = {{}};
    std::vector<Seq> frontier = {{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Seq> next;
        for (const auto& seq : frontier) {
            for (const auto& sym : alphabet) {
                Seq s = seq;
                s.push_back(sym);
                next.push_back(s);
                out.push_back(std::move(s));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

} // namespace oracle
