#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kwsum/errors.hpp"
#include "kwsum/rng.hpp"
#include "kwsum/tensor.hpp"
#include "kwsum/text.hpp"

namespace kwsum {

// Sentence boundary: . ! ? followed by whitespace and an uppercase letter,
// unless the token ending at the period is a known abbreviation.
inline std::vector<std::string> split_sentences(const std::string& text) {
    static const std::array<const char*, 12> abbreviations = {
        "e.g", "i.e", "al", "dr", "mr", "mrs", "ms", "fig", "vs", "etc", "cf", "no"};

    const auto is_abbrev = [&](size_t punct_pos) {
        if (text[punct_pos] != '.') return false;
        size_t start = punct_pos;
        while (start > 0) {
            const char c = text[start - 1];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '.') {
                --start;
            } else {
                break;
            }
        }
        std::string token = text.substr(start, punct_pos - start);
        for (auto& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (const char* a : abbreviations) {
            if (token == a) return true;
        }
        return false;
    };

    std::vector<std::string> sentences;
    size_t seg_start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        size_t j = i + 1;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        const bool boundary = j > i + 1 && j < text.size() &&
                              std::isupper(static_cast<unsigned char>(text[j])) && !is_abbrev(i);
        if (boundary) {
            sentences.push_back(text.substr(seg_start, i + 1 - seg_start));
            seg_start = j;
            i = j - 1;
        }
    }
    if (seg_start < text.size()) {
        std::string tail = text.substr(seg_start);
        if (!words(tail).empty()) sentences.push_back(std::move(tail));
    }
    // trim and drop segments carrying no words
    std::vector<std::string> out;
    for (auto& s : sentences) {
        size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        if (b > a && !words(std::string_view(s).substr(a, b - a)).empty()) {
            out.push_back(s.substr(a, b - a));
        }
    }
    return out;
}

struct SentenceEmbeddings {
    std::vector<std::string> sentences;
    Mat vectors; // [n_sentences x d_embed]
    int d_embed = 0;
};

using SentenceEncoder = std::function<std::vector<double>(const std::string&)>;

// Default encoder: L2-normalized term frequencies hashed into d_embed
// buckets. Deterministic and dependency-free; 768 matches the interface of
// the pretrained sentence encoders this stands in for.
struct HashingEncoder {
    int d_embed = 768;

    std::vector<double> operator()(const std::string& sentence) const {
        std::vector<double> v(static_cast<size_t>(d_embed), 0.0);
        for (const auto& w : words(sentence)) {
            v[fnv1a(w) % static_cast<std::uint64_t>(d_embed)] += 1.0;
        }
        double norm = 0.0;
        for (const double x : v) norm += x * x;
        if (norm > 0) {
            norm = std::sqrt(norm);
            for (auto& x : v) x /= norm;
        }
        return v;
    }
};

inline SentenceEmbeddings embed_sentences(const std::vector<std::string>& sentences,
                                          const SentenceEncoder& encoder) {
    SentenceEmbeddings emb;
    emb.sentences = sentences;
    for (size_t i = 0; i < sentences.size(); ++i) {
        std::vector<double> v;
        try {
            v = encoder(sentences[i]);
        } catch (const std::exception& e) {
            throw DataError("embedding backend failed at sentence " + std::to_string(i) + ": " +
                            e.what());
        }
        if (i == 0) {
            emb.d_embed = static_cast<int>(v.size());
            if (emb.d_embed < 1) throw DataError("embedding backend failed at sentence 0: empty vector");
            emb.vectors = Mat(static_cast<int>(sentences.size()), emb.d_embed);
        } else if (static_cast<int>(v.size()) != emb.d_embed) {
            throw DataError("embedding backend failed at sentence " + std::to_string(i) +
                            ": dimension mismatch");
        }
        for (int k = 0; k < emb.d_embed; ++k) {
            emb.vectors(static_cast<int>(i), k) = v[static_cast<size_t>(k)];
        }
        if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
            throw DataError("embedding backend failed at sentence " + std::to_string(i) +
                            ": non-finite value");
        }
    }
    return emb;
}

namespace detail {

inline double euclidean(const Mat& vectors, int a, int b) {
    double s = 0.0;
    const double* ra = vectors.row(a);
    const double* rb = vectors.row(b);
    for (int k = 0; k < vectors.cols; ++k) {
        const double d = ra[k] - rb[k];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace detail

struct KMedoidResult {
    std::vector<int> medoids;          // point indices, one per cluster
    std::vector<int> assignment;       // cluster id per point
    double cost = 0.0;                 // sum of member-to-medoid distances
    std::vector<double> cost_history;  // per-iteration cost, non-increasing
};

// Alternating assignment/update clustering with data points as centers:
// assign each point to the nearest medoid (Euclidean), then move each medoid
// to the member minimizing total intra-cluster distance; repeat to a fixed
// point (at most 100 iterations). Ties break toward the lower index.
inline KMedoidResult k_medoid(const Mat& vectors, int k, std::uint64_t seed) {
    const int n = vectors.rows;
    if (k < 1) throw std::invalid_argument("k_medoid: k must be >= 1");
    if (k > n) throw DataError("k_medoid: k exceeds the number of points");

    Rng rng(seed);
    KMedoidResult r;
    r.medoids = rng.sample_without_replacement(n, k);
    std::sort(r.medoids.begin(), r.medoids.end());
    r.assignment.assign(static_cast<size_t>(n), 0);

    const auto assign_and_cost = [&]() {
        double cost = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = detail::euclidean(vectors, i, r.medoids[static_cast<size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            r.assignment[static_cast<size_t>(i)] = best;
            cost += best_d;
        }
        return cost;
    };

    double cost = assign_and_cost();
    r.cost_history.push_back(cost);
    for (int iter = 0; iter < 100; ++iter) {
        // update step: best member of each cluster
        std::vector<int> new_medoids = r.medoids;
        for (int c = 0; c < k; ++c) {
            double best_total = std::numeric_limits<double>::infinity();
            int best_m = -1;
            for (int m = 0; m < n; ++m) {
                if (r.assignment[static_cast<size_t>(m)] != c) continue;
                double total = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (r.assignment[static_cast<size_t>(i)] == c) {
                        total += detail::euclidean(vectors, i, m);
                    }
                }
                if (total < best_total) {
                    best_total = total;
                    best_m = m;
                }
            }
            if (best_m >= 0) new_medoids[static_cast<size_t>(c)] = best_m; // keep old if empty
        }
        if (new_medoids == r.medoids) break;
        r.medoids = std::move(new_medoids);
        cost = assign_and_cost();
        r.cost_history.push_back(cost);
    }
    r.cost = cost;
    return r;
}

inline KMedoidResult k_medoid(const SentenceEmbeddings& emb, int k, std::uint64_t seed) {
    return k_medoid(emb.vectors, k, seed);
}

enum class ClusterMode { Pam, KMeans };

inline ClusterMode cluster_mode_from_string(std::string_view s) {
    if (s == "pam") return ClusterMode::Pam;
    if (s == "kmeans") return ClusterMode::KMeans;
    throw std::invalid_argument("unknown cluster mode: " + std::string(s));
}

inline std::string to_string(ClusterMode m) {
    return m == ClusterMode::Pam ? "pam" : "kmeans";
}

// Lloyd iterations on mean centroids, then each cluster contributes the
// member nearest to its centroid.
inline KMedoidResult kmeans_select(const Mat& vectors, int k, std::uint64_t seed) {
    const int n = vectors.rows;
    if (k < 1) throw std::invalid_argument("kmeans_select: k must be >= 1");
    if (k > n) throw DataError("kmeans_select: k exceeds the number of points");
    const int d = vectors.cols;

    Rng rng(seed);
    const auto init = rng.sample_without_replacement(n, k);
    Mat centroids(k, d);
    for (int c = 0; c < k; ++c) {
        for (int j = 0; j < d; ++j) centroids(c, j) = vectors(init[static_cast<size_t>(c)], j);
    }

    std::vector<int> assignment(static_cast<size_t>(n), 0);
    const auto dist2 = [&](int i, int c) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
            const double diff = vectors(i, j) - centroids(c, j);
            s += diff * diff;
        }
        return s;
    };

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = dist2(i, c);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assignment[static_cast<size_t>(i)] != best) {
                assignment[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int c = 0; c < k; ++c) {
            std::vector<double> mean(static_cast<size_t>(d), 0.0);
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (assignment[static_cast<size_t>(i)] != c) continue;
                ++count;
                for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += vectors(i, j);
            }
            if (count == 0) continue;
            for (int j = 0; j < d; ++j) centroids(c, j) = mean[static_cast<size_t>(j)] / count;
        }
    }

    KMedoidResult r;
    r.assignment = assignment;
    r.medoids.assign(static_cast<size_t>(k), 0);
    for (int c = 0; c < k; ++c) {
        double best_d = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < n; ++i) {
            if (assignment[static_cast<size_t>(i)] != c) continue;
            const double dd = dist2(i, c);
            if (dd < best_d) {
                best_d = dd;
                best_i = i;
            }
        }
        r.medoids[static_cast<size_t>(c)] = best_i;
    }
    for (int i = 0; i < n; ++i) {
        r.cost += detail::euclidean(vectors, i, r.medoids[static_cast<size_t>(assignment[static_cast<size_t>(i)])]);
    }
    return r;
}

struct ExtractionResult {
    std::vector<int> selected_indices; // strictly increasing
    double ratio = 0.0;
    std::vector<int> medoid_assignment; // cluster id per sentence
};

struct ExtractiveSummary {
    ExtractionResult result;
    std::string summary;
};

inline constexpr int k_medoid_restarts = 10;

// Selects max(1, round(ratio * n)) sentences as cluster centers and returns
// them in original document order. PAM runs best-of-10 seeded restarts.
inline ExtractiveSummary extract_summary(const std::string& body, double ratio,
                                         const SentenceEncoder& encoder, std::uint64_t seed,
                                         ClusterMode mode = ClusterMode::Pam) {
    if (ratio <= 0 || ratio > 1) throw std::invalid_argument("extract_summary: ratio in (0, 1]");
    const auto sentences = split_sentences(body);
    if (sentences.empty()) throw DataError("empty document");
    const int n = static_cast<int>(sentences.size());
    int k = static_cast<int>(std::floor(ratio * n + 0.5)); // round half up
    k = std::max(1, std::min(k, n));

    const SentenceEmbeddings emb = embed_sentences(sentences, encoder);
    KMedoidResult best;
    if (mode == ClusterMode::KMeans) {
        best = kmeans_select(emb.vectors, k, seed);
    } else {
        bool have = false;
        for (int restart = 0; restart < k_medoid_restarts; ++restart) {
            KMedoidResult r =
                k_medoid(emb.vectors, k, mix_seed(seed, static_cast<std::uint64_t>(restart)));
            if (!have || r.cost < best.cost) {
                best = std::move(r);
                have = true;
            }
        }
    }

    ExtractiveSummary out;
    out.result.ratio = ratio;
    out.result.medoid_assignment = best.assignment;
    out.result.selected_indices = best.medoids;
    std::sort(out.result.selected_indices.begin(), out.result.selected_indices.end());
    for (const int idx : out.result.selected_indices) {
        if (!out.summary.empty()) out.summary.push_back(' ');
        out.summary += sentences[static_cast<size_t>(idx)];
    }
    return out;
}

// Precomputed-embedding file: "EMB1", u32 n, u32 d, then n*d little-endian
// f32; sentences ship in a sidecar text file, one per line.
inline void save_embeddings(const SentenceEmbeddings& emb, const std::string& emb_path,
                            const std::string& sentences_path) {
    std::ofstream out(emb_path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + emb_path);
    out.write("EMB1", 4);
    const auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(static_cast<std::uint32_t>(emb.vectors.rows));
    put_u32(static_cast<std::uint32_t>(emb.d_embed));
    for (const double x : emb.vectors.a) {
        const float f = static_cast<float>(x);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(bits);
    }
    std::ofstream sout(sentences_path, std::ios::binary);
    if (!sout) throw DataError("cannot write sentence sidecar: " + sentences_path);
    for (const auto& s : emb.sentences) sout << s << '\n';
}

inline SentenceEmbeddings load_embeddings(const std::string& emb_path,
                                          const std::string& sentences_path) {
    std::ifstream in(emb_path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + emb_path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EMB1", 4) != 0) {
        throw DataError("not an embedding file: " + emb_path);
    }
    const auto get_u32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    };
    const auto n = get_u32();
    const auto d = get_u32();
    SentenceEmbeddings emb;
    emb.d_embed = static_cast<int>(d);
    emb.vectors = Mat(static_cast<int>(n), static_cast<int>(d));
    for (auto& x : emb.vectors.a) {
        const std::uint32_t bits = get_u32();
        float f;
        std::memcpy(&f, &bits, 4);
        x = static_cast<double>(f);
    }
    if (!in) throw DataError("truncated embedding file: " + emb_path);

    std::ifstream sin(sentences_path, std::ios::binary);
    if (!sin) throw DataError("cannot open sentence sidecar: " + sentences_path);
    std::string line;
    while (std::getline(sin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        emb.sentences.push_back(line);
    }
    if (emb.sentences.size() != n) {
        throw DataError("sentence sidecar length mismatch: " + sentences_path);
    }
    return emb;
}

} // namespace kwsum
