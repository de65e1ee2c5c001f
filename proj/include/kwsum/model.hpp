#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kwsum/dataset.hpp"
#include "kwsum/errors.hpp"
#include "kwsum/rng.hpp"
#include "kwsum/tensor.hpp"
#include "kwsum/tokenizer.hpp"

namespace kwsum {

struct ModelConfig {
    int vocab_size = 0;
    int max_len = 128; // reference setup uses 1024
    int n_layers = 2;  // reference setup uses 6
    int n_heads = 2;   // reference setup uses 12
    int d_model = 64;  // reference setup uses 768
    int d_ff = 0;      // 0 selects 4 * d_model
    std::uint64_t seed = 42;

    int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
    int head_dim() const { return d_model / n_heads; }

    void validate() const {
        if (vocab_size <= 0 || n_layers <= 0 || n_heads <= 0 || d_model <= 0 || ff_dim() <= 0) {
            throw std::invalid_argument("ModelConfig: all dimensions must be positive");
        }
        if (max_len < 8) throw std::invalid_argument("ModelConfig: max_len must be >= 8");
        if (d_model % n_heads != 0) {
            throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
        }
    }
};

// Pre-norm decoder block parameters. Linear weights are [out x in]; the
// language-model head is the transposed token embedding (no separate tensor).
struct LayerParams {
    Vec ln1_g, ln1_b;
    Mat wq, wk, wv, wo;
    Vec bq, bk, bv, bo;
    Vec ln2_g, ln2_b;
    Mat w_fc;   // [F x D]
    Vec b_fc;   // [F]
    Mat w_proj; // [D x F]
    Vec b_proj; // [D]
};

struct ModelParams {
    ModelConfig config;
    Mat tok_emb; // [V x D], tied with the LM head
    Mat pos_emb; // [max_len x D]
    std::vector<LayerParams> layers;
    Vec lnf_g, lnf_b;
    Vec mc_w; // [D]
    Vec mc_b; // [1]
};

struct TensorRef {
    std::string name;
    double* data;
    size_t size;
    int rows;
    int cols;
};

// Fixed enumeration order; checkpoints and the optimizer both rely on it.
inline std::vector<TensorRef> tensor_refs(ModelParams& p) {
    std::vector<TensorRef> refs;
    const auto mat = [&](const std::string& name, Mat& m) {
        refs.push_back({name, m.a.data(), m.a.size(), m.rows, m.cols});
    };
    const auto vec = [&](const std::string& name, Vec& v) {
        refs.push_back({name, v.data(), v.size(), 1, static_cast<int>(v.size())});
    };
    mat("tok_emb", p.tok_emb);
    mat("pos_emb", p.pos_emb);
    for (size_t l = 0; l < p.layers.size(); ++l) {
        const std::string h = "h" + std::to_string(l) + ".";
        LayerParams& lp = p.layers[l];
        vec(h + "ln1_g", lp.ln1_g);
        vec(h + "ln1_b", lp.ln1_b);
        mat(h + "wq", lp.wq);
        vec(h + "bq", lp.bq);
        mat(h + "wk", lp.wk);
        vec(h + "bk", lp.bk);
        mat(h + "wv", lp.wv);
        vec(h + "bv", lp.bv);
        mat(h + "wo", lp.wo);
        vec(h + "bo", lp.bo);
        vec(h + "ln2_g", lp.ln2_g);
        vec(h + "ln2_b", lp.ln2_b);
        mat(h + "w_fc", lp.w_fc);
        vec(h + "b_fc", lp.b_fc);
        mat(h + "w_proj", lp.w_proj);
        vec(h + "b_proj", lp.b_proj);
    }
    vec("lnf_g", p.lnf_g);
    vec("lnf_b", p.lnf_b);
    vec("mc_w", p.mc_w);
    vec("mc_b", p.mc_b);
    return refs;
}

inline ModelParams make_params_shell(const ModelConfig& cfg) {
    cfg.validate();
    const int d = cfg.d_model;
    const int f = cfg.ff_dim();
    ModelParams p;
    p.config = cfg;
    p.tok_emb = Mat(cfg.vocab_size, d);
    p.pos_emb = Mat(cfg.max_len, d);
    p.layers.resize(static_cast<size_t>(cfg.n_layers));
    for (auto& lp : p.layers) {
        lp.ln1_g.assign(static_cast<size_t>(d), 0.0);
        lp.ln1_b.assign(static_cast<size_t>(d), 0.0);
        lp.wq = Mat(d, d);
        lp.wk = Mat(d, d);
        lp.wv = Mat(d, d);
        lp.wo = Mat(d, d);
        lp.bq.assign(static_cast<size_t>(d), 0.0);
        lp.bk.assign(static_cast<size_t>(d), 0.0);
        lp.bv.assign(static_cast<size_t>(d), 0.0);
        lp.bo.assign(static_cast<size_t>(d), 0.0);
        lp.ln2_g.assign(static_cast<size_t>(d), 0.0);
        lp.ln2_b.assign(static_cast<size_t>(d), 0.0);
        lp.w_fc = Mat(f, d);
        lp.b_fc.assign(static_cast<size_t>(f), 0.0);
        lp.w_proj = Mat(d, f);
        lp.b_proj.assign(static_cast<size_t>(d), 0.0);
    }
    p.lnf_g.assign(static_cast<size_t>(d), 0.0);
    p.lnf_b.assign(static_cast<size_t>(d), 0.0);
    p.mc_w.assign(static_cast<size_t>(d), 0.0);
    p.mc_b.assign(1, 0.0);
    return p;
}

inline ModelParams zeros_like(const ModelParams& p) { return make_params_shell(p.config); }

// Gaussian(0, 0.02) weights, zero biases, unit layer-norm gains; the draw
// order is fixed, so a seed fully determines the parameters.
inline ModelParams init_params(const ModelConfig& cfg) {
    ModelParams p = make_params_shell(cfg);
    Rng rng(cfg.seed);
    const auto fill_gauss = [&](Mat& m) {
        for (auto& x : m.a) x = rng.gaussian(0.0, 0.02);
    };
    const auto fill_gauss_vec = [&](Vec& v) {
        for (auto& x : v) x = rng.gaussian(0.0, 0.02);
    };
    const auto ones = [](Vec& v) { v.assign(v.size(), 1.0); };

    fill_gauss(p.tok_emb);
    fill_gauss(p.pos_emb);
    for (auto& lp : p.layers) {
        ones(lp.ln1_g);
        fill_gauss(lp.wq);
        fill_gauss(lp.wk);
        fill_gauss(lp.wv);
        fill_gauss(lp.wo);
        ones(lp.ln2_g);
        fill_gauss(lp.w_fc);
        fill_gauss(lp.w_proj);
    }
    ones(p.lnf_g);
    fill_gauss_vec(p.mc_w);
    return p;
}

namespace nn {

inline constexpr double layernorm_eps = 1e-5;

inline void layernorm_forward(const Mat& x, const Vec& g, const Vec& b, Mat& out, Mat& xhat,
                              Vec& inv_sigma) {
    const int d = x.cols;
    out = Mat(x.rows, d);
    xhat = Mat(x.rows, d);
    inv_sigma.assign(static_cast<size_t>(x.rows), 0.0);
    for (int t = 0; t < x.rows; ++t) {
        const double* xr = x.row(t);
        double mu = 0.0;
        for (int i = 0; i < d; ++i) mu += xr[i];
        mu /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
        var /= d;
        const double is = 1.0 / std::sqrt(var + layernorm_eps);
        inv_sigma[static_cast<size_t>(t)] = is;
        double* xh = xhat.row(t);
        double* o = out.row(t);
        for (int i = 0; i < d; ++i) {
            xh[i] = (xr[i] - mu) * is;
            o[i] = g[static_cast<size_t>(i)] * xh[i] + b[static_cast<size_t>(i)];
        }
    }
}

inline void layernorm_backward(const Mat& xhat, const Vec& inv_sigma, const Vec& g,
                               const Mat& d_out, Mat& d_x, Vec& d_g, Vec& d_b) {
    const int d = xhat.cols;
    if (d_x.rows != xhat.rows || d_x.cols != d) d_x = Mat(xhat.rows, d);
    for (int t = 0; t < xhat.rows; ++t) {
        const double* xh = xhat.row(t);
        const double* dy = d_out.row(t);
        double* dx = d_x.row(t);
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double gi = g[static_cast<size_t>(i)] * dy[i];
            m1 += gi;
            m2 += gi * xh[i];
        }
        m1 /= d;
        m2 /= d;
        const double is = inv_sigma[static_cast<size_t>(t)];
        for (int i = 0; i < d; ++i) {
            const double gi = g[static_cast<size_t>(i)] * dy[i];
            dx[i] += is * (gi - m1 - xh[i] * m2);
            d_g[static_cast<size_t>(i)] += dy[i] * xh[i];
            d_b[static_cast<size_t>(i)] += dy[i];
        }
    }
}

// tanh-form GELU; constants sqrt(2/pi) and 0.044715.
inline constexpr double gelu_c = 0.7978845608028654;
inline constexpr double gelu_a = 0.044715;

inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::tanh(gelu_c * (x + gelu_a * x * x * x)));
}

inline double gelu_grad(double x) {
    const double u = gelu_c * (x + gelu_a * x * x * x);
    const double th = std::tanh(u);
    const double sech2 = 1.0 - th * th;
    return 0.5 * (1.0 + th) + 0.5 * x * sech2 * gelu_c * (1.0 + 3.0 * gelu_a * x * x);
}

} // namespace nn

struct LayerCache {
    Mat ln1_xhat, ln1_out;
    Vec ln1_inv_sigma;
    Mat q, k, v;          // [T x D]
    std::vector<Mat> att; // per head, [T x T], zero outside the causal/pad mask
    Mat att_mix;          // [T x D]
    Mat x_mid;            // after the attention residual
    Mat ln2_xhat, ln2_out;
    Vec ln2_inv_sigma;
    Mat ff_pre, ff_act; // [T x F]
    Mat x_out;
};

struct RowCache {
    std::vector<int> row;
    Mat x0; // token + position embedding
    std::vector<LayerCache> layers;
    Mat lnf_xhat;
    Vec lnf_inv_sigma;
    Mat hidden;    // [T x D] after the final norm
    Mat lm_logits; // [T x V] when requested
    bool has_lm_logits = false;
    double mc_logit = 0.0;
    int mc_pos = 0;
};

struct ForwardOutput {
    Mat lm_logits;                           // [T x V]
    double mc_logit = 0.0;                   // from the EOS position
    Mat hidden;                              // [T x D]
    std::vector<std::vector<Mat>> attentions; // [layer][head] [T x T], when requested
};

// Tied head: logits[t] = hidden[t] . tok_emb[v] for every v.
inline Mat lm_head(const ModelParams& p, const Mat& hidden) {
    Mat logits(hidden.rows, p.config.vocab_size);
    for (int t = 0; t < hidden.rows; ++t) {
        const double* h = hidden.row(t);
        double* out = logits.row(t);
        for (int v = 0; v < p.config.vocab_size; ++v) {
            const double* e = p.tok_emb.row(v);
            double acc = 0.0;
            for (int i = 0; i < hidden.cols; ++i) acc += h[i] * e[i];
            out[v] = acc;
        }
    }
    return logits;
}

// Position the choice head reads: the row's EOS token, or the last non-pad
// position when truncation removed the EOS.
inline int mc_read_position(const std::vector<int>& row) {
    for (size_t i = row.size(); i > 0; --i) {
        if (row[i - 1] == special::eos) return static_cast<int>(i - 1);
    }
    for (size_t i = row.size(); i > 0; --i) {
        if (row[i - 1] != special::pad) return static_cast<int>(i - 1);
    }
    return static_cast<int>(row.size()) - 1;
}

inline RowCache forward_cached(const ModelParams& p, const std::vector<int>& row,
                               bool want_lm_logits) {
    const ModelConfig& cfg = p.config;
    const int t_len = static_cast<int>(row.size());
    if (t_len < 1 || t_len > cfg.max_len) {
        throw std::invalid_argument("forward: row length must be in [1, max_len]");
    }
    for (const int id : row) {
        if (id < 0 || id >= cfg.vocab_size) {
            throw std::invalid_argument("forward: token id out of range");
        }
    }

    const int d = cfg.d_model;
    const int n_heads = cfg.n_heads;
    const int dh = cfg.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    RowCache c;
    c.row = row;
    c.x0 = Mat(t_len, d);
    for (int t = 0; t < t_len; ++t) {
        const double* e = p.tok_emb.row(row[static_cast<size_t>(t)]);
        const double* pe = p.pos_emb.row(t);
        double* x = c.x0.row(t);
        for (int i = 0; i < d; ++i) x[i] = e[i] + pe[i];
    }

    Mat x = c.x0;
    c.layers.resize(static_cast<size_t>(cfg.n_layers));
    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerCache& lc = c.layers[static_cast<size_t>(l)];
        const LayerParams& lp = p.layers[static_cast<size_t>(l)];

        nn::layernorm_forward(x, lp.ln1_g, lp.ln1_b, lc.ln1_out, lc.ln1_xhat, lc.ln1_inv_sigma);
        linear_forward(lc.ln1_out, lp.wq, lp.bq, lc.q);
        linear_forward(lc.ln1_out, lp.wk, lp.bk, lc.k);
        linear_forward(lc.ln1_out, lp.wv, lp.bv, lc.v);

        lc.att.assign(static_cast<size_t>(n_heads), Mat(t_len, t_len));
        lc.att_mix = Mat(t_len, d);
        std::vector<double> scores(static_cast<size_t>(t_len));
        for (int h = 0; h < n_heads; ++h) {
            Mat& att = lc.att[static_cast<size_t>(h)];
            const int hs = h * dh;
            for (int i = 0; i < t_len; ++i) {
                const double* qi = lc.q.row(i) + hs;
                double maxv = -std::numeric_limits<double>::infinity();
                bool any = false;
                for (int j = 0; j <= i; ++j) {
                    if (row[static_cast<size_t>(j)] == special::pad) continue;
                    const double* kj = lc.k.row(j) + hs;
                    double s = 0.0;
                    for (int e = 0; e < dh; ++e) s += qi[e] * kj[e];
                    s *= scale;
                    scores[static_cast<size_t>(j)] = s;
                    if (s > maxv) maxv = s;
                    any = true;
                }
                if (!any) continue; // query with every key masked: zero row
                double denom = 0.0;
                for (int j = 0; j <= i; ++j) {
                    if (row[static_cast<size_t>(j)] == special::pad) continue;
                    const double e = std::exp(scores[static_cast<size_t>(j)] - maxv);
                    att(i, j) = e;
                    denom += e;
                }
                double* mix = lc.att_mix.row(i) + hs;
                for (int j = 0; j <= i; ++j) {
                    if (row[static_cast<size_t>(j)] == special::pad) continue;
                    const double w = att(i, j) / denom;
                    att(i, j) = w;
                    const double* vj = lc.v.row(j) + hs;
                    for (int e = 0; e < dh; ++e) mix[e] += w * vj[e];
                }
            }
        }

        Mat att_out;
        linear_forward(lc.att_mix, lp.wo, lp.bo, att_out);
        lc.x_mid = Mat(t_len, d);
        for (size_t i = 0; i < x.a.size(); ++i) lc.x_mid.a[i] = x.a[i] + att_out.a[i];

        nn::layernorm_forward(lc.x_mid, lp.ln2_g, lp.ln2_b, lc.ln2_out, lc.ln2_xhat,
                              lc.ln2_inv_sigma);
        linear_forward(lc.ln2_out, lp.w_fc, lp.b_fc, lc.ff_pre);
        lc.ff_act = Mat(lc.ff_pre.rows, lc.ff_pre.cols);
        for (size_t i = 0; i < lc.ff_pre.a.size(); ++i) lc.ff_act.a[i] = nn::gelu(lc.ff_pre.a[i]);
        Mat ff_out;
        linear_forward(lc.ff_act, lp.w_proj, lp.b_proj, ff_out);
        lc.x_out = Mat(t_len, d);
        for (size_t i = 0; i < x.a.size(); ++i) lc.x_out.a[i] = lc.x_mid.a[i] + ff_out.a[i];
        x = lc.x_out;
    }

    nn::layernorm_forward(x, p.lnf_g, p.lnf_b, c.hidden, c.lnf_xhat, c.lnf_inv_sigma);

    if (want_lm_logits) {
        c.lm_logits = lm_head(p, c.hidden);
        c.has_lm_logits = true;
    }

    c.mc_pos = mc_read_position(row);
    const double* hm = c.hidden.row(c.mc_pos);
    double mc = p.mc_b[0];
    for (int i = 0; i < d; ++i) mc += p.mc_w[static_cast<size_t>(i)] * hm[i];
    c.mc_logit = mc;
    return c;
}

inline ForwardOutput forward(const ModelParams& p, const std::vector<int>& row,
                             bool want_attention = false) {
    RowCache c = forward_cached(p, row, /*want_lm_logits=*/true);
    ForwardOutput out;
    out.lm_logits = std::move(c.lm_logits);
    out.mc_logit = c.mc_logit;
    out.hidden = std::move(c.hidden);
    if (want_attention) {
        out.attentions.reserve(c.layers.size());
        for (auto& lc : c.layers) out.attentions.push_back(std::move(lc.att));
    }
    return out;
}

// One score per row of the example, in row order.
inline std::vector<double> mc_scores(const ModelParams& p, const MultipleChoiceExample& ex) {
    std::vector<double> scores;
    scores.reserve(ex.rows.size());
    for (const auto& row : ex.rows) {
        scores.push_back(forward_cached(p, row, /*want_lm_logits=*/false).mc_logit);
    }
    return scores;
}

// Backpropagates lm_scale * d(mean masked CE)/d(params) for the row's LM
// labels (skipped when lm_labels is empty) plus d_mc_logit through the choice
// head. Gradients accumulate into `grads`.
inline void backward_row(const ModelParams& p, const RowCache& c,
                         const std::vector<int>& lm_labels, double lm_scale, double d_mc_logit,
                         ModelParams& grads) {
    const ModelConfig& cfg = p.config;
    const int t_len = static_cast<int>(c.row.size());
    const int d = cfg.d_model;
    const int n_heads = cfg.n_heads;
    const int dh = cfg.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat d_hidden(t_len, d);

    if (!lm_labels.empty()) {
        if (!c.has_lm_logits) {
            throw std::logic_error("backward_row: cache lacks lm_logits");
        }
        if (static_cast<int>(lm_labels.size()) != t_len) {
            throw std::invalid_argument("backward_row: labels misaligned with row");
        }
        long n_targets = 0;
        for (const int l : lm_labels) {
            if (l != special::mask_label) ++n_targets;
        }
        if (n_targets == 0) throw DataError("no LM targets");
        const double inv_m = lm_scale / static_cast<double>(n_targets);
        const int v_size = cfg.vocab_size;
        std::vector<double> probs(static_cast<size_t>(v_size));
        for (int t = 0; t < t_len; ++t) {
            const int label = lm_labels[static_cast<size_t>(t)];
            if (label == special::mask_label) continue;
            const double* logits = c.lm_logits.row(t);
            double maxv = logits[0];
            for (int v = 1; v < v_size; ++v) maxv = std::max(maxv, logits[v]);
            double denom = 0.0;
            for (int v = 0; v < v_size; ++v) {
                probs[static_cast<size_t>(v)] = std::exp(logits[v] - maxv);
                denom += probs[static_cast<size_t>(v)];
            }
            // d logits = (softmax - onehot) * inv_m; tied head feeds both the
            // hidden state and the embedding table.
            const double* h = c.hidden.row(t);
            double* dh_row = d_hidden.row(t);
            for (int v = 0; v < v_size; ++v) {
                double g = probs[static_cast<size_t>(v)] / denom;
                if (v == label) g -= 1.0;
                g *= inv_m;
                if (g == 0.0) continue;
                const double* e = p.tok_emb.row(v);
                double* de = grads.tok_emb.row(v);
                for (int i = 0; i < d; ++i) {
                    dh_row[i] += g * e[i];
                    de[i] += g * h[i];
                }
            }
        }
    }

    if (d_mc_logit != 0.0) {
        const double* hm = c.hidden.row(c.mc_pos);
        double* dh_row = d_hidden.row(c.mc_pos);
        for (int i = 0; i < d; ++i) {
            dh_row[i] += d_mc_logit * p.mc_w[static_cast<size_t>(i)];
            grads.mc_w[static_cast<size_t>(i)] += d_mc_logit * hm[i];
        }
        grads.mc_b[0] += d_mc_logit;
    }

    Mat d_x(t_len, d);
    nn::layernorm_backward(c.lnf_xhat, c.lnf_inv_sigma, p.lnf_g, d_hidden, d_x, grads.lnf_g,
                           grads.lnf_b);

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const LayerCache& lc = c.layers[static_cast<size_t>(l)];
        const LayerParams& lp = p.layers[static_cast<size_t>(l)];
        LayerParams& gl = grads.layers[static_cast<size_t>(l)];

        // x_out = x_mid + w_proj(gelu(w_fc(ln2(x_mid))))
        Mat d_ff_act;
        linear_backward(lc.ff_act, lp.w_proj, d_x, d_ff_act, gl.w_proj, gl.b_proj);
        Mat d_ff_pre(d_ff_act.rows, d_ff_act.cols);
        for (size_t i = 0; i < d_ff_act.a.size(); ++i) {
            d_ff_pre.a[i] = d_ff_act.a[i] * nn::gelu_grad(lc.ff_pre.a[i]);
        }
        Mat d_ln2_out;
        linear_backward(lc.ln2_out, lp.w_fc, d_ff_pre, d_ln2_out, gl.w_fc, gl.b_fc);
        Mat d_x_mid = d_x; // residual path
        nn::layernorm_backward(lc.ln2_xhat, lc.ln2_inv_sigma, lp.ln2_g, d_ln2_out, d_x_mid,
                               gl.ln2_g, gl.ln2_b);

        // x_mid = x_in + wo(attention(ln1(x_in)))
        Mat d_att_mix;
        linear_backward(lc.att_mix, lp.wo, d_x_mid, d_att_mix, gl.wo, gl.bo);

        Mat d_q(t_len, d), d_k(t_len, d), d_v(t_len, d);
        std::vector<double> d_a(static_cast<size_t>(t_len));
        for (int h = 0; h < n_heads; ++h) {
            const Mat& att = lc.att[static_cast<size_t>(h)];
            const int hs = h * dh;
            for (int i = 0; i < t_len; ++i) {
                const double* dmix = d_att_mix.row(i) + hs;
                double dot = 0.0;
                for (int j = 0; j <= i; ++j) {
                    const double w = att(i, j);
                    if (w == 0.0) {
                        d_a[static_cast<size_t>(j)] = 0.0;
                        continue;
                    }
                    const double* vj = lc.v.row(j) + hs;
                    double* dvj = d_v.row(j) + hs;
                    double da = 0.0;
                    for (int e = 0; e < dh; ++e) {
                        dvj[e] += w * dmix[e];
                        da += dmix[e] * vj[e];
                    }
                    d_a[static_cast<size_t>(j)] = da;
                    dot += da * w;
                }
                const double* qi = lc.q.row(i) + hs;
                double* dqi = d_q.row(i) + hs;
                for (int j = 0; j <= i; ++j) {
                    const double w = att(i, j);
                    if (w == 0.0) continue;
                    const double ds = w * (d_a[static_cast<size_t>(j)] - dot) * scale;
                    if (ds == 0.0) continue;
                    const double* kj = lc.k.row(j) + hs;
                    double* dkj = d_k.row(j) + hs;
                    for (int e = 0; e < dh; ++e) {
                        dqi[e] += ds * kj[e];
                        dkj[e] += ds * qi[e];
                    }
                }
            }
        }

        Mat d_ln1_out(t_len, d);
        linear_backward(lc.ln1_out, lp.wq, d_q, d_ln1_out, gl.wq, gl.bq);
        linear_backward(lc.ln1_out, lp.wk, d_k, d_ln1_out, gl.wk, gl.bk);
        linear_backward(lc.ln1_out, lp.wv, d_v, d_ln1_out, gl.wv, gl.bv);

        Mat d_x_in = d_x_mid; // residual path
        nn::layernorm_backward(lc.ln1_xhat, lc.ln1_inv_sigma, lp.ln1_g, d_ln1_out, d_x_in,
                               gl.ln1_g, gl.ln1_b);
        d_x = std::move(d_x_in);
    }

    for (int t = 0; t < t_len; ++t) {
        const double* dx = d_x.row(t);
        double* de = grads.tok_emb.row(c.row[static_cast<size_t>(t)]);
        double* dp = grads.pos_emb.row(t);
        for (int i = 0; i < d; ++i) {
            de[i] += dx[i];
            dp[i] += dx[i];
        }
    }
}

struct AttentionExport {
    Mat matrix;                      // pad positions trimmed, square
    std::vector<std::string> labels; // decoded token per kept position
};

inline AttentionExport export_attention(const ModelParams& p, const std::vector<int>& row,
                                        int layer, int head, const Vocab& vocab) {
    if (layer < 0 || layer >= p.config.n_layers) {
        throw std::invalid_argument("export_attention: layer out of range");
    }
    if (head < 0 || head >= p.config.n_heads) {
        throw std::invalid_argument("export_attention: head out of range");
    }
    const ForwardOutput out = forward(p, row, /*want_attention=*/true);
    const Mat& full = out.attentions[static_cast<size_t>(layer)][static_cast<size_t>(head)];

    std::vector<int> keep;
    for (size_t i = 0; i < row.size(); ++i) {
        if (row[i] != special::pad) keep.push_back(static_cast<int>(i));
    }
    AttentionExport exp;
    exp.matrix = Mat(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
    for (size_t a = 0; a < keep.size(); ++a) {
        for (size_t b = 0; b < keep.size(); ++b) {
            exp.matrix(static_cast<int>(a), static_cast<int>(b)) = full(keep[a], keep[b]);
        }
        exp.labels.push_back(decode({row[static_cast<size_t>(keep[a])]}, vocab));
    }
    return exp;
}

} // namespace kwsum
