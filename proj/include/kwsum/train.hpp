#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kwsum/errors.hpp"
#include "kwsum/model.hpp"
#include "kwsum/rng.hpp"

namespace kwsum {

struct TrainConfig {
    double lr_init = 3e-5;
    int batch_size = 1;
    int grad_accum_steps = 5;
    int epochs = 5;
    double lm_weight = 2.0;
    double mc_weight = 1.0;
    std::uint64_t seed = 42;

    void validate() const {
        if (lr_init <= 0) throw std::invalid_argument("TrainConfig: lr_init must be positive");
        if (grad_accum_steps < 1) {
            throw std::invalid_argument("TrainConfig: grad_accum_steps must be >= 1");
        }
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (lm_weight < 0 || mc_weight < 0) {
            throw std::invalid_argument("TrainConfig: loss weights must be >= 0");
        }
    }
};

struct StepMetrics {
    long step = 0;
    double lm_loss = 0.0;
    double mc_loss = 0.0;
    double total_loss = 0.0;
    double perplexity = 0.0;
    double lr = 0.0;
};

// Mean next-token cross-entropy over positions whose label is not the mask
// id; masked positions contribute nothing.
inline double lm_loss(const Mat& lm_logits, const TokenSequence& lm_labels) {
    if (static_cast<size_t>(lm_logits.rows) != lm_labels.size()) {
        throw std::invalid_argument("lm_loss: logits and labels misaligned");
    }
    double total = 0.0;
    long n = 0;
    for (int t = 0; t < lm_logits.rows; ++t) {
        const int label = lm_labels[static_cast<size_t>(t)];
        if (label == special::mask_label) continue;
        if (label < 0 || label >= lm_logits.cols) {
            throw std::invalid_argument("lm_loss: label out of range");
        }
        const double* logits = lm_logits.row(t);
        double maxv = logits[0];
        for (int v = 1; v < lm_logits.cols; ++v) maxv = std::max(maxv, logits[v]);
        double denom = 0.0;
        for (int v = 0; v < lm_logits.cols; ++v) denom += std::exp(logits[v] - maxv);
        total += std::log(denom) + maxv - logits[label];
        ++n;
    }
    if (n == 0) throw DataError("no LM targets");
    return total / static_cast<double>(n);
}

// Softmax cross-entropy over the per-row choice scores.
inline double mc_loss(const std::vector<double>& scores, int mc_label) {
    if (mc_label < 0 || mc_label >= static_cast<int>(scores.size())) {
        throw std::invalid_argument("mc_loss: label out of range");
    }
    double maxv = scores[0];
    for (const double s : scores) maxv = std::max(maxv, s);
    double denom = 0.0;
    for (const double s : scores) denom += std::exp(s - maxv);
    return std::log(denom) + maxv - scores[static_cast<size_t>(mc_label)];
}

inline double total_loss(double lm, double mc, const TrainConfig& cfg) {
    return cfg.lm_weight * lm + cfg.mc_weight * mc;
}

// Per-epoch linear decay: lr_init at the epoch's first step down to
// lr_init/steps_per_epoch at its last, restarting every epoch. step is
// 0-based and global.
inline double lr_at(long step, long steps_per_epoch, const TrainConfig& cfg) {
    if (step < 0 || steps_per_epoch < 1) {
        throw std::invalid_argument("lr_at: bad step or steps_per_epoch");
    }
    const long within = step % steps_per_epoch;
    return cfg.lr_init *
           (1.0 - static_cast<double>(within) / static_cast<double>(steps_per_epoch));
}

namespace detail {

struct AdamState {
    ModelParams m;
    ModelParams v;
    long t = 0;
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;

    explicit AdamState(const ModelParams& params)
        : m(zeros_like(params)), v(zeros_like(params)) {}

    void update(ModelParams& params, ModelParams& grads, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        auto pr = tensor_refs(params);
        auto gr = tensor_refs(grads);
        auto mr = tensor_refs(m);
        auto vr = tensor_refs(v);
        for (size_t k = 0; k < pr.size(); ++k) {
            for (size_t i = 0; i < pr[k].size; ++i) {
                const double g = gr[k].data[i];
                mr[k].data[i] = beta1 * mr[k].data[i] + (1.0 - beta1) * g;
                vr[k].data[i] = beta2 * vr[k].data[i] + (1.0 - beta2) * g * g;
                const double mhat = mr[k].data[i] / bc1;
                const double vhat = vr[k].data[i] / bc2;
                pr[k].data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

} // namespace detail

// Forward/backward for one example. Gradients of
//   lm_weight * lm + mc_weight * mc
// accumulate into `grads` scaled by `grad_scale`; returns the two losses.
inline std::pair<double, double> example_losses_and_grads(const ModelParams& params,
                                                          const MultipleChoiceExample& ex,
                                                          const TrainConfig& cfg,
                                                          ModelParams* grads,
                                                          double grad_scale = 1.0) {
    const int n_rows = static_cast<int>(ex.rows.size());
    std::vector<RowCache> caches;
    caches.reserve(static_cast<size_t>(n_rows));
    std::vector<double> scores;
    scores.reserve(static_cast<size_t>(n_rows));
    for (int r = 0; r < n_rows; ++r) {
        // trailing pads carry no loss and are masked out of attention, so the
        // compute can stop at the last real token
        const TokenSequence& full = ex.rows[static_cast<size_t>(r)];
        size_t real = full.size();
        while (real > 1 && full[real - 1] == special::pad) --real;
        TokenSequence trimmed(full.begin(), full.begin() + static_cast<long>(real));
        caches.push_back(forward_cached(params, trimmed, /*want_lm_logits=*/r == ex.mc_label));
        scores.push_back(caches.back().mc_logit);
    }

    const RowCache& gold = caches[static_cast<size_t>(ex.mc_label)];
    TokenSequence labels(ex.lm_labels.begin(),
                         ex.lm_labels.begin() + static_cast<long>(gold.row.size()));
    const double lm = lm_loss(gold.lm_logits, labels);
    const double mc = mc_loss(scores, ex.mc_label);

    if (grads != nullptr) {
        double maxv = scores[0];
        for (const double s : scores) maxv = std::max(maxv, s);
        double denom = 0.0;
        for (const double s : scores) denom += std::exp(s - maxv);
        for (int r = 0; r < n_rows; ++r) {
            double d_mc = std::exp(scores[static_cast<size_t>(r)] - maxv) / denom;
            if (r == ex.mc_label) d_mc -= 1.0;
            d_mc *= cfg.mc_weight * grad_scale;
            const bool is_gold = r == ex.mc_label;
            backward_row(params, caches[static_cast<size_t>(r)],
                         is_gold ? labels : TokenSequence{},
                         cfg.lm_weight * grad_scale, d_mc, *grads);
        }
    }
    return {lm, mc};
}

using MetricsSink = std::function<void(const StepMetrics&)>;
using EpochSink = std::function<void(int epoch, const ModelParams&)>;

struct TrainResult {
    std::vector<StepMetrics> metrics;
    long updates = 0;
};

// Multi-loss loop: per-epoch shuffled order, gradients averaged over
// grad_accum_steps steps per update, per-epoch linear LR decay. start_epoch
// continues the step counter when resuming from a checkpoint.
inline TrainResult train(ModelParams& params, const std::vector<MultipleChoiceExample>& dataset,
                         const TrainConfig& cfg, const MetricsSink& sink = {},
                         const EpochSink& epoch_sink = {}, int start_epoch = 0) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");

    const long n = static_cast<long>(dataset.size());
    const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;

    // The decay schedule advances per optimizer update, so the effective
    // learning rate of an update does not depend on the accumulation count.
    const long updates_per_epoch =
        std::max<long>(1, (steps_per_epoch + cfg.grad_accum_steps - 1) / cfg.grad_accum_steps);

    TrainResult result;
    ModelParams grads = zeros_like(params);
    detail::AdamState adam(params);
    int accumulated = 0;
    long step = static_cast<long>(start_epoch) * steps_per_epoch; // 0-based
    result.updates = static_cast<long>(start_epoch) * updates_per_epoch;

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order(dataset.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        Rng shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        for (long b = 0; b < steps_per_epoch; ++b) {
            const long lo = b * cfg.batch_size;
            const long hi = std::min(n, lo + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(hi - lo);

            double lm_sum = 0.0, mc_sum = 0.0;
            for (long i = lo; i < hi; ++i) {
                const auto& ex = dataset[static_cast<size_t>(order[static_cast<size_t>(i)])];
                const auto [lm, mc] = example_losses_and_grads(params, ex, cfg, &grads, inv_batch);
                lm_sum += lm;
                mc_sum += mc;
            }
            const double lm = lm_sum * inv_batch;
            const double mc = mc_sum * inv_batch;
            const double total = total_loss(lm, mc, cfg);
            const double lr = lr_at(result.updates, updates_per_epoch, cfg);

            StepMetrics metrics{step + 1, lm, mc, total, std::exp(lm), lr};
            if (!std::isfinite(total)) {
                throw NumericError("non-finite loss at step " + std::to_string(metrics.step));
            }
            result.metrics.push_back(metrics);
            if (sink) sink(metrics);

            ++accumulated;
            ++step;
            if (accumulated == cfg.grad_accum_steps) {
                // mean of the accumulated gradients
                auto gr = tensor_refs(grads);
                const double inv = 1.0 / static_cast<double>(accumulated);
                for (auto& ref : gr) {
                    for (size_t i = 0; i < ref.size; ++i) ref.data[i] *= inv;
                }
                adam.update(params, grads, lr);
                ++result.updates;
                grads = zeros_like(params);
                accumulated = 0;
            }
        }
        if (epoch_sink) epoch_sink(epoch, params);
    }
    result.updates -= static_cast<long>(start_epoch) * updates_per_epoch;
    return result;
}

inline std::string metrics_csv_header() {
    return "step,lm_loss,mc_loss,total_loss,perplexity,lr";
}

} // namespace kwsum
