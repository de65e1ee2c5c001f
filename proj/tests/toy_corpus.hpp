#pragma once

// Synthetic keyword-summary corpus for overfit experiments: each example's
// summary embeds its own keywords, so the gold row is separable from
// distractors and the mapping keywords -> summary is memorizable.

#include <string>
#include <vector>

#include "kwsum/dataset.hpp"
#include "kwsum/model.hpp"
#include "kwsum/tokenizer.hpp"
#include "kwsum/train.hpp"

namespace toy {

struct ToySet {
    kwsum::Vocab vocab;
    std::vector<kwsum::MultipleChoiceExample> examples;
};

inline ToySet make_toy_set(int n_examples = 20, int max_len = 16) {
    const auto w = [](int i) { return "w" + std::to_string(i % 24); };

    std::vector<std::string> keyword_strs, summary_strs;
    std::string all_text;
    for (int i = 0; i < n_examples; ++i) {
        const std::string kw = w(i) + " " + w(i + 7);
        const std::string summary = w(i) + " " + w(i + 7) + " " + w(i + 13) + " " + w(20 + i % 4);
        keyword_strs.push_back(kw);
        summary_strs.push_back(summary);
        all_text += kw + " " + summary + " ";
    }
    ToySet set;
    set.vocab = kwsum::build_vocab({all_text}, 64);

    for (int i = 0; i < n_examples; ++i) {
        kwsum::KeywordSet ks;
        ks.words = kwsum::words(keyword_strs[static_cast<size_t>(i)]);
        const std::vector<std::string> distractors = {
            summary_strs[static_cast<size_t>((i + 1) % n_examples)],
            summary_strs[static_cast<size_t>((i + 5) % n_examples)],
            summary_strs[static_cast<size_t>((i + 11) % n_examples)]};
        set.examples.push_back(kwsum::build_example(ks, summary_strs[static_cast<size_t>(i)],
                                                    distractors, set.vocab, max_len,
                                                    static_cast<std::uint64_t>(i) + 101));
    }
    return set;
}

inline kwsum::ModelConfig overfit_config(const kwsum::Vocab& vocab, int max_len = 16) {
    kwsum::ModelConfig cfg;
    cfg.vocab_size = vocab.size();
    cfg.max_len = max_len;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_model = 32;
    cfg.seed = 7;
    return cfg;
}

inline kwsum::TrainConfig overfit_train_config(int epochs) {
    kwsum::TrainConfig cfg;
    cfg.lr_init = 3e-3;
    cfg.grad_accum_steps = 5;
    cfg.epochs = epochs;
    cfg.seed = 11;
    return cfg;
}

// Mean LM loss and MC accuracy of the current parameters over the set.
inline std::pair<double, double> evaluate(const kwsum::ModelParams& params, const ToySet& set) {
    double lm_sum = 0.0;
    int correct = 0;
    kwsum::TrainConfig cfg;
    for (const auto& ex : set.examples) {
        const auto [lm, mc] = kwsum::example_losses_and_grads(params, ex, cfg, nullptr);
        (void)mc;
        lm_sum += lm;
        const auto scores = kwsum::mc_scores(params, ex);
        int argmax = 0;
        for (size_t r = 1; r < scores.size(); ++r) {
            if (scores[r] > scores[static_cast<size_t>(argmax)]) argmax = static_cast<int>(r);
        }
        if (argmax == ex.mc_label) ++correct;
    }
    return {lm_sum / static_cast<double>(set.examples.size()),
            static_cast<double>(correct) / static_cast<double>(set.examples.size())};
}

} // namespace toy
