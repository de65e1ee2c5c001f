#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "kwsum/checkpoint.hpp"
#include "kwsum/model.hpp"

using namespace kwsum;

namespace {

Vocab test_vocab() {
    return build_vocab({"alpha beta gamma delta epsilon zeta eta theta iota kappa"}, 32);
}

ModelConfig small_config(const Vocab& v) {
    ModelConfig cfg;
    cfg.vocab_size = v.size();
    cfg.max_len = 16;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.d_model = 16;
    cfg.seed = 123;
    return cfg;
}

std::vector<int> random_row(Rng& rng, int len, int vocab_size) {
    std::vector<int> row(static_cast<size_t>(len));
    for (auto& id : row) id = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size)));
    return row;
}

} // namespace

TEST_CASE("init_params: deterministic per seed, layer-norm gains start at 1") {
    const Vocab v = test_vocab();
    const ModelConfig cfg = small_config(v);
    ModelParams a = init_params(cfg);
    ModelParams b = init_params(cfg);
    auto refs_a = tensor_refs(a);
    auto refs_b = tensor_refs(b);
    REQUIRE(refs_a.size() == refs_b.size());
    for (size_t i = 0; i < refs_a.size(); ++i) {
        REQUIRE(refs_a[i].size == refs_b[i].size);
        for (size_t j = 0; j < refs_a[i].size; ++j) {
            REQUIRE(refs_a[i].data[j] == refs_b[i].data[j]);
        }
    }
    for (const auto& lp : a.layers) {
        for (const double g : lp.ln1_g) CHECK(g == 1.0);
        for (const double g : lp.ln2_g) CHECK(g == 1.0);
        for (const double bias : lp.bq) CHECK(bias == 0.0);
    }
    for (const double g : a.lnf_g) CHECK(g == 1.0);

    ModelConfig cfg2 = cfg;
    cfg2.seed = 999;
    ModelParams c = init_params(cfg2);
    CHECK(c.tok_emb.a != a.tok_emb.a);
}

TEST_CASE("config validation") {
    ModelConfig cfg;
    cfg.vocab_size = 10;
    cfg.d_model = 10;
    cfg.n_heads = 3; // 10 % 3 != 0
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_heads = 2;
    cfg.max_len = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("forward: shape law and input validation") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    Rng rng(5);
    for (const int len : {1, 2, 7, 16}) {
        const auto row = random_row(rng, len, v.size());
        const ForwardOutput out = forward(p, row);
        CHECK(out.lm_logits.rows == len);
        CHECK(out.lm_logits.cols == v.size());
        CHECK(out.hidden.rows == len);
        CHECK(out.hidden.cols == p.config.d_model);
    }
    CHECK_THROWS_AS(forward(p, std::vector<int>(17, 6)), std::invalid_argument);
    CHECK_THROWS_AS(forward(p, {v.size()}), std::invalid_argument);
    CHECK_THROWS_AS(forward(p, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("forward: causality is exact") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int len = 2 + static_cast<int>(rng.below(15));
        auto row = random_row(rng, len, v.size());
        const ForwardOutput base = forward(p, row);

        const int j = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(len - 1)));
        auto perturbed = row;
        perturbed[static_cast<size_t>(j)] =
            (perturbed[static_cast<size_t>(j)] + 1) % v.size();
        const ForwardOutput out = forward(p, perturbed);
        for (int i = 0; i < j; ++i) {
            for (int t = 0; t < v.size(); ++t) {
                REQUIRE(out.lm_logits(i, t) == base.lm_logits(i, t));
            }
        }
    }
}

TEST_CASE("forward: zeroing a suffix never changes prefix logits") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const int len = 3 + static_cast<int>(rng.below(14));
        auto row = random_row(rng, len, v.size());
        const ForwardOutput base = forward(p, row);
        const int cut = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(len - 1)));
        auto shorter = row;
        shorter.resize(static_cast<size_t>(cut));
        const ForwardOutput out = forward(p, shorter);
        for (int i = 0; i < cut; ++i) {
            for (int t = 0; t < v.size(); ++t) {
                REQUIRE(out.lm_logits(i, t) == base.lm_logits(i, t));
            }
        }
    }
}

TEST_CASE("attention rows are causal and sum to 1") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const std::vector<int> row = {special::bos, 6, 7, 8, special::sum, 9, special::eos};
    const ForwardOutput out = forward(p, row, /*want_attention=*/true);
    REQUIRE(out.attentions.size() == 2);
    REQUIRE(out.attentions[0].size() == 2);
    const int t_len = static_cast<int>(row.size());
    for (const auto& heads : out.attentions) {
        for (const auto& att : heads) {
            for (int i = 0; i < t_len; ++i) {
                double sum = 0.0;
                for (int j = 0; j < t_len; ++j) {
                    if (j > i) REQUIRE(att(i, j) == 0.0);
                    sum += att(i, j);
                }
                REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-5));
            }
        }
    }
}

TEST_CASE("one-token row attends only to itself") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const ForwardOutput out = forward(p, {special::bos}, /*want_attention=*/true);
    for (const auto& heads : out.attentions) {
        for (const auto& att : heads) {
            REQUIRE(att.rows == 1);
            REQUIRE(att(0, 0) == 1.0);
        }
    }
}

TEST_CASE("pad keys are masked out of attention") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const std::vector<int> row = {special::bos, 6, special::eos, special::pad, special::pad};
    const ForwardOutput out = forward(p, row, /*want_attention=*/true);
    for (const auto& heads : out.attentions) {
        for (const auto& att : heads) {
            for (int i = 0; i < 5; ++i) {
                CHECK(att(i, 3) == 0.0);
                CHECK(att(i, 4) == 0.0);
            }
        }
    }
}

TEST_CASE("mc position: EOS when present, last non-pad otherwise") {
    CHECK(mc_read_position({special::bos, 6, special::eos, special::pad}) == 2);
    CHECK(mc_read_position({special::bos, 6, 7}) == 2);
    CHECK(mc_read_position({special::bos, 6, 7, special::pad, special::pad}) == 2);

    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    // appending pads must not change the choice logit: same read position,
    // pad keys masked out of every attention row
    const std::vector<int> with_eos = {special::bos, 6, 7, special::eos};
    std::vector<int> padded = with_eos;
    padded.push_back(special::pad);
    padded.push_back(special::pad);
    CHECK(forward(p, with_eos).mc_logit == forward(p, padded).mc_logit);
}

TEST_CASE("mc_scores: per-row function of content") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const std::vector<int> row_a = {special::bos, 6, special::sum, 7, special::eos};
    const std::vector<int> row_b = {special::bos, 6, special::sum, 8, special::eos};
    const std::vector<int> row_c = {special::bos, 6, special::sum, 9, special::eos};
    const std::vector<int> row_d = {special::bos, 6, special::sum, 10, special::eos};

    MultipleChoiceExample same;
    same.rows = {row_a, row_a, row_a, row_a};
    same.mc_label = 0;
    const auto s = mc_scores(p, same);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == s[1]);
    CHECK(s[1] == s[2]);
    CHECK(s[2] == s[3]);

    MultipleChoiceExample ex;
    ex.rows = {row_a, row_b, row_c, row_d};
    const auto base = mc_scores(p, ex);
    MultipleChoiceExample permuted;
    permuted.rows = {row_c, row_a, row_d, row_b};
    const auto perm = mc_scores(p, permuted);
    CHECK(perm[0] == base[2]);
    CHECK(perm[1] == base[0]);
    CHECK(perm[2] == base[3]);
    CHECK(perm[3] == base[1]);
}

TEST_CASE("lm head is tied to the token embedding") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const int d = p.config.d_model;
    Mat onehot(d, d);
    for (int i = 0; i < d; ++i) onehot(i, i) = 1.0;
    const Mat logits = lm_head(p, onehot);
    for (int j = 0; j < d; ++j) {
        for (int t = 0; t < v.size(); ++t) {
            REQUIRE(logits(j, t) == p.tok_emb(t, j));
        }
    }
}

TEST_CASE("export_attention: trimmed, labeled, lower-triangular") {
    const Vocab v = test_vocab();
    const ModelParams p = init_params(small_config(v));
    const std::vector<int> row = {special::bos, 6, special::sum, special::pad, special::pad,
                                  special::pad, special::pad, special::pad};
    const AttentionExport exp = export_attention(p, row, 0, 1, v);
    REQUIRE(exp.matrix.rows == 3);
    REQUIRE(exp.matrix.cols == 3);
    REQUIRE(exp.labels.size() == 3);
    CHECK(exp.labels[0] == "<BOS>");
    CHECK(exp.labels[2] == "<S>");
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) CHECK(exp.matrix(i, j) == 0.0);
    }
    CHECK_THROWS_AS(export_attention(p, row, 2, 0, v), std::invalid_argument);
    CHECK_THROWS_AS(export_attention(p, row, 0, 2, v), std::invalid_argument);
}

TEST_CASE("checkpoint: save/load round trip is byte-stable") {
    const Vocab v = test_vocab();
    ModelConfig cfg = small_config(v);
    cfg.seed = 77;
    const ModelParams p = init_params(cfg);

    namespace fs = std::filesystem;
    const auto path1 = fs::temp_directory_path() / "kwsum_ckpt_a.bin";
    const auto path2 = fs::temp_directory_path() / "kwsum_ckpt_b.bin";
    save_checkpoint(p, path1.string());
    const ModelParams loaded = load_checkpoint(path1.string());
    CHECK(loaded.config.vocab_size == cfg.vocab_size);
    CHECK(loaded.config.seed == cfg.seed);
    save_checkpoint(loaded, path2.string());

    std::ifstream f1(path1, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK(!b1.empty());
    CHECK(b1.substr(0, 6) == "KWSUM1");

    // loaded params still run
    const ForwardOutput out = forward(loaded, {special::bos, 6, special::eos});
    CHECK(out.lm_logits.rows == 3);

    fs::remove(path1);
    fs::remove(path2);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin"), DataError);
}
