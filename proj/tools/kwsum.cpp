#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kwsum/pipeline.hpp"

namespace {

using namespace kwsum;

std::vector<std::string> split_keywords(const std::string& raw) {
    return words(raw); // same normalization as the tokenizer
}

int run(int argc, char** argv) {
    CLI::App app{"keyword-conditioned abstractive summarization pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "pipeline config file (key = value sections)");
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "global seed override");
    int jobs_flag = 1;
    auto* jobs_opt = app.add_option("--jobs", jobs_flag, "document-level parallelism");
    std::string out_dir_flag;
    auto* out_dir_opt = app.add_option("--out-dir", out_dir_flag, "artifact directory override");

    // prepare
    auto* prepare = app.add_subcommand("prepare", "build vocab + training examples from a corpus");
    std::string corpus_flag;
    auto* corpus_opt = prepare->add_option("--corpus", corpus_flag, "corpus JSONL");
    int max_vocab_flag = 0;
    auto* max_vocab_opt = prepare->add_option("--max-vocab", max_vocab_flag, "vocabulary cap");
    std::string classes_flag;
    auto* classes_opt =
        prepare->add_option("--classes", classes_flag, "nouns|verbs|nouns_and_verbs");
    double source_ratio_flag = 1.0;
    auto* source_ratio_opt = prepare->add_option("--source-ratio", source_ratio_flag,
                                                 "sentence fraction keywords are tagged on");
    int max_len_flag = 0;
    auto* max_len_opt = prepare->add_option("--max-len", max_len_flag, "row length");

    // train
    auto* train_cmd = app.add_subcommand("train", "run the multi-loss fine-tuning loop");
    int epochs_flag = 0;
    auto* epochs_opt = train_cmd->add_option("--epochs", epochs_flag, "epoch count");
    double lr_flag = 0;
    auto* lr_opt = train_cmd->add_option("--lr", lr_flag, "initial learning rate");
    int accum_flag = 0;
    auto* accum_opt = train_cmd->add_option("--accum", accum_flag, "gradient accumulation steps");
    std::string resume_flag;
    train_cmd->add_option("--resume", resume_flag, "checkpoint to continue from");
    int resume_epoch_flag = 0;
    train_cmd->add_option("--resume-epoch", resume_epoch_flag,
                          "epochs already completed by --resume");

    // generate
    auto* gen = app.add_subcommand("generate", "decode summaries from keywords or documents");
    std::string gen_keywords;
    gen->add_option("--keywords", gen_keywords, "keyword list (spaces or commas)");
    std::string gen_input;
    gen->add_option("--input", gen_input, "corpus JSONL; keywords are extracted per document");
    std::string gen_out = "summaries.jsonl";
    gen->add_option("--out", gen_out, "output JSONL");
    double temp_flag = 0;
    auto* temp_opt = gen->add_option("--temperature", temp_flag, "softmax temperature");
    double top_p_flag = 0;
    auto* top_p_opt = gen->add_option("--top-p", top_p_flag, "nucleus mass");
    int top_k_flag = 0;
    auto* top_k_opt = gen->add_option("--top-k", top_k_flag, "candidate cap");
    bool greedy_flag = false;
    auto* greedy_opt = gen->add_flag("--greedy", greedy_flag, "argmax decoding (top 1)");
    int max_new_flag = 0;
    auto* max_new_opt = gen->add_option("--max-new-tokens", max_new_flag, "generation budget");

    // extract
    auto* extract = app.add_subcommand("extract", "extractive baseline summaries");
    std::string ext_input;
    extract->add_option("--input", ext_input, "corpus JSONL");
    std::string ext_field = "body";
    extract->add_option("--field", ext_field, "body|abstract");
    double ratio_flag = 0;
    auto* ratio_opt = extract->add_option("--ratio", ratio_flag, "compression ratio (0.4|0.6|...)");
    std::string mode_flag;
    auto* mode_opt = extract->add_option("--mode", mode_flag, "pam|kmeans");
    std::string ext_out = "extracted.jsonl";
    extract->add_option("--out", ext_out, "output JSONL");
    std::string ext_emb, ext_sentences;
    extract->add_option("--embeddings", ext_emb, "precomputed EMB1 file (single document)");
    extract->add_option("--sentences", ext_sentences, "sentence sidecar for --embeddings");

    // rouge
    auto* rouge_cmd = app.add_subcommand("rouge", "score candidates against references");
    std::string cand_path, ref_path, variant_list = "1,2,l", rouge_out = "scores.csv";
    rouge_cmd->add_option("--candidates", cand_path, "candidate JSONL")->required();
    rouge_cmd->add_option("--references", ref_path, "reference JSONL")->required();
    rouge_cmd->add_option("--variant", variant_list, "comma list of 1,2,l,w");
    rouge_cmd->add_option("--out", rouge_out, "scores CSV");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "extractive/abstractive comparison grid");
    std::string ref_field = "abstract";
    experiment->add_option("--reference-field", ref_field, "abstract|body");
    std::string exp_out = "experiment.csv";
    experiment->add_option("--out", exp_out, "grid CSV");

    // attn
    auto* attn = app.add_subcommand("attn", "export one attention head as a labeled heatmap");
    std::string attn_keywords, attn_summary;
    attn->add_option("--keywords", attn_keywords, "keyword list")->required();
    attn->add_option("--summary", attn_summary, "optional summary continuation");
    int layer = 0, head = 0;
    attn->add_option("--layer", layer, "decoder layer index")->required();
    attn->add_option("--head", head, "attention head index")->required();
    std::string attn_out = "attention.csv";
    attn->add_option("--out", attn_out, "heatmap CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors exit 2
    }

    PipelineConfig cfg;
    if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed_flag;
    if (jobs_opt->count() > 0) cfg.jobs = jobs_flag;
    if (out_dir_opt->count() > 0) cfg.out_dir = out_dir_flag;
    if (corpus_opt->count() > 0) cfg.corpus = corpus_flag;
    if (max_vocab_opt->count() > 0) cfg.max_vocab = max_vocab_flag;
    if (classes_opt->count() > 0) cfg.classes = keyword_classes_from_string(classes_flag);
    if (source_ratio_opt->count() > 0) cfg.source_ratio = source_ratio_flag;
    if (max_len_opt->count() > 0) cfg.model.max_len = max_len_flag;
    if (epochs_opt->count() > 0) cfg.train.epochs = epochs_flag;
    if (lr_opt->count() > 0) cfg.train.lr_init = lr_flag;
    if (accum_opt->count() > 0) cfg.train.grad_accum_steps = accum_flag;
    if (temp_opt->count() > 0) cfg.decode.temperature = temp_flag;
    if (top_p_opt->count() > 0) cfg.decode.top_p = top_p_flag;
    if (top_k_opt->count() > 0) cfg.decode.top_k = top_k_flag;
    if (greedy_opt->count() > 0) cfg.decode.greedy = greedy_flag;
    if (max_new_opt->count() > 0) cfg.decode.max_new_tokens = max_new_flag;
    if (ratio_opt->count() > 0) cfg.extract_ratio = ratio_flag;
    if (mode_opt->count() > 0) cfg.extract_mode = cluster_mode_from_string(mode_flag);

    if (prepare->parsed()) {
        const PrepareStats stats = cmd_prepare(cfg);
        std::cout << "documents in: " << stats.documents_in << "\n"
                  << "examples out: " << stats.examples_out << "\n"
                  << "skipped: " << stats.skipped << "\n";
    } else if (train_cmd->parsed()) {
        const TrainResult result = cmd_train(cfg, resume_flag, resume_epoch_flag);
        std::cout << "steps: " << result.metrics.size() << "\n"
                  << "updates: " << result.updates << "\n";
        if (!result.metrics.empty()) {
            std::cout << "final total_loss: " << fmt_double(result.metrics.back().total_loss)
                      << "\n";
        }
    } else if (gen->parsed()) {
        std::vector<GenerateInput> inputs;
        if (!gen_input.empty()) {
            inputs = generate_inputs_from_corpus(cfg, gen_input);
        } else {
            KeywordSet kw;
            kw.words = split_keywords(gen_keywords);
            kw.classes = cfg.classes;
            kw.source_ratio = cfg.source_ratio;
            inputs.push_back(GenerateInput{"keywords", std::move(kw)});
        }
        cmd_generate(cfg, inputs, gen_out);
        std::cout << "summaries: " << inputs.size() << " -> " << gen_out << "\n";
    } else if (extract->parsed()) {
        if (!ext_emb.empty()) {
            if (ext_sentences.empty()) {
                throw std::invalid_argument("extract: --embeddings requires --sentences");
            }
            cmd_extract_precomputed(cfg, ext_emb, ext_sentences, ext_out);
            std::cout << "extracted: 1 -> " << ext_out << "\n";
        } else {
            if (ext_input.empty() && !cfg.corpus.empty()) ext_input = cfg.corpus;
            if (ext_input.empty()) throw std::invalid_argument("extract: --input required");
            cmd_extract(cfg, ext_input, ext_field, ext_out);
            std::cout << "extracted -> " << ext_out << "\n";
        }
    } else if (rouge_cmd->parsed()) {
        std::vector<RougeVariant> variants;
        std::stringstream ss(variant_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) variants.push_back(RougeVariant::parse(tok));
        }
        if (variants.empty()) throw std::invalid_argument("rouge: no variants given");
        const auto scores = cmd_rouge(cand_path, ref_path, variants, rouge_out);
        for (const auto& s : scores) {
            std::cout << "rouge-" << s.variant << " f: " << fmt_double(s.f) << "\n";
        }
    } else if (experiment->parsed()) {
        cmd_experiment(cfg, ref_field, exp_out);
        std::cout << "experiment grid -> " << exp_out << "\n";
    } else if (attn->parsed()) {
        cmd_attn(cfg, split_keywords(attn_keywords), attn_summary, layer, head, attn_out);
        std::cout << "attention heatmap -> " << attn_out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const kwsum::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const kwsum::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
