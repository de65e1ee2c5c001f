#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kwsum/checkpoint.hpp"
#include "kwsum/dataset.hpp"
#include "kwsum/decode.hpp"
#include "kwsum/extractive.hpp"
#include "kwsum/model.hpp"
#include "kwsum/parallel.hpp"
#include "kwsum/rouge.hpp"
#include "kwsum/train.hpp"

namespace kwsum {

// Shortest round-trip decimal form, used for all CSV numbers.
inline std::string fmt_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// One versioned key = value file with [sections]; flags override per key.
struct PipelineConfig {
    // paths
    std::string corpus;
    std::string out_dir = "out";
    std::string vocab_path;      // default: <out_dir>/vocab.txt
    std::string dataset_path;    // default: <out_dir>/dataset.jsonl
    std::string checkpoint_path; // default: <out_dir>/model.kwsum
    std::string metrics_path;    // default: <out_dir>/metrics.csv

    // data preparation
    int max_vocab = 512;
    KeywordClasses classes = KeywordClasses::NounsAndVerbs;
    double source_ratio = 1.0; // sentence fraction keywords are tagged on
    int embed_dim = 768;

    ModelConfig model;
    TrainConfig train;
    DecodeParams decode;

    double extract_ratio = 0.4;
    ClusterMode extract_mode = ClusterMode::Pam;

    std::uint64_t seed = 42;
    int jobs = 1;

    std::string vocab_file() const {
        return vocab_path.empty() ? out_dir + "/vocab.txt" : vocab_path;
    }
    std::string dataset_file() const {
        return dataset_path.empty() ? out_dir + "/dataset.jsonl" : dataset_path;
    }
    std::string checkpoint_file() const {
        return checkpoint_path.empty() ? out_dir + "/model.kwsum" : checkpoint_path;
    }
    std::string metrics_file() const {
        return metrics_path.empty() ? out_dir + "/metrics.csv" : metrics_path;
    }

    void set(const std::string& section, const std::string& key, const std::string& value);
    static PipelineConfig load(const std::string& path);
};

namespace detail {

inline long to_long(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
}

inline double to_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    }
}

inline bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

} // namespace detail

inline void PipelineConfig::set(const std::string& section, const std::string& key,
                                const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;
    if (full == "seed") {
        seed = static_cast<std::uint64_t>(detail::to_long(value, full));
    } else if (full == "jobs") {
        jobs = static_cast<int>(detail::to_long(value, full));
    } else if (full == "paths.corpus") {
        corpus = value;
    } else if (full == "paths.out_dir") {
        out_dir = value;
    } else if (full == "paths.vocab") {
        vocab_path = value;
    } else if (full == "paths.dataset") {
        dataset_path = value;
    } else if (full == "paths.checkpoint") {
        checkpoint_path = value;
    } else if (full == "paths.metrics") {
        metrics_path = value;
    } else if (full == "data.max_vocab") {
        max_vocab = static_cast<int>(detail::to_long(value, full));
    } else if (full == "data.keyword_classes") {
        classes = keyword_classes_from_string(value);
    } else if (full == "data.source_ratio") {
        source_ratio = detail::to_double(value, full);
    } else if (full == "data.embed_dim") {
        embed_dim = static_cast<int>(detail::to_long(value, full));
    } else if (full == "model.max_len") {
        model.max_len = static_cast<int>(detail::to_long(value, full));
    } else if (full == "model.n_layers") {
        model.n_layers = static_cast<int>(detail::to_long(value, full));
    } else if (full == "model.n_heads") {
        model.n_heads = static_cast<int>(detail::to_long(value, full));
    } else if (full == "model.d_model") {
        model.d_model = static_cast<int>(detail::to_long(value, full));
    } else if (full == "model.d_ff") {
        model.d_ff = static_cast<int>(detail::to_long(value, full));
    } else if (full == "train.lr_init") {
        train.lr_init = detail::to_double(value, full);
    } else if (full == "train.batch_size") {
        train.batch_size = static_cast<int>(detail::to_long(value, full));
    } else if (full == "train.grad_accum_steps") {
        train.grad_accum_steps = static_cast<int>(detail::to_long(value, full));
    } else if (full == "train.epochs") {
        train.epochs = static_cast<int>(detail::to_long(value, full));
    } else if (full == "train.lm_weight") {
        train.lm_weight = detail::to_double(value, full);
    } else if (full == "train.mc_weight") {
        train.mc_weight = detail::to_double(value, full);
    } else if (full == "decode.temperature") {
        decode.temperature = detail::to_double(value, full);
    } else if (full == "decode.top_p") {
        decode.top_p = detail::to_double(value, full);
    } else if (full == "decode.top_k") {
        decode.top_k = static_cast<int>(detail::to_long(value, full));
    } else if (full == "decode.greedy") {
        decode.greedy = detail::to_bool(value, full);
    } else if (full == "decode.max_new_tokens") {
        decode.max_new_tokens = static_cast<int>(detail::to_long(value, full));
    } else if (full == "extract.ratio") {
        extract_ratio = detail::to_double(value, full);
    } else if (full == "extract.mode") {
        extract_mode = cluster_mode_from_string(value);
    } else {
        throw std::invalid_argument("config: unknown key '" + full + "'");
    }
}

inline PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line, section;
    bool version_seen = false;
    long line_no = 0;
    const auto trim = [](std::string s) {
        size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    };
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty() && key == "version") {
            if (value != "1") throw DataError(path + ": unsupported config version " + value);
            version_seen = true;
            continue;
        }
        try {
            cfg.set(section, key, value);
        } catch (const std::invalid_argument& e) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!version_seen) throw DataError(path + ": missing 'version = 1'");
    return cfg;
}

// ---------------------------------------------------------------------------
// subcommands

struct PrepareStats {
    long documents_in = 0;
    long examples_out = 0;
    long skipped = 0;
};

// Corpus -> vocabulary file + example dataset. Keywords are tagged on the
// configured sentence fraction of each body; distractors and the gold row
// position derive from per-document seeds.
inline PrepareStats cmd_prepare(const PipelineConfig& cfg) {
    if (!std::filesystem::exists(cfg.corpus)) {
        throw DataError("corpus file does not exist: " + cfg.corpus);
    }
    std::filesystem::create_directories(cfg.out_dir);

    const IngestResult ingest = ingest_corpus(cfg.corpus);
    const auto& pairs = ingest.pairs;

    std::vector<std::string> vocab_docs;
    vocab_docs.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        vocab_docs.push_back(p.body);
        vocab_docs.push_back(p.gold_summary);
    }
    const Vocab vocab = build_vocab(vocab_docs, cfg.max_vocab);
    save_vocab(vocab, cfg.vocab_file());

    if (static_cast<int>(pairs.size()) < 4) throw DataError("corpus too small for distractors");

    const LexiconTagger tagger = default_tagger();
    const HashingEncoder encoder{cfg.embed_dim};
    std::vector<PreparedExample> examples(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](size_t i) {
        const DocumentPair& doc = pairs[i];
        const std::uint64_t doc_seed = mix_seed(cfg.seed, fnv1a(doc.id));

        std::string keyword_source = doc.body;
        if (cfg.source_ratio < 1.0) {
            keyword_source =
                extract_summary(doc.body, cfg.source_ratio, encoder, mix_seed(doc_seed, 1))
                    .summary;
        }
        KeywordSet keywords = extract_keywords(keyword_source, cfg.classes, tagger);
        keywords.source_ratio = cfg.source_ratio;

        const auto distractors =
            sample_distractors(pairs, static_cast<int>(i), 3, mix_seed(doc_seed, 2));
        examples[i] = PreparedExample{
            doc.id, keywords,
            build_example(keywords, doc.gold_summary, distractors, vocab, cfg.model.max_len,
                          mix_seed(doc_seed, 3))};
    });

    save_examples(examples, cfg.dataset_file());
    return PrepareStats{static_cast<long>(pairs.size()) + ingest.skipped,
                        static_cast<long>(examples.size()), ingest.skipped};
}

// Dataset + vocab -> per-epoch checkpoints, final checkpoint, metrics CSV.
inline TrainResult cmd_train(const PipelineConfig& cfg, const std::string& resume_path = "",
                             int resume_epoch = 0) {
    const Vocab vocab = load_vocab(cfg.vocab_file());
    const auto prepared = load_examples(cfg.dataset_file());
    std::vector<MultipleChoiceExample> examples;
    examples.reserve(prepared.size());
    for (const auto& pe : prepared) examples.push_back(pe.example);

    ModelConfig mcfg = cfg.model;
    mcfg.vocab_size = vocab.size();
    mcfg.seed = cfg.seed;
    TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.seed;

    ModelParams params = resume_path.empty() ? init_params(mcfg) : load_checkpoint(resume_path);
    if (!resume_path.empty() && params.config.vocab_size != vocab.size()) {
        throw DataError("checkpoint vocabulary size does not match the vocab file");
    }

    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream csv(cfg.metrics_file(), std::ios::binary);
    if (!csv) throw DataError("cannot write metrics file: " + cfg.metrics_file());
    csv << metrics_csv_header() << '\n';
    const MetricsSink sink = [&](const StepMetrics& m) {
        csv << m.step << ',' << fmt_double(m.lm_loss) << ',' << fmt_double(m.mc_loss) << ','
            << fmt_double(m.total_loss) << ',' << fmt_double(m.perplexity) << ','
            << fmt_double(m.lr) << '\n';
    };
    const EpochSink epoch_sink = [&](int epoch, const ModelParams& p) {
        save_checkpoint(p, cfg.out_dir + "/model.epoch" + std::to_string(epoch + 1) + ".kwsum");
    };

    TrainResult result = train(params, examples, tcfg, sink, epoch_sink, resume_epoch);
    save_checkpoint(params, cfg.checkpoint_file());
    return result;
}

struct GenerateInput {
    std::string id;
    KeywordSet keywords;
};

// Keyword prompts -> summaries JSONL. Keyword lists longer than the prompt
// budget are cut from the right, like the dataset rows.
inline void cmd_generate(const PipelineConfig& cfg, const std::vector<GenerateInput>& inputs,
                         const std::string& out_path) {
    const Vocab vocab = load_vocab(cfg.vocab_file());
    const ModelParams params = load_checkpoint(cfg.checkpoint_file());

    std::vector<std::string> lines(inputs.size());
    parallel_for(inputs.size(), cfg.jobs, [&](size_t i) {
        GenerateInput input = inputs[i];
        const auto budget = static_cast<size_t>(params.config.max_len - 3);
        if (input.keywords.words.size() > budget) input.keywords.words.resize(budget);

        DecodeParams dp = cfg.decode;
        dp.seed = mix_seed(cfg.seed, fnv1a(input.id));
        const std::string summary = generate(params, input.keywords, dp, vocab);

        nlohmann::json rec;
        rec["id"] = input.id;
        rec["keywords"] = input.keywords.words;
        rec["summary"] = summary;
        rec["params"] = {{"t", dp.temperature}, {"p", dp.top_p},     {"k", dp.top_k},
                         {"greedy", dp.greedy}, {"seed", dp.seed}};
        if (input.keywords.words.empty()) rec["empty_prompt"] = true;
        lines[i] = rec.dump();
    });

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write summaries file: " + out_path);
    for (const auto& line : lines) out << line << '\n';
}

// Documents from a corpus file become generate inputs via keyword extraction.
inline std::vector<GenerateInput> generate_inputs_from_corpus(const PipelineConfig& cfg,
                                                              const std::string& corpus_path) {
    const IngestResult ingest = ingest_corpus(corpus_path);
    const LexiconTagger tagger = default_tagger();
    const HashingEncoder encoder{cfg.embed_dim};
    std::vector<GenerateInput> inputs(ingest.pairs.size());
    parallel_for(ingest.pairs.size(), cfg.jobs, [&](size_t i) {
        const DocumentPair& doc = ingest.pairs[i];
        std::string source = doc.body;
        if (cfg.source_ratio < 1.0) {
            source = extract_summary(doc.body, cfg.source_ratio, encoder,
                                     mix_seed(mix_seed(cfg.seed, fnv1a(doc.id)), 1))
                         .summary;
        }
        KeywordSet kw = extract_keywords(source, cfg.classes, tagger);
        kw.source_ratio = cfg.source_ratio;
        inputs[i] = GenerateInput{doc.id, std::move(kw)};
    });
    return inputs;
}

// Extractive summaries for every document of a corpus file.
inline void cmd_extract(const PipelineConfig& cfg, const std::string& corpus_path,
                        const std::string& field, const std::string& out_path) {
    if (field != "body" && field != "abstract") {
        throw std::invalid_argument("extract: field must be 'body' or 'abstract'");
    }
    const IngestResult ingest = ingest_corpus(corpus_path);
    const HashingEncoder encoder{cfg.embed_dim};
    std::vector<std::string> lines(ingest.pairs.size());
    parallel_for(ingest.pairs.size(), cfg.jobs, [&](size_t i) {
        const DocumentPair& doc = ingest.pairs[i];
        const std::string& text = field == "body" ? doc.body : doc.gold_summary;
        const auto ex = extract_summary(text, cfg.extract_ratio, encoder,
                                        mix_seed(cfg.seed, fnv1a(doc.id)), cfg.extract_mode);
        nlohmann::json rec;
        rec["id"] = doc.id;
        rec["selected_indices"] = ex.result.selected_indices;
        rec["summary"] = ex.summary;
        rec["ratio"] = ex.result.ratio;
        rec["mode"] = to_string(cfg.extract_mode);
        lines[i] = rec.dump();
    });
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write extraction file: " + out_path);
    for (const auto& line : lines) out << line << '\n';
}

// Single precomputed-embedding document (EMB1 file + sentence sidecar).
inline void cmd_extract_precomputed(const PipelineConfig& cfg, const std::string& emb_path,
                                    const std::string& sentences_path,
                                    const std::string& out_path) {
    const SentenceEmbeddings emb = load_embeddings(emb_path, sentences_path);
    if (emb.vectors.rows == 0) throw DataError("empty embedding file: " + emb_path);
    const int n = emb.vectors.rows;
    int k = static_cast<int>(std::floor(cfg.extract_ratio * n + 0.5));
    k = std::max(1, std::min(k, n));
    KMedoidResult best;
    if (cfg.extract_mode == ClusterMode::KMeans) {
        best = kmeans_select(emb.vectors, k, cfg.seed);
    } else {
        bool have = false;
        for (int restart = 0; restart < k_medoid_restarts; ++restart) {
            KMedoidResult r = k_medoid(emb.vectors, k,
                                       mix_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
            if (!have || r.cost < best.cost) {
                best = std::move(r);
                have = true;
            }
        }
    }
    std::sort(best.medoids.begin(), best.medoids.end());
    std::string summary;
    for (const int idx : best.medoids) {
        if (!summary.empty()) summary.push_back(' ');
        summary += emb.sentences[static_cast<size_t>(idx)];
    }
    nlohmann::json rec;
    rec["id"] = std::filesystem::path(emb_path).stem().string();
    rec["selected_indices"] = best.medoids;
    rec["summary"] = summary;
    rec["ratio"] = cfg.extract_ratio;
    rec["mode"] = to_string(cfg.extract_mode);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write extraction file: " + out_path);
    out << rec.dump() << '\n';
}

// id -> text read from a JSONL file; the first present field of `fields` wins.
inline std::vector<std::pair<std::string, std::string>> read_text_records(
    const std::string& path, const std::vector<std::string>& fields) {
    std::vector<std::pair<std::string, std::string>> records;
    for_each_jsonl(path, [&](long line_no, const nlohmann::json& obj) {
        if (!obj.contains("id") || !obj["id"].is_string()) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": missing 'id'");
        }
        for (const auto& f : fields) {
            if (obj.contains(f) && obj[f].is_string()) {
                records.emplace_back(obj["id"].get<std::string>(), obj[f].get<std::string>());
                return;
            }
        }
        throw DataError(path + ": line " + std::to_string(line_no) + ": no text field found");
    });
    return records;
}

// Candidate/reference JSONL pair -> mean scores CSV.
inline std::vector<RougeScore> cmd_rouge(const std::string& candidates_path,
                                         const std::string& references_path,
                                         const std::vector<RougeVariant>& variants,
                                         const std::string& out_csv) {
    const auto candidates = read_text_records(candidates_path, {"summary", "text"});
    const auto references = read_text_records(references_path, {"abstract", "text", "summary"});
    std::map<std::string, std::string> ref_by_id(references.begin(), references.end());

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [id, cand] : candidates) {
        const auto it = ref_by_id.find(id);
        if (it != ref_by_id.end()) pairs.emplace_back(cand, it->second);
    }
    if (pairs.empty()) throw DataError("no candidate/reference ids matched");

    const auto scores = evaluate_corpus(pairs, variants);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw DataError("cannot write scores file: " + out_csv);
    out << "variant,precision,recall,f\n";
    for (const auto& s : scores) {
        out << s.variant << ',' << fmt_double(s.precision) << ',' << fmt_double(s.recall) << ','
            << fmt_double(s.f) << '\n';
    }
    return scores;
}

// The comparison grid: extractive at {0.4, 0.6, 1.0} plus abstractive over
// {word classes} x {keyword source ratios} x {greedy, top-50}, each cell
// scored with mean ROUGE-1/2/L against the reference field.
inline void cmd_experiment(const PipelineConfig& cfg, const std::string& reference_field,
                           const std::string& out_csv) {
    if (reference_field != "abstract" && reference_field != "body") {
        throw std::invalid_argument("experiment: reference field must be 'abstract' or 'body'");
    }
    const IngestResult ingest = ingest_corpus(cfg.corpus);
    const auto& pairs = ingest.pairs;
    const Vocab vocab = load_vocab(cfg.vocab_file());
    const ModelParams params = load_checkpoint(cfg.checkpoint_file());
    const LexiconTagger tagger = default_tagger();
    const HashingEncoder encoder{cfg.embed_dim};
    const std::vector<RougeVariant> variants = {RougeVariant::parse("1"), RougeVariant::parse("2"),
                                                RougeVariant::parse("l")};

    const auto reference_of = [&](const DocumentPair& d) {
        return reference_field == "abstract" ? d.gold_summary : d.body;
    };

    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw DataError("cannot write experiment file: " + out_csv);
    out << "system,classes,ratio,decode";
    for (const char* v : {"rouge1", "rouge2", "rougel"}) {
        out << ',' << v << "_p," << v << "_r," << v << "_f";
    }
    out << '\n';

    const auto emit_row = [&](const std::string& system, const std::string& classes, double ratio,
                              const std::string& decode_mode,
                              const std::vector<std::pair<std::string, std::string>>& scored) {
        const auto means = evaluate_corpus(scored, variants);
        out << system << ',' << classes << ',' << fmt_double(ratio) << ',' << decode_mode;
        for (const auto& m : means) {
            out << ',' << fmt_double(m.precision) << ',' << fmt_double(m.recall) << ','
                << fmt_double(m.f);
        }
        out << '\n';
    };

    for (const double ratio : {0.4, 0.6, 1.0}) {
        std::vector<std::pair<std::string, std::string>> scored(pairs.size());
        parallel_for(pairs.size(), cfg.jobs, [&](size_t i) {
            const auto ex = extract_summary(pairs[i].body, ratio, encoder,
                                            mix_seed(cfg.seed, fnv1a(pairs[i].id)),
                                            cfg.extract_mode);
            scored[i] = {ex.summary, reference_of(pairs[i])};
        });
        emit_row("extractive", "-", ratio, "-", scored);
    }

    for (const KeywordClasses classes :
         {KeywordClasses::Nouns, KeywordClasses::Verbs, KeywordClasses::NounsAndVerbs}) {
        for (const double ratio : {0.4, 0.6}) {
            // keyword sets for this cell
            std::vector<KeywordSet> keyword_sets(pairs.size());
            parallel_for(pairs.size(), cfg.jobs, [&](size_t i) {
                const std::uint64_t doc_seed = mix_seed(cfg.seed, fnv1a(pairs[i].id));
                const std::string source =
                    ratio < 1.0
                        ? extract_summary(pairs[i].body, ratio, encoder, mix_seed(doc_seed, 1))
                              .summary
                        : pairs[i].body;
                keyword_sets[i] = extract_keywords(source, classes, tagger);
                keyword_sets[i].source_ratio = ratio;
            });
            for (const bool greedy : {true, false}) {
                std::vector<std::pair<std::string, std::string>> scored(pairs.size());
                parallel_for(pairs.size(), cfg.jobs, [&](size_t i) {
                    KeywordSet kw = keyword_sets[i];
                    const auto budget = static_cast<size_t>(params.config.max_len - 3);
                    if (kw.words.size() > budget) kw.words.resize(budget);
                    DecodeParams dp = cfg.decode;
                    dp.greedy = greedy;
                    dp.seed = mix_seed(cfg.seed, fnv1a(pairs[i].id));
                    scored[i] = {generate(params, kw, dp, vocab), reference_of(pairs[i])};
                });
                emit_row("abstractive", to_string(classes), ratio, greedy ? "top1" : "top50",
                         scored);
            }
        }
    }
}

// Labeled attention heatmap for one (layer, head) over a keyword/summary row.
inline void cmd_attn(const PipelineConfig& cfg, const std::vector<std::string>& keywords,
                     const std::string& summary, int layer, int head,
                     const std::string& out_csv) {
    const Vocab vocab = load_vocab(cfg.vocab_file());
    const ModelParams params = load_checkpoint(cfg.checkpoint_file());

    TokenSequence row;
    row.push_back(special::bos);
    std::string joined;
    for (const auto& w : keywords) {
        if (!joined.empty()) joined.push_back(' ');
        joined += w;
    }
    for (const int id : encode(joined, vocab)) row.push_back(id);
    row.push_back(special::sum);
    if (!summary.empty()) {
        for (const int id : encode(summary, vocab)) row.push_back(id);
        row.push_back(special::eos);
    }
    if (static_cast<int>(row.size()) > params.config.max_len) {
        row.resize(static_cast<size_t>(params.config.max_len));
    }

    const AttentionExport exp = export_attention(params, row, layer, head, vocab);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw DataError("cannot write attention file: " + out_csv);
    for (const auto& label : exp.labels) out << ',' << label;
    out << '\n';
    for (int i = 0; i < exp.matrix.rows; ++i) {
        out << exp.labels[static_cast<size_t>(i)];
        for (int j = 0; j < exp.matrix.cols; ++j) out << ',' << fmt_double(exp.matrix(i, j));
        out << '\n';
    }
}

} // namespace kwsum
