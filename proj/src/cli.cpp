#include "xlex/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

#include "xlex/align.hpp"
#include "xlex/corpus.hpp"
#include "xlex/embedding.hpp"
#include "xlex/error.hpp"
#include "xlex/eval.hpp"
#include "xlex/run_config.hpp"
#include "xlex/sgns.hpp"
#include "xlex/subword.hpp"

namespace xlex {

namespace fs = std::filesystem;

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (dynamic_cast<const DimensionMismatchError*>(&e)) return kExitDimension;
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DecodeError*>(&e)) return kExitFormat;
    if (dynamic_cast<const ParameterError*>(&e)) return kExitParameter;
    return kExitFailure;
}

// Command-line options are kept as strings and applied on top of the config
// file through RunConfig::set, so both paths share one parser.
class OptionSet {
public:
    OptionSet(CLI::App* app, const RunConfig& defaults) : app_(app), defaults_(defaults) {}

    void value(const std::string& flag, const std::string& help) {
        const auto key = config_key_for_flag(flag);
        auto* opt = app_->add_option("--" + flag, values_[key], help);
        opt->default_str(defaults_.get(key));
        options_.emplace_back(opt, key);
    }

    void list(const std::string& flag, const std::string& help) {
        const auto key = config_key_for_flag(flag);
        auto* opt = app_->add_option("--" + flag, lists_[key], help);
        opt->allow_extra_args(false);
        options_.emplace_back(opt, key);
    }

    void flag(const std::string& flag, const std::string& help) {
        const auto key = config_key_for_flag(flag);
        auto* opt = app_->add_flag("--" + flag, help);
        options_.emplace_back(opt, key);
        flags_.insert(key);
    }

    // count == 0 takes any number of values.
    void positional(const std::string& name, const std::string& key, const std::string& help,
                    int count) {
        CLI::Option* opt = count == 1 ? app_->add_option(name, values_[key], help)
                                      : app_->add_option(name, lists_[key], help);
        options_.emplace_back(opt, key);
    }

    // Config file (if any), then every option that was given explicitly.
    RunConfig resolve(const std::string& config_path, const std::string& command) const {
        RunConfig c = config_path.empty() ? defaults_ : RunConfig::load(config_path);
        c.command = command;
        for (const auto& [opt, key] : options_) {
            if (opt->count() == 0) continue;
            if (flags_.count(key)) {
                c.set(key, "true");
            } else if (auto it = lists_.find(key); it != lists_.end()) {
                std::string joined;
                for (const auto& v : it->second) {
                    if (!joined.empty()) joined += ",";
                    joined += v;
                }
                c.set(key, joined);
            } else {
                c.set(key, values_.at(key));
            }
        }
        return c;
    }

private:
    CLI::App* app_;
    const RunConfig& defaults_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> lists_;
    std::set<std::string> flags_;
    std::vector<std::pair<CLI::Option*, std::string>> options_;
};

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_transform(const Matrix& w, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(w(i, j));
        }
        out << '\n';
    }
}

Dictionary read_dictionary(const fs::path& path, const Vocabulary& source, const Vocabulary& target,
                           std::size_t* skipped) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dictionary: " + path.string());
    Dictionary dict;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a >> b) || (fields >> extra)) {
            throw FormatError(line_no, "expected source<TAB>target in " + path.string());
        }
        const auto s = source.find(a);
        const auto t = target.find(b);
        if (!s || !t) {
            if (skipped) ++*skipped;
            continue;
        }
        dict.push_back({*s, *t});
    }
    return dict;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string model_id(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_stats(const RunConfig& cfg, std::ostream& out) {
    if (cfg.corpus.empty()) throw ParameterError("stats needs at least one corpus file");
    std::vector<std::pair<std::string, CorpusStats>> rows;
    for (const auto& path : cfg.corpus) {
        rows.emplace_back(path, stats(RawCorpus::from_files({path})));
    }
    for (const auto& [path, s] : rows) {
        out << path << "\ttokens=" << s.tokens << "\tunique=" << s.unique << '\n';
    }
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.corpus.empty()) throw ParameterError("train needs at least one corpus file");
    const TrainingConfig tc = cfg.training_config();
    tc.validate();
    const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
    ensure_dir(dir);

    std::vector<fs::path> paths(cfg.corpus.begin(), cfg.corpus.end());
    const auto corpus = RawCorpus::from_files(paths);
    const auto vocab = build_vocabulary(corpus, tc.min_count);
    const auto stream = encode(corpus, vocab);
    const int threads = cfg.resolved_threads();

    EmbeddingMatrix embeddings;
    if (tc.mode == TrainingMode::skipgram) {
        embeddings = train_sgns(stream, vocab, tc, threads);
    } else {
        const auto model = train_subword_model(stream, vocab, tc, threads);
        embeddings = model.word_matrix();
        if (!cfg.oov_query.empty()) {
            std::vector<std::string> words;
            std::vector<Vector> rows;
            std::size_t unavailable = 0;
            RawCorpus::from_files({cfg.oov_query}).for_each_sentence([&](const auto& tokens) {
                for (const auto& w : tokens) {
                    if (std::find(words.begin(), words.end(), w) != words.end()) continue;
                    try {
                        rows.push_back(model.word_vector(w));
                        words.push_back(w);
                    } catch (const RepresentationUnavailableError&) {
                        ++unavailable;
                    }
                }
            });
            Matrix m(static_cast<Eigen::Index>(rows.size()), tc.dim);
            for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
            save_text(EmbeddingMatrix(Vocabulary(std::move(words)), std::move(m)), dir / "oov.vec");
            if (unavailable) err << "warning: " << unavailable << " query words have no n-grams\n";
        }
    }
    save_text(embeddings, dir / "embeddings.vec");
    vocab.save(dir / "vocab.tsv");
    cfg.save(dir / "manifest.conf");
    out << "mode=" << to_string(tc.mode) << " vocabulary=" << vocab.size() << " tokens=" << stream.size()
        << " dim=" << tc.dim << " epochs=" << tc.epochs << '\n';
    out << "wrote " << (dir / "embeddings.vec").string() << '\n';
    return kExitOk;
}

int cmd_align(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.source.empty() || cfg.target.empty()) {
        throw ParameterError("align needs a source and a target embedding file");
    }
    const auto source = load_text(fs::path(cfg.source));
    const auto target = load_text(fs::path(cfg.target));
    if (source.dim() != target.dim()) throw DimensionMismatchError(source.dim(), target.dim());
    const AlignmentConfig ac = cfg.alignment_config();
    ac.validate();
    const fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
    ensure_dir(dir);

    std::optional<Dictionary> seed_dict;
    if (!cfg.seed_dictionary.empty()) {
        std::size_t skipped = 0;
        seed_dict = read_dictionary(cfg.seed_dictionary, source.vocab(), target.vocab(), &skipped);
        if (seed_dict->empty()) throw ParameterError("seed dictionary has no in-vocabulary pairs");
    }
    const auto model = align(source, target, ac, seed_dict);
    if (static_cast<Eigen::Index>(model.induced_dictionary.size()) < static_cast<Eigen::Index>(source.dim())) {
        err << "warning: dictionary has fewer pairs than dimensions; mapping is underdetermined\n";
    }
    const auto mapped_source = project(normalize(source), model.w_source);
    const auto mapped_target = project(normalize(target), model.w_target);

    std::vector<std::string> log = model.log;
    if (!cfg.gold.empty()) {
        std::size_t skipped = 0;
        const auto gold = read_dictionary(cfg.gold, source.vocab(), target.vocab(), &skipped);
        if (gold.empty()) throw ParameterError("gold dictionary has no in-vocabulary pairs");
        const double p1 = precision_at_1(mapped_source, mapped_target, gold, Retrieval::csls,
                                         ac.csls_k, ac.threads);
        char line[128];
        std::snprintf(line, sizeof line, "P@1=%.2f%% gold_pairs=%zu skipped=%zu", 100.0 * p1, gold.size(),
                      skipped);
        log.emplace_back(line);
    }

    write_transform(model.w_source, dir / "w_source.txt");
    write_transform(model.w_target, dir / "w_target.txt");
    save_text(mapped_source, dir / "source.mapped.vec");
    save_text(mapped_target, dir / "target.mapped.vec");
    {
        std::ofstream dict(dir / "dictionary.tsv", std::ios::binary);
        if (!dict) throw IoError("cannot write dictionary");
        for (const auto& p : model.induced_dictionary) {
            dict << source.vocab().word(static_cast<std::size_t>(p.source)) << '\t'
                 << target.vocab().word(static_cast<std::size_t>(p.target)) << '\n';
        }
    }
    {
        std::ofstream lf(dir / "align.log", std::ios::binary);
        if (!lf) throw IoError("cannot write align.log");
        for (const auto& l : log) lf << l << '\n';
    }
    cfg.save(dir / "manifest.conf");
    // The final lines carry convergence and, with --gold, P@1.
    const std::size_t tail = cfg.gold.empty() ? 1 : 2;
    for (std::size_t i = log.size() >= tail ? log.size() - tail : 0; i < log.size(); ++i) {
        out << log[i] << '\n';
    }
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.embeddings.empty()) throw ParameterError("eval needs at least one --embedding");
    if (cfg.datasets.empty()) throw ParameterError("eval needs at least one --dataset");
    if (cfg.cross_lingual && cfg.embeddings.size() != 2) {
        throw ParameterError("cross-lingual evaluation takes exactly two embeddings (source, target)");
    }

    struct Loaded {
        std::string id;
        std::optional<EmbeddingMatrix> m;
        std::string error;
        int code = kExitOk;
    };
    auto load = [](const std::string& path) {
        Loaded l;
        l.id = model_id(path);
        try {
            l.m = load_text(fs::path(path));
        } catch (const Error& e) {
            l.error = e.what();
            l.code = exit_code_for(e);
        }
        return l;
    };
    struct Data {
        std::optional<SimilarityDataset> d;
        std::string name;
        std::string error;
        int code = kExitOk;
    };
    std::vector<Data> datasets;
    for (const auto& path : cfg.datasets) {
        Data d;
        d.name = fs::path(path).stem().string();
        try {
            d.d = load_dataset(fs::path(path));
        } catch (const Error& e) {
            d.error = e.what();
            d.code = exit_code_for(e);
        }
        datasets.push_back(std::move(d));
    }

    std::vector<Loaded> models;
    for (const auto& path : cfg.embeddings) models.push_back(load(path));

    int code = kExitOk;
    auto note = [&](int c) {
        if (code == kExitOk && c != kExitOk) code = c;
    };
    std::vector<EvalReport> rows;
    auto run = [&](const std::string& id, const EmbeddingLookup* lookup, const std::string& model_error,
                   int model_code) {
        for (const auto& d : datasets) {
            EvalReport r;
            r.model_id = id;
            r.dataset = d.name;
            if (!model_error.empty()) {
                r.error = model_error;
                note(model_code);
            } else if (!d.d) {
                r.error = d.error;
                note(d.code);
            } else {
                r = evaluate(*lookup, *d.d, id);
                if (!r.error.empty()) note(kExitFailure);
            }
            rows.push_back(std::move(r));
        }
    };

    if (cfg.cross_lingual) {
        const auto& a = models[0];
        const auto& b = models[1];
        const std::string id = a.id + "-" + b.id;
        if (a.m && b.m) {
            if (a.m->dim() != b.m->dim()) throw DimensionMismatchError(a.m->dim(), b.m->dim());
            const EmbeddingLookup lookup(*a.m, *b.m);
            run(id, &lookup, "", kExitOk);
        } else {
            run(id, nullptr, a.m ? b.error : a.error, a.m ? b.code : a.code);
        }
    } else {
        for (const auto& m : models) {
            if (m.m) {
                const EmbeddingLookup lookup(*m.m);
                run(m.id, &lookup, "", kExitOk);
            } else {
                run(m.id, nullptr, m.error, m.code);
            }
        }
    }

    const std::string title = cfg.cross_lingual ? "Crosslingual" : "Monolingual";
    write_report_table(out, rows, title);
    out << '\n';
    write_report_lines(out, rows);
    for (const auto& r : rows) {
        if (r.rejected_rows) {
            err << "warning: " << r.dataset << ": " << r.rejected_rows << " rows rejected\n";
        }
    }
    if (!cfg.out.empty()) {
        const fs::path dir(cfg.out);
        ensure_dir(dir);
        std::ofstream table(dir / "report.txt", std::ios::binary);
        write_report_table(table, rows, title);
        std::ofstream lines(dir / "report.tsv", std::ios::binary);
        write_report_lines(lines, rows);
        cfg.save(dir / "manifest.conf");
    }
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"xlex: monolingual embedding training, unsupervised cross-lingual alignment and "
                 "word-similarity evaluation",
                 "xlex"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(36);

    RunConfig defaults;
    RunConfig eval_defaults;
    eval_defaults.out.clear();
    std::string config_path;

    auto* stats_cmd = app.add_subcommand("stats", "Token and unique-word counts per corpus");
    auto* train_cmd = app.add_subcommand("train", "Train skip-gram or subword embeddings");
    auto* align_cmd = app.add_subcommand("align", "Map two embedding spaces into a shared space");
    auto* eval_cmd = app.add_subcommand("eval", "Word-similarity coverage and Spearman correlation");
    for (auto* sub : {stats_cmd, train_cmd, align_cmd, eval_cmd}) {
        sub->add_option("--config", config_path, "Read key = value settings; flags override them");
    }

    OptionSet stats_opts(stats_cmd, defaults);
    stats_opts.positional("corpus", "corpus", "Corpus files (plain or gzip)", 0);

    OptionSet train_opts(train_cmd, defaults);
    train_opts.positional("corpus", "corpus", "Corpus files (plain or gzip)", 0);
    train_opts.value("mode", "skipgram | subword-skipgram");
    train_opts.value("dim", "Vector dimension");
    train_opts.value("window", "Maximum context window (ws)");
    train_opts.value("min-count", "Minimal word occurrences (minCount)");
    train_opts.value("epochs", "Passes over the corpus (epoch)");
    train_opts.value("negatives", "Negative samples per context");
    train_opts.value("lr", "Initial learning rate (linear decay)");
    train_opts.value("subsample", "Frequent-word subsampling threshold (0 = off)");
    train_opts.value("nmin", "Minimal character n-gram length");
    train_opts.value("nmax", "Maximal character n-gram length");
    train_opts.value("buckets", "Hash buckets for n-grams");
    train_opts.value("seed", "Random seed");
    train_opts.value("threads", "Worker threads (0 = XLEX_THREADS or all cores)");
    train_opts.flag("deterministic", "Single worker; bit-reproducible output");
    train_opts.value("oov-query", "Words to compose from n-grams (subword mode) into oov.vec");
    train_opts.value("out", "Output directory");

    OptionSet align_opts(align_cmd, defaults);
    align_opts.positional("source", "source", "Source-language embeddings", 1);
    align_opts.positional("target", "target", "Target-language embeddings", 1);
    align_opts.value("csls-k", "CSLS neighbourhood size");
    align_opts.value("vocab-cutoff", "Most frequent words used for dictionary induction");
    align_opts.value("init-vocab", "Most frequent words used by the unsupervised initialization");
    align_opts.value("max-iterations", "Self-learning iteration cap");
    align_opts.value("convergence-tol", "Minimal relative objective improvement");
    align_opts.value("keep-prob", "Initial dictionary-induction keep probability");
    align_opts.value("stagnation-window", "Iterations without progress before annealing");
    align_opts.value("restarts", "Self-learning runs; the best unsupervised objective wins");
    align_opts.flag("advanced-mapping", "Whitening, re-weighting and de-whitening (non-orthogonal)");
    align_opts.value("seed", "Random seed");
    align_opts.value("threads", "Worker threads (0 = XLEX_THREADS or all cores)");
    align_opts.flag("deterministic", "Single worker");
    align_opts.value("gold", "source<TAB>target dictionary for reporting P@1");
    align_opts.value("seed-dictionary", "Supervised bypass: start from this dictionary");
    align_opts.value("out", "Output directory");

    OptionSet eval_opts(eval_cmd, eval_defaults);
    eval_opts.list("embedding", "Embedding file (repeatable)");
    eval_opts.list("dataset", "Similarity dataset, three columns (repeatable)");
    eval_opts.flag("cross-lingual", "Two embeddings: word1 from the first, word2 from the second");
    eval_opts.value("out", "Also write report.txt/report.tsv/manifest.conf here");

    std::vector<const char*> argv{"xlex"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (stats_cmd->parsed()) {
            return cmd_stats(stats_opts.resolve(config_path, "stats"), out);
        }
        if (train_cmd->parsed()) {
            return cmd_train(train_opts.resolve(config_path, "train"), out, err);
        }
        if (align_cmd->parsed()) {
            auto cfg = align_opts.resolve(config_path, "align");
            return cmd_align(cfg, out, err);
        }
        if (eval_cmd->parsed()) {
            auto cfg = eval_opts.resolve(config_path, "eval");
            return cmd_eval(cfg, out, err);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace xlex
