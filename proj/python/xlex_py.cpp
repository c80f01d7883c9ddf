#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "xlex/align.hpp"
#include "xlex/cli.hpp"
#include "xlex/corpus.hpp"
#include "xlex/error.hpp"
#include "xlex/eval.hpp"
#include "xlex/sgns.hpp"
#include "xlex/subword.hpp"

namespace py = pybind11;
using namespace xlex;

namespace {

RawCorpus corpus_from(const py::object& source) {
    if (py::isinstance<py::str>(source)) return RawCorpus::from_text(source.cast<std::string>());
    return RawCorpus::from_files(source.cast<std::vector<std::filesystem::path>>());
}

EmbeddingMatrix train(const py::object& source, const std::string& mode, int dim, int window,
                      std::int64_t min_count, int epochs, int negatives, std::uint64_t seed, int threads) {
    TrainingConfig config;
    config.mode = parse_training_mode(mode);
    config.dim = dim;
    config.window = window;
    config.min_count = min_count;
    config.epochs = epochs;
    config.negatives = negatives;
    config.seed = seed;
    config.validate();
    const auto corpus = corpus_from(source);
    const auto vocab = build_vocabulary(corpus, min_count);
    const auto stream = encode(corpus, vocab);
    py::gil_scoped_release release;
    if (config.mode == TrainingMode::subword_skipgram) return train_subword(stream, vocab, config, threads);
    return train_sgns(stream, vocab, config, threads);
}

py::list pairs(const Dictionary& d) {
    py::list out;
    for (const auto& p : d) out.append(py::make_tuple(p.source, p.target));
    return out;
}

Dictionary dictionary_from(const std::vector<std::pair<std::int32_t, std::int32_t>>& raw) {
    Dictionary d;
    for (const auto& [s, t] : raw) d.push_back({s, t});
    return d;
}

}  // namespace

PYBIND11_MODULE(_xlex, m) {
    m.doc() = "Monolingual embedding training, unsupervised cross-lingual alignment and similarity evaluation";

    auto base = py::register_exception<Error>(m, "XlexError");
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<DimensionMismatchError>(m, "DimensionMismatchError", base.ptr());
    py::register_exception<UnknownWordError>(m, "UnknownWordError", base.ptr());

    m.def("preprocess", &preprocess, py::arg("line"));
    m.def("extract_ngrams", &extract_ngrams, py::arg("word"), py::arg("nmin") = 3, py::arg("nmax") = 6);
    m.def("fnv1a32", &fnv1a32, py::arg("data"));

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_property_readonly("words", &Vocabulary::words)
        .def_property_readonly("counts", &Vocabulary::counts)
        .def("find", &Vocabulary::find)
        .def("__len__", &Vocabulary::size)
        .def("__contains__", &Vocabulary::contains);

    m.def("build_vocabulary", [](const py::object& source, std::int64_t min_count) {
        return build_vocabulary(corpus_from(source), min_count);
    }, py::arg("source"), py::arg("min_count") = 1,
          "source is either a str of text or a list of file paths");
    m.def("stats", [](const py::object& source) {
        const auto s = stats(corpus_from(source));
        return py::make_tuple(s.tokens, s.unique);
    }, py::arg("source"));

    py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
        .def(py::init([](std::vector<std::string> words, Matrix values) {
            return EmbeddingMatrix(Vocabulary(std::move(words)), std::move(values));
        }), py::arg("words"), py::arg("values"))
        .def_property_readonly("words", [](const EmbeddingMatrix& e) { return e.vocab().words(); })
        .def_property_readonly("values", &EmbeddingMatrix::values)
        .def_property_readonly("dim", &EmbeddingMatrix::dim)
        .def("vector", &EmbeddingMatrix::vector, py::arg("word"))
        .def("__len__", &EmbeddingMatrix::size);

    m.def("load_embeddings", py::overload_cast<const std::filesystem::path&>(&load_text), py::arg("path"));
    m.def("save_embeddings", py::overload_cast<const EmbeddingMatrix&, const std::filesystem::path&>(&save_text),
          py::arg("matrix"), py::arg("path"));
    m.def("nearest_neighbors", [](const EmbeddingMatrix& e, const std::string& w, std::size_t k) {
        py::list out;
        for (const auto& n : nearest_neighbors(e, w, k)) out.append(py::make_tuple(n.word, n.cosine));
        return out;
    }, py::arg("matrix"), py::arg("word"), py::arg("k") = 10);

    m.def("train", &train, py::arg("source"), py::arg("mode") = "skipgram", py::arg("dim") = 300,
          py::arg("window") = 4, py::arg("min_count") = 1, py::arg("epochs") = 100, py::arg("negatives") = 5,
          py::arg("seed") = 1, py::arg("threads") = 1);

    py::class_<AlignmentConfig>(m, "AlignmentConfig")
        .def(py::init<>())
        .def_readwrite("csls_k", &AlignmentConfig::csls_k)
        .def_readwrite("vocab_cutoff", &AlignmentConfig::vocab_cutoff)
        .def_readwrite("init_vocab", &AlignmentConfig::init_vocab)
        .def_readwrite("max_iterations", &AlignmentConfig::max_iterations)
        .def_readwrite("convergence_tol", &AlignmentConfig::convergence_tol)
        .def_readwrite("keep_prob", &AlignmentConfig::initial_keep_prob)
        .def_readwrite("stagnation_window", &AlignmentConfig::stagnation_window)
        .def_readwrite("orthogonal", &AlignmentConfig::orthogonal)
        .def_readwrite("seed", &AlignmentConfig::seed)
        .def_readwrite("restarts", &AlignmentConfig::restarts)
        .def_readwrite("threads", &AlignmentConfig::threads);

    py::class_<AlignmentModel>(m, "AlignmentModel")
        .def_readonly("w_source", &AlignmentModel::w_source)
        .def_readonly("w_target", &AlignmentModel::w_target)
        .def_readonly("objective", &AlignmentModel::objective)
        .def_readonly("converged", &AlignmentModel::converged)
        .def_readonly("iterations", &AlignmentModel::iterations)
        .def_readonly("log", &AlignmentModel::log)
        .def_property_readonly("dictionary", [](const AlignmentModel& a) { return pairs(a.induced_dictionary); });

    m.def("align", [](const EmbeddingMatrix& s, const EmbeddingMatrix& t, const AlignmentConfig& c,
                      std::optional<std::vector<std::pair<std::int32_t, std::int32_t>>> seed) {
        std::optional<Dictionary> d;
        if (seed) d = dictionary_from(*seed);
        py::gil_scoped_release release;
        return align(s, t, c, d);
    }, py::arg("source"), py::arg("target"), py::arg("config") = AlignmentConfig{},
          py::arg("seed_dictionary") = py::none());
    m.def("normalize", &normalize, py::arg("matrix"));
    m.def("project", &project, py::arg("matrix"), py::arg("w"));
    m.def("csls", &csls, py::arg("similarity"), py::arg("k") = 10);
    m.def("precision_at_1", [](const EmbeddingMatrix& s, const EmbeddingMatrix& t,
                               const std::vector<std::pair<std::int32_t, std::int32_t>>& gold, bool use_csls) {
        return precision_at_1(s, t, dictionary_from(gold), use_csls ? Retrieval::csls : Retrieval::nearest_neighbor);
    }, py::arg("source"), py::arg("target"), py::arg("gold"), py::arg("csls") = true);

    m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); },
          py::arg("x"), py::arg("y"));
    m.def("fractional_ranks", [](const std::vector<double>& v) { return fractional_ranks(v); }, py::arg("values"));

    m.def("evaluate", [](const EmbeddingMatrix& first, const std::filesystem::path& dataset,
                         const EmbeddingMatrix* second, const std::string& model_id) {
        const auto d = load_dataset(dataset);
        const auto r = second ? evaluate(EmbeddingLookup(first, *second), d, model_id)
                              : evaluate(EmbeddingLookup(first), d, model_id);
        py::dict out;
        out["model"] = r.model_id;
        out["dataset"] = r.dataset;
        out["pairs_total"] = r.pairs_total;
        out["pairs_covered"] = r.pairs_covered;
        out["coverage"] = r.coverage_percent;
        out["spearman"] = r.spearman_percent ? py::cast(*r.spearman_percent) : py::none();
        out["rejected_rows"] = r.rejected_rows;
        out["error"] = r.error;
        return out;
    }, py::arg("matrix"), py::arg("dataset"), py::arg("second") = nullptr, py::arg("model_id") = "model");

    m.def("cli", [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run an xlex subcommand in-process; returns (exit_code, stdout, stderr).");
}
