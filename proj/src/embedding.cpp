#include "xlex/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "xlex/error.hpp"

namespace xlex {

std::string to_string(TrainingMode mode) {
    return mode == TrainingMode::skipgram ? "skipgram" : "subword-skipgram";
}

TrainingMode parse_training_mode(std::string_view text) {
    if (text == "skipgram") return TrainingMode::skipgram;
    if (text == "subword-skipgram" || text == "subword") return TrainingMode::subword_skipgram;
    throw ParameterError("unknown training mode: " + std::string(text));
}

void TrainingConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ParameterError(what);
    };
    require(dim > 0, "dim must be positive");
    require(window > 0, "window must be positive");
    require(min_count > 0, "min_count must be positive");
    require(epochs > 0, "epochs must be positive");
    require(negatives > 0, "negatives must be positive");
    require(initial_lr > 0 && std::isfinite(initial_lr), "initial_lr must be positive");
    require(final_lr > 0 && final_lr <= initial_lr, "final_lr must be in (0, initial_lr]");
    require(noise_alpha >= 0, "noise_alpha must be non-negative");
    require(subsample >= 0, "subsample must be non-negative");
    require(nmin > 0 && nmin <= nmax, "n-gram bounds must satisfy 0 < nmin <= nmax");
    require(buckets > 0, "buckets must be positive");
}

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocab, Matrix values)
    : vocab_(std::move(vocab)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != vocab_.size()) {
        throw ParameterError("embedding has " + std::to_string(values_.rows()) +
                             " rows for a vocabulary of " + std::to_string(vocab_.size()));
    }
    if (!values_.allFinite()) throw ParameterError("embedding contains non-finite values");
}

Vector EmbeddingMatrix::vector(std::string_view word) const {
    auto id = vocab_.find(word);
    if (!id) throw UnknownWordError(std::string(word));
    return values_.row(*id).transpose();
}

double cosine(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingMatrix& m, std::string_view word,
                                        std::size_t k) {
    auto query = m.vocab().find(word);
    if (!query) throw UnknownWordError(std::string(word));
    if (k == 0 || k >= m.size()) {
        throw ParameterError("k must be in [1, |V|-1]");
    }
    const Vector q = m.row(*query).transpose();
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(m.size() - 1);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i == static_cast<std::size_t>(*query)) continue;
        scored.emplace_back(cosine(q, m.row(i).transpose()), i);
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                      [](const auto& a, const auto& b) {
                          return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    std::vector<Neighbor> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back({m.vocab().word(scored[i].second), scored[i].first});
    }
    return out;
}

void save_text(const EmbeddingMatrix& m, std::ostream& out) {
    out << m.size() << ' ' << m.dim() << '\n';
    char buf[64];
    std::string line;
    for (std::size_t i = 0; i < m.size(); ++i) {
        line = m.vocab().word(i);
        for (Eigen::Index j = 0; j < m.values().cols(); ++j) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, m.values()(i, j),
                                           std::chars_format::general, 9);
            line += ' ';
            line.append(buf, end);
        }
        line += '\n';
        out << line;
    }
}

void save_text(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write embeddings: " + path.string());
    save_text(m, out);
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i == line.size()) break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        fields.push_back(line.substr(i, j - i));
        i = j;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EmbeddingMatrix load_text(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw FormatError(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_fields(line);
    std::size_t rows = 0;
    std::size_t dim = 0;
    if (header.size() != 2 || !parse_number(header[0], rows) || !parse_number(header[1], dim) ||
        dim == 0) {
        throw FormatError(1, "header must be \"<rows> <dim>\"");
    }

    std::vector<std::string> words;
    words.reserve(rows);
    Matrix values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    detail::StringMap<std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (words.size() == rows) {
            throw FormatError(line_no, "more rows than the header's " + std::to_string(rows));
        }
        if (fields.size() != dim + 1) {
            throw FormatError(line_no, "expected " + std::to_string(dim) + " values, found " +
                                           std::to_string(fields.size() - 1));
        }
        const auto r = static_cast<Eigen::Index>(words.size());
        for (std::size_t j = 0; j < dim; ++j) {
            double v = 0;
            if (!parse_number(fields[j + 1], v) || !std::isfinite(v)) {
                throw FormatError(line_no, "bad value \"" + std::string(fields[j + 1]) + "\"");
            }
            values(r, static_cast<Eigen::Index>(j)) = v;
        }
        if (!seen.emplace(std::string(fields[0]), words.size()).second) {
            throw DuplicateEntryError(line_no, "duplicate word \"" + std::string(fields[0]) + "\"");
        }
        words.emplace_back(fields[0]);
    }
    if (words.size() != rows) {
        throw FormatError(line_no + 1, "expected " + std::to_string(rows) + " rows, found " +
                                           std::to_string(words.size()));
    }
    return EmbeddingMatrix(Vocabulary(std::move(words)), std::move(values));
}

EmbeddingMatrix load_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embeddings: " + path.string());
    return load_text(in);
}

}  // namespace xlex
