#include "xlex/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "xlex/error.hpp"

namespace xlex {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    for (;;) {
        const auto pos = line.find(sep, begin);
        out.push_back(trim(line.substr(begin, pos == std::string_view::npos ? pos : pos - begin)));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return out;
}

std::optional<double> parse_score(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

SimilarityDataset load_dataset(std::istream& in, std::string name) {
    SimilarityDataset d;
    d.name = std::move(name);
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
        const auto fields = split(line, sep);
        if (fields.size() != 3) {
            throw FormatError(line_no, "expected 3 columns, found " + std::to_string(fields.size()));
        }
        const auto score = parse_score(fields[2]);
        if (!score) {
            if (first_row) {
                first_row = false;
                continue;
            }
            throw FormatError(line_no, "non-numeric score \"" + std::string(fields[2]) + "\"");
        }
        first_row = false;
        if (!std::isfinite(*score)) throw FormatError(line_no, "non-finite score");

        std::vector<std::string> a;
        std::vector<std::string> b;
        try {
            a = preprocess(fields[0]);
            b = preprocess(fields[1]);
        } catch (const DecodeError& e) {
            throw FormatError(line_no, e.what());
        }
        if (a.size() != 1 || b.size() != 1) {
            ++d.rejected_rows;
            continue;
        }
        auto key = std::minmax(a[0], b[0]);
        if (!seen.emplace(key.first, key.second).second) {
            ++d.rejected_rows;
            continue;
        }
        d.pairs.push_back({std::move(a[0]), std::move(b[0]), *score});
    }
    return d;
}

SimilarityDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path.string());
    return load_dataset(in, path.stem().string());
}

std::vector<double> fractional_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) share rank mean(i+1..j+1).
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ParameterError("spearman inputs differ in length");
    if (xs.size() < 2) throw UndefinedCorrelationError("spearman needs at least two values");
    const auto rx = fractional_ranks(xs);
    const auto ry = fractional_ranks(ys);
    const double n = static_cast<double>(rx.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw UndefinedCorrelationError("constant ranking; correlation undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<PairScore> pair_scores(const EmbeddingLookup& lookup, const SimilarityDataset& d) {
    if (lookup.first.dim() != lookup.second.dim()) {
        throw DimensionMismatchError(lookup.first.dim(), lookup.second.dim());
    }
    std::vector<PairScore> out;
    for (const auto& p : d.pairs) {
        const auto a = lookup.first.vocab().find(p.first);
        const auto b = lookup.second.vocab().find(p.second);
        if (!a || !b) continue;
        out.push_back({p, cosine(lookup.first.row(*a).transpose(), lookup.second.row(*b).transpose())});
    }
    return out;
}

EvalReport evaluate(const EmbeddingLookup& lookup, const SimilarityDataset& d, std::string model_id) {
    EvalReport r;
    r.model_id = std::move(model_id);
    r.dataset = d.name;
    r.pairs_total = d.pairs.size();
    r.rejected_rows = d.rejected_rows;

    std::set<std::pair<int, std::string>> words;
    for (const auto& p : d.pairs) {
        words.emplace(0, p.first);
        words.emplace(1, p.second);
    }
    // Monolingual lookups see one vocabulary: count each word once.
    const bool same_space = &lookup.first == &lookup.second;
    std::set<std::string> merged;
    for (const auto& [side, w] : words) {
        if (same_space) {
            if (merged.insert(w).second) {
                ++r.words_total;
                if (lookup.first.vocab().contains(w)) ++r.words_covered;
            }
        } else {
            ++r.words_total;
            const auto& space = side == 0 ? lookup.first : lookup.second;
            if (space.vocab().contains(w)) ++r.words_covered;
        }
    }
    r.word_coverage_percent =
        r.words_total ? 100.0 * static_cast<double>(r.words_covered) / static_cast<double>(r.words_total) : 0.0;

    const auto scores = pair_scores(lookup, d);
    r.pairs_covered = scores.size();
    r.coverage_percent =
        r.pairs_total ? 100.0 * static_cast<double>(r.pairs_covered) / static_cast<double>(r.pairs_total) : 0.0;

    std::vector<double> model;
    std::vector<double> human;
    for (const auto& s : scores) {
        model.push_back(s.model_cosine);
        human.push_back(s.pair.human_score);
    }
    try {
        r.spearman_percent = 100.0 * spearman(model, human);
    } catch (const UndefinedCorrelationError& e) {
        r.error = e.what();
    }
    return r;
}

void write_report_table(std::ostream& out, const std::vector<EvalReport>& rows, const std::string& title) {
    std::size_t name_width = title.size();
    for (const auto& r : rows) {
        name_width = std::max(name_width, r.model_id.size() + r.dataset.size() + 2);
    }
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    auto lpad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.insert(0, w - s.size(), ' ');
        return s;
    };
    out << pad(title, name_width) << "  " << lpad("Coverage", 8) << "  " << lpad("Spearman", 8) << '\n';
    for (const auto& r : rows) {
        out << pad(r.model_id + "(" + r.dataset + ")", name_width) << "  "
            << lpad(r.error.empty() || r.pairs_total ? format2(r.coverage_percent) : "-", 8) << "  "
            << lpad(r.spearman_percent ? format2(*r.spearman_percent) : "n/a", 8);
        if (!r.error.empty()) out << "  error: " << r.error;
        out << '\n';
    }
}

void write_report_lines(std::ostream& out, const std::vector<EvalReport>& rows) {
    for (const auto& r : rows) {
        out << r.model_id << '\t' << r.dataset << '\t' << format2(r.coverage_percent) << '\t'
            << (r.spearman_percent ? format2(*r.spearman_percent) : "NA") << '\n';
    }
}

}  // namespace xlex
