#include "xlex/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "xlex/error.hpp"

namespace xlex {

namespace {

bool is_removed(UChar32 c) {
    return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_ND_MASK)) != 0;
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, c);
    out.append(buf, static_cast<std::size_t>(len));
}

struct GzCloser {
    void operator()(gzFile f) const { gzclose(f); }
};

// Splits a byte buffer into lines; a trailing '\r' is dropped.
class LineSplitter {
public:
    explicit LineSplitter(const RawCorpus::LineFn& fn) : fn_(fn) {}

    void feed(const char* data, std::size_t n) {
        std::size_t begin = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (data[i] != '\n') continue;
            pending_.append(data + begin, i - begin);
            emit();
            begin = i + 1;
        }
        pending_.append(data + begin, n - begin);
    }

    void finish() {
        if (!pending_.empty()) emit();
    }

private:
    void emit() {
        if (!pending_.empty() && pending_.back() == '\r') pending_.pop_back();
        fn_(pending_, ++line_no_);
        pending_.clear();
    }

    const RawCorpus::LineFn& fn_;
    std::string pending_;
    std::size_t line_no_ = 0;
};

}  // namespace

std::vector<std::string> preprocess(std::string_view line) {
    std::vector<std::string> tokens;
    std::string current;
    const auto* s = reinterpret_cast<const uint8_t*>(line.data());
    const auto length = static_cast<int32_t>(line.size());
    int32_t i = 0;
    while (i < length) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(s, i, length, c);
        if (c < 0) {
            throw DecodeError(static_cast<std::size_t>(start),
                              "invalid UTF-8 at byte offset " + std::to_string(start));
        }
        if (u_isUWhiteSpace(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
            continue;
        }
        if (is_removed(c)) continue;
        append_utf8(current, u_tolower(c));
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

RawCorpus RawCorpus::from_files(std::vector<std::filesystem::path> paths) {
    RawCorpus c;
    c.paths_ = std::move(paths);
    return c;
}

RawCorpus RawCorpus::from_text(std::string text) {
    RawCorpus c;
    c.text_ = std::move(text);
    return c;
}

void RawCorpus::for_each_line(const LineFn& fn) const {
    if (text_) {
        LineSplitter splitter(fn);
        splitter.feed(text_->data(), text_->size());
        splitter.finish();
        return;
    }
    std::vector<char> buffer(1 << 16);
    for (const auto& path : paths_) {
        // gzread passes uncompressed input through unchanged.
        std::unique_ptr<gzFile_s, GzCloser> file(gzopen(path.c_str(), "rb"));
        if (!file || !std::filesystem::is_regular_file(path)) {
            throw IoError("cannot open corpus file: " + path.string());
        }
        LineSplitter splitter(fn);
        for (;;) {
            const int n = gzread(file.get(), buffer.data(), static_cast<unsigned>(buffer.size()));
            if (n < 0) throw IoError("read error in " + path.string());
            if (n == 0) break;
            splitter.feed(buffer.data(), static_cast<std::size_t>(n));
        }
        splitter.finish();
    }
}

void RawCorpus::for_each_sentence(
    const std::function<void(const std::vector<std::string>&)>& fn) const {
    std::size_t source = 0;
    for_each_line([&](std::string_view line, std::size_t line_no) {
        if (line_no == 1 && text_ == std::nullopt) ++source;
        try {
            fn(preprocess(line));
        } catch (const DecodeError& e) {
            const std::string name =
                text_ ? std::string("<text>") : paths_.at(source - 1).string();
            throw DecodeError(e.offset(), name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    });
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
    if (words_.size() != counts_.size()) {
        throw ParameterError("vocabulary words and counts differ in length");
    }
    for (std::size_t i = 1; i < counts_.size(); ++i) {
        if (counts_[i] > counts_[i - 1]) {
            throw ParameterError("vocabulary counts must be non-increasing");
        }
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], static_cast<std::int32_t>(i)).second) {
            throw DuplicateEntryError(0, "duplicate vocabulary word: " + words_[i]);
        }
    }
}

Vocabulary::Vocabulary(std::vector<std::string> words) {
    const std::size_t n = words.size();
    *this = Vocabulary(std::move(words), std::vector<std::int64_t>(n, 0));
}

std::optional<std::int32_t> Vocabulary::find(std::string_view word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::int64_t Vocabulary::total_count() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

void Vocabulary::save(std::ostream& out) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
        out << words_[i] << '\t' << counts_[i] << '\n';
    }
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary: " + path.string());
    save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
    std::vector<std::string> words;
    std::vector<std::int64_t> counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw FormatError(line_no, "expected word<TAB>count");
        }
        try {
            std::size_t used = 0;
            const std::string field = line.substr(tab + 1);
            counts.push_back(std::stoll(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (const std::logic_error&) {
            throw FormatError(line_no, "bad count");
        }
        words.push_back(line.substr(0, tab));
    }
    try {
        return Vocabulary(std::move(words), std::move(counts));
    } catch (const ParameterError& e) {
        throw FormatError(0, e.what());
    }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary: " + path.string());
    return load(in);
}

void WordCounter::add(std::string_view word) {
    ++total_;
    auto it = position_.find(word);
    if (it != position_.end()) {
        ++entries_[it->second].second;
        return;
    }
    position_.emplace(word, entries_.size());
    entries_.emplace_back(std::string(word), 1);
}

void WordCounter::merge(const WordCounter& later) {
    for (const auto& [word, count] : later.entries_) {
        auto it = position_.find(word);
        if (it != position_.end()) {
            entries_[it->second].second += count;
        } else {
            position_.emplace(word, entries_.size());
            entries_.emplace_back(word, count);
        }
    }
    total_ += later.total_;
}

Vocabulary WordCounter::to_vocabulary(std::int64_t min_count) const {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].second >= min_count) order.push_back(i);
    }
    // Stable sort keeps first-occurrence order among equal counts.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return entries_[a].second > entries_[b].second;
    });
    std::vector<std::string> words;
    std::vector<std::int64_t> counts;
    words.reserve(order.size());
    counts.reserve(order.size());
    for (auto i : order) {
        words.push_back(entries_[i].first);
        counts.push_back(entries_[i].second);
    }
    return Vocabulary(std::move(words), std::move(counts));
}

Vocabulary build_vocabulary(const RawCorpus& corpus, std::int64_t min_count) {
    if (min_count < 1) throw ParameterError("min_count must be >= 1");
    WordCounter counter;
    corpus.for_each_sentence([&](const std::vector<std::string>& tokens) {
        for (const auto& t : tokens) counter.add(t);
    });
    if (counter.total() == 0) throw EmptyVocabularyError("corpus is empty after preprocessing");
    Vocabulary vocab = counter.to_vocabulary(min_count);
    if (vocab.empty()) {
        throw EmptyVocabularyError("no word reaches min_count=" + std::to_string(min_count));
    }
    return vocab;
}

void TokenStream::push_sentence(std::span<const std::int32_t> sentence) {
    ids.insert(ids.end(), sentence.begin(), sentence.end());
    starts.push_back(ids.size());
}

TokenStream encode(const RawCorpus& corpus, const Vocabulary& vocab) {
    TokenStream stream;
    std::vector<std::int32_t> sentence;
    corpus.for_each_sentence([&](const std::vector<std::string>& tokens) {
        sentence.clear();
        for (const auto& t : tokens) {
            if (auto id = vocab.find(t)) sentence.push_back(*id);
        }
        stream.push_sentence(sentence);
    });
    return stream;
}

TokenStream encode_tokens(const std::vector<std::vector<std::string>>& sentences,
                          const Vocabulary& vocab) {
    TokenStream stream;
    std::vector<std::int32_t> sentence;
    for (const auto& tokens : sentences) {
        sentence.clear();
        for (const auto& t : tokens) {
            if (auto id = vocab.find(t)) sentence.push_back(*id);
        }
        stream.push_sentence(sentence);
    }
    return stream;
}

CorpusStats stats(const RawCorpus& corpus) {
    WordCounter counter;
    corpus.for_each_sentence([&](const std::vector<std::string>& tokens) {
        for (const auto& t : tokens) counter.add(t);
    });
    return {counter.total(), static_cast<std::int64_t>(counter.unique())};
}

}  // namespace xlex
