#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xlex {

namespace detail {
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
        return std::hash<std::string_view>{}(s);
    }
};
template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;
}  // namespace detail

// Lowercases, strips digits (Nd) and punctuation (P*, which covers brackets)
// and splits on whitespace. Empty tokens are dropped.
// Throws DecodeError on malformed UTF-8.
std::vector<std::string> preprocess(std::string_view line);

// A line-oriented text source that can be read any number of times. Files may
// be gzip-compressed; compression is detected from the magic bytes.
class RawCorpus {
public:
    using LineFn = std::function<void(std::string_view line, std::size_t line_no)>;

    static RawCorpus from_files(std::vector<std::filesystem::path> paths);
    static RawCorpus from_text(std::string text);

    // Streams every line of every source in order. line_no restarts at 1 for
    // each file. Throws IoError when a file cannot be opened.
    void for_each_line(const LineFn& fn) const;

    // Same as for_each_line, but hands over the preprocessed tokens. Decode
    // errors are rethrown with the source name and line number attached.
    void for_each_sentence(
        const std::function<void(const std::vector<std::string>&)>& fn) const;

    const std::vector<std::filesystem::path>& paths() const { return paths_; }

private:
    std::vector<std::filesystem::path> paths_;
    std::optional<std::string> text_;
};

// Word <-> id bijection. Ids are ordered by non-increasing count; a count of 0
// means "unknown" (vocabularies read back from embedding files carry no counts).
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> counts);
    explicit Vocabulary(std::vector<std::string> words);

    std::size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }

    const std::string& word(std::size_t id) const { return words_.at(id); }
    std::int64_t count(std::size_t id) const { return counts_.at(id); }
    std::optional<std::int32_t> find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word).has_value(); }

    const std::vector<std::string>& words() const { return words_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    std::int64_t total_count() const;

    // "word<TAB>count" per line, in id order.
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(std::istream& in);
    static Vocabulary load(const std::filesystem::path& path);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.words_ == b.words_ && a.counts_ == b.counts_;
    }

private:
    std::vector<std::string> words_;
    std::vector<std::int64_t> counts_;
    detail::StringMap<std::int32_t> index_;
};

// Frequency counter that remembers first-occurrence order. Shards counted
// independently and merged in corpus order give the same result as a single
// sequential pass.
class WordCounter {
public:
    void add(std::string_view word);
    void merge(const WordCounter& later);

    std::size_t unique() const { return entries_.size(); }
    std::int64_t total() const { return total_; }

    // Keeps words with count >= min_count, sorted by descending count with
    // ties broken by first occurrence.
    Vocabulary to_vocabulary(std::int64_t min_count) const;

private:
    std::vector<std::pair<std::string, std::int64_t>> entries_;
    detail::StringMap<std::size_t> position_;
    std::int64_t total_ = 0;
};

// Throws EmptyVocabularyError when nothing survives preprocessing/threshold.
Vocabulary build_vocabulary(const RawCorpus& corpus, std::int64_t min_count);

// Integer-encoded corpus. Sentence i spans [starts[i], starts[i+1]).
struct TokenStream {
    std::vector<std::int32_t> ids;
    std::vector<std::size_t> starts{0};

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    std::size_t sentence_count() const { return starts.size() - 1; }
    std::span<const std::int32_t> sentence(std::size_t i) const {
        return {ids.data() + starts[i], starts[i + 1] - starts[i]};
    }
    void push_sentence(std::span<const std::int32_t> sentence);
};

// Out-of-vocabulary tokens are dropped; every line stays a sentence.
TokenStream encode(const RawCorpus& corpus, const Vocabulary& vocab);
TokenStream encode_tokens(const std::vector<std::vector<std::string>>& sentences,
                          const Vocabulary& vocab);

struct CorpusStats {
    std::int64_t tokens = 0;
    std::int64_t unique = 0;
};

CorpusStats stats(const RawCorpus& corpus);

}  // namespace xlex
