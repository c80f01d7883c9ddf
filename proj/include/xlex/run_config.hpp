#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "xlex/align.hpp"
#include "xlex/embedding.hpp"

namespace xlex {

// Everything a pipeline command needs, persisted as flat "key = value" text.
// Training keys follow the published parameter names (dim, ws, minCount,
// epoch); the rest use the command-line flag spelling.
struct RunConfig {
    std::string command;
    TrainingConfig training;
    AlignmentConfig alignment;
    std::uint64_t seed = 1;
    // 0 means: XLEX_THREADS, else the hardware concurrency.
    int threads = 0;
    bool deterministic = false;

    std::vector<std::string> corpus;
    std::string source;
    std::string target;
    std::vector<std::string> embeddings;
    std::vector<std::string> datasets;
    bool cross_lingual = false;
    std::string gold;
    std::string seed_dictionary;
    std::string oov_query;
    std::string out = ".";

    // Accepts canonical keys and their flag-style aliases (window, min-count,
    // epochs, ...). Throws ParameterError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    static const std::vector<std::string>& keys();

    // Blank lines and '#' comments are ignored.
    static RunConfig parse(std::istream& in);
    static RunConfig load(const std::filesystem::path& path);
    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

    // Thread count after resolving 0 and the deterministic flag.
    int resolved_threads() const;
    // Seed propagated into the training and alignment configs.
    TrainingConfig training_config() const;
    AlignmentConfig alignment_config() const;
};

// Maps a command-line flag name (without dashes) to its config key.
std::string config_key_for_flag(std::string_view flag);

}  // namespace xlex
