#include "xlex/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <thread>

#include "xlex/error.hpp"

namespace xlex {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
    T v{};
    text = trim(text);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParameterError("bad value for " + std::string(key) + ": \"" + std::string(text) + "\"");
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ParameterError("bad boolean for " + std::string(key) + ": \"" + std::string(text) + "\"");
}

std::vector<std::string> parse_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto pos = text.find(',', begin);
        if (pos == std::string_view::npos) pos = text.size();
        auto item = trim(text.substr(begin, pos - begin));
        if (!item.empty()) out.emplace_back(item);
        begin = pos + 1;
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += ", ";
        s += items[i];
    }
    return s;
}

template <typename T>
std::string show(T v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string show(bool v) { return v ? "true" : "false"; }

struct Field {
    std::string key;
    std::vector<std::string> aliases;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define XLEX_NUMBER(KEY, ALIASES, MEMBER)                                                        \
    Field {                                                                                     \
        KEY, ALIASES,                                                                           \
            [](RunConfig& c, std::string_view v) {                                              \
                c.MEMBER = parse_value<std::remove_reference_t<decltype(c.MEMBER)>>(KEY, v);    \
            },                                                                                  \
            [](const RunConfig& c) { return show(c.MEMBER); }                                   \
    }

#define XLEX_BOOL(KEY, ALIASES, MEMBER)                                                          \
    Field {                                                                                     \
        KEY, ALIASES, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_bool(KEY, v); },  \
            [](const RunConfig& c) { return show(c.MEMBER); }                                   \
    }

#define XLEX_STRING(KEY, ALIASES, MEMBER)                                                        \
    Field {                                                                                     \
        KEY, ALIASES, [](RunConfig& c, std::string_view v) { c.MEMBER = std::string(trim(v)); }, \
            [](const RunConfig& c) { return c.MEMBER; }                                         \
    }

#define XLEX_LIST(KEY, ALIASES, MEMBER)                                                          \
    Field {                                                                                     \
        KEY, ALIASES, [](RunConfig& c, std::string_view v) { c.MEMBER = parse_list(v); },       \
            [](const RunConfig& c) { return join(c.MEMBER); }                                   \
    }

using Aliases = std::vector<std::string>;

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        XLEX_STRING("command", Aliases{}, command),
        Field{"mode", {},
              [](RunConfig& c, std::string_view v) { c.training.mode = parse_training_mode(trim(v)); },
              [](const RunConfig& c) { return to_string(c.training.mode); }},
        XLEX_NUMBER("dim", Aliases{}, training.dim),
        XLEX_NUMBER("ws", (Aliases{"window"}), training.window),
        XLEX_NUMBER("minCount", (Aliases{"min-count", "min_count"}), training.min_count),
        XLEX_NUMBER("epoch", (Aliases{"epochs"}), training.epochs),
        XLEX_NUMBER("negatives", (Aliases{"neg"}), training.negatives),
        XLEX_NUMBER("lr", (Aliases{"initial-lr"}), training.initial_lr),
        XLEX_NUMBER("final-lr", Aliases{}, training.final_lr),
        XLEX_NUMBER("noise-alpha", Aliases{}, training.noise_alpha),
        XLEX_NUMBER("subsample", Aliases{}, training.subsample),
        XLEX_NUMBER("nmin", (Aliases{"minn"}), training.nmin),
        XLEX_NUMBER("nmax", (Aliases{"maxn"}), training.nmax),
        XLEX_NUMBER("buckets", (Aliases{"bucket"}), training.buckets),
        XLEX_NUMBER("csls-k", Aliases{}, alignment.csls_k),
        XLEX_NUMBER("vocab-cutoff", Aliases{}, alignment.vocab_cutoff),
        XLEX_NUMBER("init-vocab", Aliases{}, alignment.init_vocab),
        XLEX_NUMBER("max-iterations", Aliases{}, alignment.max_iterations),
        XLEX_NUMBER("convergence-tol", Aliases{}, alignment.convergence_tol),
        XLEX_NUMBER("keep-prob", Aliases{}, alignment.initial_keep_prob),
        XLEX_NUMBER("stagnation-window", Aliases{}, alignment.stagnation_window),
        XLEX_NUMBER("restarts", Aliases{}, alignment.restarts),
        Field{"advanced-mapping", {},
              [](RunConfig& c, std::string_view v) {
                  c.alignment.orthogonal = !parse_bool("advanced-mapping", v);
              },
              [](const RunConfig& c) { return show(!c.alignment.orthogonal); }},
        XLEX_NUMBER("seed", Aliases{}, seed),
        XLEX_NUMBER("threads", Aliases{}, threads),
        XLEX_BOOL("deterministic", Aliases{}, deterministic),
        XLEX_LIST("corpus", Aliases{}, corpus),
        XLEX_STRING("source", Aliases{}, source),
        XLEX_STRING("target", Aliases{}, target),
        XLEX_LIST("embeddings", (Aliases{"embedding"}), embeddings),
        XLEX_LIST("datasets", (Aliases{"dataset"}), datasets),
        XLEX_BOOL("cross-lingual", Aliases{}, cross_lingual),
        XLEX_STRING("gold", Aliases{}, gold),
        XLEX_STRING("seed-dictionary", Aliases{}, seed_dictionary),
        XLEX_STRING("oov-query", Aliases{}, oov_query),
        XLEX_STRING("out", Aliases{}, out),
    };
    return table;
}

#undef XLEX_NUMBER
#undef XLEX_BOOL
#undef XLEX_STRING
#undef XLEX_LIST

const Field* find_field(std::string_view key) {
    for (const auto& f : fields()) {
        if (f.key == key) return &f;
        for (const auto& a : f.aliases) {
            if (a == key) return &f;
        }
    }
    return nullptr;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
    const auto* f = find_field(trim(key));
    if (!f) throw ParameterError("unknown config key: " + std::string(key));
    f->set(*this, value);
}

std::string RunConfig::get(std::string_view key) const {
    const auto* f = find_field(key);
    if (!f) throw ParameterError("unknown config key: " + std::string(key));
    return f->get(*this);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> k;
        for (const auto& f : fields()) k.push_back(f.key);
        return k;
    }();
    return names;
}

std::string config_key_for_flag(std::string_view flag) {
    const auto* f = find_field(flag);
    return f ? f->key : std::string();
}

RunConfig RunConfig::parse(std::istream& in) {
    RunConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw FormatError(line_no, "expected key = value");
        try {
            c.set(trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const ParameterError& e) {
            throw FormatError(line_no, e.what());
        }
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    return parse(in);
}

void RunConfig::save(std::ostream& out) const {
    for (const auto& f : fields()) out << f.key << " = " << f.get(*this) << '\n';
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write config: " + path.string());
    save(out);
}

int RunConfig::resolved_threads() const {
    if (deterministic) return 1;
    if (threads > 0) return threads;
    if (const char* env = std::getenv("XLEX_THREADS")) {
        int v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

TrainingConfig RunConfig::training_config() const {
    TrainingConfig t = training;
    t.seed = seed;
    return t;
}

AlignmentConfig RunConfig::alignment_config() const {
    AlignmentConfig a = alignment;
    a.seed = seed;
    a.threads = resolved_threads();
    return a;
}

}  // namespace xlex
