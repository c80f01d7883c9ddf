#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "xlex/corpus.hpp"
#include "xlex/error.hpp"
#include "xlex/subword.hpp"

using namespace xlex;
using namespace xlex::testing;

using Grams = std::vector<std::string>;

TEST_CASE("n-gram extraction") {
    CHECK(extract_ngrams("abc", 3, 3) == Grams{"<ab", "abc", "bc>"});
    CHECK(extract_ngrams("ab", 3, 6) == Grams{"<ab", "ab>"});
    CHECK(extract_ngrams("ab", 5, 6).empty());
    CHECK(extract_ngrams("ab", 1, 2) == Grams{"<", "<a", "a", "ab", "b", "b>", ">"});
    // Multi-byte scalars count as one character.
    CHECK(extract_ngrams("\xC5\xA1" "a", 3, 3) == Grams{"<\xC5\xA1" "a", "\xC5\xA1" "a>"});
    CHECK_THROWS_AS(extract_ngrams("", 3, 6), ParameterError);
    CHECK_THROWS_AS(extract_ngrams("ab\xFF", 3, 6), DecodeError);
}

TEST_CASE("closed-form n-gram count matches enumeration") {
    for (int nmin = 1; nmin <= 6; ++nmin) {
        for (int nmax = nmin; nmax <= 8; ++nmax) {
            for (std::size_t len = 1; len <= 20; ++len) {
                const std::string word(len, 'x');
                CHECK(ngram_count(len + 2, nmin, nmax) == extract_ngrams(word, nmin, nmax).size());
            }
        }
    }
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a32("") == 0x811c9dc5u);
    CHECK(fnv1a32("a") == 0xe40c292cu);
    CHECK(fnv1a32("foobar") == 0xbf9cf968u);
    CHECK(hash_ngram("<ab", 1) == 0);
    CHECK(hash_ngram("<ab", 1000) == hash_ngram("<ab", 1000));
}

TEST_CASE("hashing spreads 3-grams evenly") {
    std::vector<std::string> grams;
    for (char a = 'a'; a <= 'z'; ++a)
        for (char b = 'a'; b <= 'z'; ++b)
            for (char c = 'a'; c <= 'z'; ++c) grams.push_back({a, b, c});
    std::mt19937_64 rng(99);
    std::shuffle(grams.begin(), grams.end(), rng);
    grams.resize(10000);
    std::vector<double> counts(100);
    for (const auto& g : grams) counts[static_cast<std::size_t>(hash_ngram(g, 100))] += 1;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
    // 99 degrees of freedom, 0.999 quantile.
    CHECK(chi2 < 148.23);
}

TEST_CASE("index units: whole word first, then buckets") {
    auto vocab = std::make_shared<const Vocabulary>(std::vector<std::string>{"abc", "xy"});
    const NgramIndex index(vocab, 3, 3, 50);
    const auto u = index.units(0);
    REQUIRE(u.size() == 4);
    CHECK(u[0] == 0);
    CHECK(u[1] == 2 + hash_ngram("<ab", 50));
    CHECK(u[3] == 2 + hash_ngram("bc>", 50));
    CHECK(index.rows() == 52);
    const auto oov = index.units_for("abd");
    REQUIRE(oov.size() == 3);
    CHECK(oov[0] == 2 + hash_ngram("<ab", 50));
    // "<q>" is three scalars: its only 3-gram is the excluded whole form.
    CHECK(index.units_for("q").empty());
}

TEST_CASE("word vectors compose by averaging") {
    auto vocab = std::make_shared<const Vocabulary>(std::vector<std::string>{"abc"});
    const NgramIndex index(vocab, 3, 3, 7);
    Vector v(3);
    v << 1, -2, 0.5;
    Matrix same(8, 3);
    for (int r = 0; r < 8; ++r) same.row(r) = v.transpose();
    CHECK((word_vector("abc", index, same) - v).norm() < 1e-12);

    // nmin above the bracketed length: the whole-word row is the only unit.
    const NgramIndex whole_only(vocab, 6, 6, 7);
    Matrix rows = Matrix::Zero(8, 3);
    rows.row(0) = v.transpose();
    CHECK((word_vector("abc", whole_only, rows) - v).norm() < 1e-12);
    CHECK_THROWS_AS(word_vector("zz", whole_only, rows), RepresentationUnavailableError);
}

TEST_CASE("an OOV word sharing all n-grams lands next to the trained word") {
    // "aaaaaaa" has n-grams <aa, aaa x5, aa>; the OOV "aaaaaa" has the same set
    // with aaa x4. The whole-word row is scaled down to be negligible.
    auto vocab = std::make_shared<const Vocabulary>(std::vector<std::string>{"aaaaaaa"});
    const NgramIndex index(vocab, 3, 3, 1000);
    std::mt19937_64 rng(4);
    Matrix units = gaussian(1001, 64, rng);
    units.row(0) *= 1e-6;
    const Vector trained = word_vector("aaaaaaa", index, units);
    const Vector oov = word_vector("aaaaaa", index, units);
    CHECK(cosine(trained, oov) > 0.99);
}

TEST_CASE("composed gradients match central differences") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_units = 1 + static_cast<int>(rng() % 6);
        std::vector<Vector> units;
        for (int u = 0; u < n_units; ++u) units.push_back(random_vector(8, rng));
        Vector context = random_vector(8, rng);
        std::vector<Vector> negatives{random_vector(8, rng), random_vector(8, rng), random_vector(8, rng)};
        auto f = [&] {
            Vector h = Vector::Zero(8);
            for (const auto& u : units) h += u;
            h /= static_cast<double>(units.size());
            return reference_loss(h, context, negatives);
        };
        const auto cl = composed_pair_loss(units, context, negatives);
        CHECK(cl.loss == doctest::Approx(f()).epsilon(1e-12));
        for (std::size_t u = 0; u < units.size(); ++u) {
            CHECK(relative_error(cl.grad_units[u], numeric_gradient(units[u], f)) < 1e-4);
        }
        CHECK(relative_error(cl.grad_context, numeric_gradient(context, f)) < 1e-4);
        for (std::size_t k = 0; k < negatives.size(); ++k) {
            CHECK(relative_error(cl.grad_negatives[k], numeric_gradient(negatives[k], f)) < 1e-4);
        }
    }
}

namespace {

// Sentences "<pool word> <target> <pool word>" with a private context pool per
// target word.
std::string disjoint_context_corpus(const std::vector<std::pair<std::string, std::string>>& targets,
                                    int sentences_per_target, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string text;
    for (int s = 0; s < sentences_per_target; ++s) {
        for (const auto& [word, pool] : targets) {
            auto ctx = [&] { return pool + std::string(1, static_cast<char>('a' + rng() % 8)); };
            text += ctx() + " " + word + " " + ctx() + "\n";
        }
    }
    return text;
}

TrainingConfig subword_config() {
    TrainingConfig c;
    c.mode = TrainingMode::subword_skipgram;
    c.dim = 24;
    c.epochs = 5;
    c.window = 2;
    c.buckets = 20000;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("shared stems pull words together") {
    const auto text = disjoint_context_corpus(
        {{"rekisetsa", "qq"}, {"rekisitse", "ww"}, {"bopelong", "zz"}}, 1500, 12);
    const auto corpus = RawCorpus::from_text(text);
    const auto vocab = build_vocabulary(corpus, 1);
    const auto stream = encode(corpus, vocab);
    const auto m = train_subword(stream, vocab, subword_config());
    const double related = cosine(m.vector("rekisetsa"), m.vector("rekisitse"));
    const double control = cosine(m.vector("rekisetsa"), m.vector("bopelong"));
    CHECK(related > control);
}

TEST_CASE("subword training is reproducible and composes OOV words") {
    const auto text = disjoint_context_corpus({{"tsamaya", "aa"}, {"tsamayang", "bb"}}, 300, 5);
    const auto corpus = RawCorpus::from_text(text);
    const auto vocab = build_vocabulary(corpus, 1);
    const auto stream = encode(corpus, vocab);
    const auto config = subword_config();
    const auto a = train_subword_model(stream, vocab, config);
    const auto b = train_subword_model(stream, vocab, config);
    CHECK(a.units() == b.units());
    const Vector oov = a.word_vector("tsamayile");
    CHECK(oov.allFinite());
    CHECK(cosine(oov, a.word_vector("tsamaya")) > cosine(oov, a.word_vector("bbc")));
}
