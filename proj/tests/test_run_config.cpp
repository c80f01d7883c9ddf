#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "xlex/error.hpp"
#include "xlex/run_config.hpp"

using namespace xlex;

TEST_CASE("published parameter names and aliases") {
    RunConfig c;
    CHECK(c.get("dim") == "300");
    CHECK(c.get("ws") == "4");
    CHECK(c.get("minCount") == "1");
    CHECK(c.get("epoch") == "100");
    c.set("window", "7");
    c.set("min-count", "3");
    c.set("epochs", "9");
    CHECK(c.training.window == 7);
    CHECK(c.training.min_count == 3);
    CHECK(c.training.epochs == 9);
    CHECK(config_key_for_flag("window") == "ws");
    CHECK(config_key_for_flag("nope").empty());
    CHECK_THROWS_AS(c.set("nope", "1"), ParameterError);
    CHECK_THROWS_AS(c.set("dim", "ten"), ParameterError);
    CHECK_THROWS_AS(c.set("deterministic", "maybe"), ParameterError);
}

TEST_CASE("parse and save round trip") {
    std::istringstream in(
        "# published settings\n"
        "mode = subword-skipgram\n"
        "dim = 50\n"
        "\n"
        "corpus = a.txt, b.txt.gz\n"
        "advanced-mapping = true\n"
        "convergence-tol = 1e-05\n");
    const auto c = RunConfig::parse(in);
    CHECK(c.training.mode == TrainingMode::subword_skipgram);
    CHECK(c.training.dim == 50);
    CHECK(c.corpus == std::vector<std::string>{"a.txt", "b.txt.gz"});
    CHECK_FALSE(c.alignment.orthogonal);
    std::stringstream out;
    c.save(out);
    const auto back = RunConfig::parse(out);
    std::stringstream again;
    back.save(again);
    CHECK(out.str() == again.str());
    for (const auto& key : RunConfig::keys()) CHECK(back.get(key) == c.get(key));
}

TEST_CASE("config errors name the line") {
    std::istringstream missing_eq("dim = 5\nepoch 3\n");
    try {
        RunConfig::parse(missing_eq);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream bad_value("dim = 5\n\nws = -\n");
    try {
        RunConfig::parse(bad_value);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("thread resolution") {
    RunConfig c;
    c.threads = 3;
    CHECK(c.resolved_threads() == 3);
    c.deterministic = true;
    CHECK(c.resolved_threads() == 1);
    c.deterministic = false;
    c.threads = 0;
    setenv("XLEX_THREADS", "5", 1);
    CHECK(c.resolved_threads() == 5);
    unsetenv("XLEX_THREADS");
    CHECK(c.resolved_threads() >= 1);
    c.seed = 99;
    CHECK(c.training_config().seed == 99);
    CHECK(c.alignment_config().seed == 99);
}
