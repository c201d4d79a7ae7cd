#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tutor/error.hpp"
#include "tutor/metrics.hpp"

using namespace tutor;

namespace {

const BandTable& bands() {
    static const BandTable t = BandTable::load(testing::assets_dir() / "bands.json");
    return t;
}

SelfConsistencyRound round_with(std::string chosen, double wall_clock) {
    SelfConsistencyRound r;
    r.vote.chosen = std::move(chosen);
    r.vote.cluster_size = 1;
    r.vote.n = 1;
    r.batch.wall_clock_ms = wall_clock;
    r.vote.total_latency_ms = wall_clock + 0.25;
    return r;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("syllable heuristic") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("table") == 2);
    CHECK(count_syllables("readability") == 5);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("make") == 1);
    CHECK(count_syllables("x2") == 1);
    CHECK(count_syllables("42") == 1);
}

TEST_CASE("sentence splitting ignores code") {
    CHECK(split_sentences_excluding_code("Fix the import. Then split your data.").sentences.size() == 2);
    CHECK(split_sentences_excluding_code("Split your data.\n```\nx=1. y=2.\n```\n").sentences.size() == 1);
    CHECK(split_sentences_excluding_code("").sentences.empty());
    const auto open = split_sentences_excluding_code("One. Two.\n```\nstill code. more.");
    CHECK(open.sentences.size() == 2);
    CHECK(open.unbalanced_fence);
}

TEST_CASE("worked examples") {
    CHECK(flesch_reading_ease("The cat sat on the mat.") == doctest::Approx(116.145).epsilon(1e-9));
    CHECK(flesch_reading_ease("I like tea. I like it a lot.") == doctest::Approx(118.175).epsilon(1e-9));
    try {
        flesch_reading_ease("```\nprint(1)\n```");
        FAIL("code-only text scored");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoProse);
    }
}

TEST_CASE("golden corpus matches hand counts") {
    for (const auto& g : oracle::golden_corpus()) {
        INFO(g.text);
        const auto stats = text_stats(g.text);
        CHECK(stats.words == static_cast<std::size_t>(g.words));
        CHECK(stats.sentences == static_cast<std::size_t>(g.sentences));
        CHECK(stats.syllables == static_cast<std::size_t>(g.syllables));
        const double want = oracle::flesch(g.words, g.sentences, g.syllables);
        CHECK(std::abs(flesch_reading_ease(g.text) - want) <= 0.001);
    }
}

TEST_CASE("score moves the right way with each input") {
    // finite differences of the formula in each count
    const TextStats base{5, 60, 90};
    const double f = flesch_reading_ease(base);
    CHECK(flesch_reading_ease(TextStats{5, 60, 91}) < f);
    CHECK(flesch_reading_ease(TextStats{6, 60, 90}) > f);
    CHECK(flesch_reading_ease(TextStats{5, 60, 91}) - f == doctest::Approx(-84.6 / 60));
}

TEST_CASE("code content never changes the score") {
    std::mt19937_64 rng(5);
    const char* snippets[] = {"`x = 1`", "```\nfor i in range(3): print(i). done.\n```",
                              "`df.head()`", "```python\nmodel.fit(X, y)\n```"};
    const std::string prose = "Load the data first. Then fit a simple model and check the error.";
    const double base = flesch_reading_ease(prose);
    for (int trial = 0; trial < 50; ++trial) {
        std::string text = "Load the data first.";
        text += ' ';
        text += snippets[rng() % 4];
        text += " Then fit a simple model and check the error. ";
        text += snippets[rng() % 4];
        REQUIRE(flesch_reading_ease(text) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("band table") {
    CHECK(bands().interpret(47) == "university");
    CHECK(bands().interpret(48.9) == "university");
    CHECK(bands().interpret(45) == "university");
    CHECK(bands().interpret(50) == "university");
    CHECK(bands().interpret(95) == "very easy");
    CHECK(bands().interpret(116.145) == "very easy");
    CHECK(bands().interpret(65) == "standard");
    CHECK(bands().interpret(-20) == "extremely difficult");
    CHECK(bands().interpret(44.99) == "difficult");
}

TEST_CASE("measure") {
    std::string fixture;
    for (int i = 1; i <= 12; ++i) fixture += "Sentence number " + std::to_string(i) + " is here. ";
    fixture += "\n```\nx = 1. y = 2.\n```\n";
    fixture += "```\nz = 3.\n```\n";
    const auto r = measure(round_with(fixture, 500.0), Condition::BelowAverage, "task-1");
    CHECK(r.specificity_sentences == 12);
    CHECK(r.response_time_ms >= 500.0);
    CHECK(r.fkrs.has_value());
    const auto again = measure(round_with(fixture, 500.0), Condition::BelowAverage, "task-1");
    CHECK(*again.fkrs == *r.fkrs);

    const auto code_only = measure(round_with("```\nx\n```", 10), Condition::General, "t");
    CHECK_FALSE(code_only.fkrs.has_value());
    CHECK(code_only.warnings == std::vector<std::string>{"NoProse"});

    const auto open = measure(round_with("Fine. ```\nunclosed", 10), Condition::General, "t");
    CHECK(std::find(open.warnings.begin(), open.warnings.end(), "UnbalancedFence") != open.warnings.end());
}

}  // TEST_SUITE
