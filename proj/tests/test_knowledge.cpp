#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "tutor/error.hpp"
#include "tutor/knowledge_base.hpp"

using namespace tutor;

namespace {

KnowledgeSnippet snip(std::string id, std::set<std::string> tags, std::set<std::string> ilos) {
    return {std::move(id), "C315", std::move(ilos), std::move(tags), "body"};
}

std::set<std::string> random_subset(std::mt19937_64& rng, const std::vector<std::string>& pool,
                                    std::size_t max_size) {
    std::uniform_int_distribution<std::size_t> count(0, max_size);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::set<std::string> out;
    for (std::size_t i = count(rng); i > 0; --i) out.insert(pool[pick(rng)]);
    return out;
}

}  // namespace

TEST_SUITE("knowledge") {

TEST_CASE("score examples") {
    RetrievalQuery q{{"split", "data"}, {"ILO2"}};
    CHECK(score(snip("a", {"split", "data"}, {"ILO2"}), q) == doctest::Approx(1.0));
    CHECK(score(snip("b", {"plot"}, {"ILO9"}), q) == doctest::Approx(0.0));
    RetrievalQuery q3{{"split", "data", "model"}, {"ILO2"}};
    CHECK(score(snip("c", {"split", "data"}, {"ILO2"}), q3) ==
          doctest::Approx(0.7 * (2.0 / 3.0) + 0.3).epsilon(1e-12));
}

TEST_CASE("index by tag and ILO") {
    KnowledgeBase kb;
    kb.add_snippet(snip("s1", {"regression", "validation"}, {"ILO2"}));
    CHECK(kb.ids_for_tag("regression") == std::set<std::string>{"s1"});
    CHECK(kb.ids_for_tag("validation") == std::set<std::string>{"s1"});
    CHECK(kb.ids_for_ilo("ILO2") == std::set<std::string>{"s1"});
    const auto r = kb.retrieve({{"validation"}, {}, SkillTier::Average, 3});
    REQUIRE(r.size() == 1);
    CHECK(r[0].snippet.snippet_id == "s1");
}

TEST_CASE("tags are case-normalized") {
    KnowledgeBase kb;
    kb.add_snippet(snip("s1", {"Regression"}, {"ILO2"}));
    CHECK(kb.ids_for_tag("regression") == std::set<std::string>{"s1"});
}

TEST_CASE("snippet validation") {
    KnowledgeBase kb;
    kb.add_snippet(snip("s1", {"a"}, {"ILO1"}));
    CHECK_THROWS_AS(kb.add_snippet(snip("s1", {"b"}, {"ILO2"})), Error);
    try {
        kb.add_snippet(snip("s1", {"b"}, {"ILO2"}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateSnippet);
    }
    try {
        kb.add_snippet(snip("s2", {"b"}, {}));
        FAIL("empty ILOs accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSnippet);
    }
    try {
        auto big = snip("s3", {"b"}, {"ILO1"});
        big.body.assign(kMaxSnippetBody + 1, 'x');
        kb.add_snippet(big);
        FAIL("oversized body accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSnippet);
    }
    CHECK(kb.size() == 1);
}

TEST_CASE("retrieve top k, ties by id, zeros dropped") {
    KnowledgeBase kb;
    kb.add_snippet(snip("e", {"a", "b", "c", "d"}, {"X"}));
    kb.add_snippet(snip("d", {"a"}, {"X"}));
    kb.add_snippet(snip("c", {"a", "b"}, {"X"}));
    kb.add_snippet(snip("b", {"a", "b", "c"}, {"X"}));
    kb.add_snippet(snip("a", {"zzz"}, {"X"}));
    const RetrievalQuery q{{"a", "b", "c"}, {}, SkillTier::Average, 3};
    const auto r = kb.retrieve(q);
    REQUIRE(r.size() == 3);
    CHECK(r[0].snippet.snippet_id == "b");
    CHECK(r[1].snippet.snippet_id == "e");
    CHECK(r[2].snippet.snippet_id == "c");

    KnowledgeBase tied;
    tied.add_snippet(snip("y", {"a"}, {"X"}));
    tied.add_snippet(snip("x", {"a"}, {"X"}));
    const auto t = tied.retrieve({{"a"}, {}, SkillTier::Average, 3});
    REQUIRE(t.size() == 2);
    CHECK(t[0].snippet.snippet_id == "x");

    CHECK(kb.retrieve({{"nothing"}, {"nowhere"}, SkillTier::Average, 3}).empty());
}

TEST_CASE("retrieve agrees with brute force on randomized stores") {
    std::mt19937_64 rng(20240601);
    std::vector<std::string> tags, ilos;
    for (int i = 0; i < 12; ++i) tags.push_back("tag" + std::to_string(i));
    for (int i = 0; i < 6; ++i) ilos.push_back("ILO" + std::to_string(i));
    for (int store = 0; store < 50; ++store) {
        KnowledgeBase kb;
        std::vector<KnowledgeSnippet> all;
        const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 100)(rng);
        for (std::size_t i = 0; i < n; ++i) {
            auto ilo = random_subset(rng, ilos, 3);
            if (ilo.empty()) ilo.insert(ilos[0]);
            auto s = snip("s" + std::to_string(rng() % 100000), random_subset(rng, tags, 5), ilo);
            if (kb.contains(s.snippet_id)) continue;
            kb.add_snippet(s);
            all.push_back(s);
        }
        for (int query = 0; query < 10; ++query) {
            RetrievalQuery q{random_subset(rng, tags, 4), random_subset(rng, ilos, 2),
                             SkillTier::Average, std::uniform_int_distribution<std::size_t>(0, 8)(rng)};
            const auto expected = oracle::retrieve(all, q);
            const auto got = kb.retrieve(q);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                REQUIRE(got[i].snippet.snippet_id == expected[i].id);
                REQUIRE(got[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("shipped knowledge file loads") {
    KnowledgeBase kb;
    const auto n = load_snippets_file(kb, (testing::assets_dir() / "knowledge.jsonl").string());
    CHECK(n == kb.size());
    CHECK(n >= 5);
}

}  // TEST_SUITE
