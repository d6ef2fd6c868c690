#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "storyline/term_dict.hpp"
#include "storyline/tokenize.hpp"
#include "storyline/types.hpp"

using namespace storyline;

TEST_CASE("tokenize matches the frozen reference corpus") {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/tokenize_cases.jsonl");
    REQUIRE(in.good());
    std::string line;
    int cases = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = nlohmann::json::parse(line);
        std::string text = row.at("text").get<std::string>();
        std::vector<std::string> expected =
            row.at("tokens").get<std::vector<std::string>>();
        CAPTURE(text);
        CHECK(tokenize(text) == expected);
        ++cases;
    }
    CHECK(cases >= 140);
}

TEST_CASE("tokenize treats invalid utf-8 bytes as separators") {
    CHECK(tokenize("ab\xFF" "cd") == std::vector<std::string>{"ab", "cd"});
    CHECK(tokenize("\x80\x80x") == std::vector<std::string>{"x"});
    // Truncated two-byte sequence at end of input.
    CHECK(tokenize("caf\xC3") == std::vector<std::string>{"caf"});
    // Continuation byte where a lead byte is expected, mid-word.
    CHECK(tokenize("a\xBFz") == std::vector<std::string>{"a", "z"});
}

TEST_CASE("fold_case lowers without changing structure") {
    CHECK(fold_case("MiXeD 42!") == "mixed 42!");
    CHECK(fold_case("ÄRZTE") == "ärzte");            // ÄRZTE
    CHECK(fold_case("СТРАХ") ==       // СТРАХ
          "страх");
    CHECK(fold_case("ＡＢＣ") == "ａｂｃ");  // ＡＢＣ
    CHECK(fold_case("already lower") == "already lower");
}

TEST_CASE("lower_codepoint spot values") {
    CHECK(lower_codepoint(U'A') == U'a');
    CHECK(lower_codepoint(0x00DE) == 0x00FE);  // Þ -> þ
    CHECK(lower_codepoint(0x00D7) == 0x00D7);  // multiplication sign untouched
    CHECK(lower_codepoint(0x0178) == 0x00FF);  // Ÿ -> ÿ
    CHECK(lower_codepoint(0x0386) == 0x03AC);  // Ά -> ά
    CHECK(lower_codepoint(0x038F) == 0x03CE);  // Ώ -> ώ
    CHECK(lower_codepoint(0x042F) == 0x044F);  // Я -> я
    CHECK(lower_codepoint(0x04C0) == 0x04CF);  // Ӏ -> ӏ (palochka)
    CHECK(lower_codepoint(0x04C1) == 0x04C2);  // Ӂ -> ӂ
    CHECK(lower_codepoint(0x04C2) == 0x04C2);  // ӂ stays
    CHECK(lower_codepoint(0x0531) == 0x0561);  // Ա -> ա
    CHECK(lower_codepoint(0x4E2D) == 0x4E2D);  // caseless CJK
}

TEST_CASE("is_word_codepoint boundaries") {
    CHECK(is_word_codepoint(U'0'));
    CHECK(is_word_codepoint(0x00B5));   // µ
    CHECK(is_word_codepoint(0xAC00));   // 가
    CHECK(is_word_codepoint(0x20000));  // plane-2 CJK
    CHECK_FALSE(is_word_codepoint(U' '));
    CHECK_FALSE(is_word_codepoint(U'-'));
    CHECK_FALSE(is_word_codepoint(0x00D7));
    CHECK_FALSE(is_word_codepoint(0x1F600));  // emoji
}

TEST_CASE("sparse vector from_pairs sums duplicates and drops zeros") {
    auto v = SparseVector::from_pairs({{5, 2.0}, {1, 1.0}, {5, -2.0}, {3, 4.0}, {1, 0.5}});
    REQUIRE(v.nnz() == 2);
    CHECK(v.entries()[0] == SparseVector::Entry{1, 1.5});
    CHECK(v.entries()[1] == SparseVector::Entry{3, 4.0});
}

TEST_CASE("sparse dot agrees with a map-based oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<TermId> id_dist(0, 40);
    std::uniform_real_distribution<double> w_dist(0.1, 3.0);
    for (int it = 0; it < 200; ++it) {
        std::vector<SparseVector::Entry> pa, pb;
        std::unordered_map<TermId, double> ma, mb;
        for (int i = 0; i < 15; ++i) {
            TermId id = id_dist(rng);
            double w = w_dist(rng);
            pa.emplace_back(id, w);
            ma[id] += w;
        }
        for (int i = 0; i < 10; ++i) {
            TermId id = id_dist(rng);
            double w = w_dist(rng);
            pb.emplace_back(id, w);
            mb[id] += w;
        }
        auto va = SparseVector::from_pairs(pa);
        auto vb = SparseVector::from_pairs(pb);
        double expected = 0.0, n2 = 0.0;
        for (const auto& [id, w] : ma) {
            auto it2 = mb.find(id);
            if (it2 != mb.end()) expected += w * it2->second;
            n2 += w * w;
        }
        CHECK(va.dot(vb) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(va.norm() == doctest::Approx(std::sqrt(n2)).epsilon(1e-12));
    }
}

TEST_CASE("normalize leaves zero vectors alone and unit-scales the rest") {
    SparseVector zero;
    zero.normalize();
    CHECK(zero.is_zero());
    auto v = SparseVector::from_pairs({{1, 3.0}, {2, 4.0}});
    v.normalize();
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.entries()[0].second == doctest::Approx(0.6));
    CHECK(v.entries()[1].second == doctest::Approx(0.8));
}

TEST_CASE("add merges sorted supports and reports new ids") {
    auto a = SparseVector::from_pairs({{1, 1.0}, {3, 1.0}});
    auto b = SparseVector::from_pairs({{2, 5.0}, {3, 2.0}, {9, 1.0}});
    std::vector<TermId> fresh;
    a.add(b, &fresh);
    CHECK(fresh == std::vector<TermId>{2, 9});
    REQUIRE(a.nnz() == 4);
    CHECK(a.entries()[0] == SparseVector::Entry{1, 1.0});
    CHECK(a.entries()[1] == SparseVector::Entry{2, 5.0});
    CHECK(a.entries()[2] == SparseVector::Entry{3, 3.0});
    CHECK(a.entries()[3] == SparseVector::Entry{9, 1.0});
}

TEST_CASE("prune_top_k keeps the k heaviest entries in id order") {
    auto v = SparseVector::from_pairs({{1, 0.5}, {2, 3.0}, {3, 1.0}, {4, 2.0}});
    v.prune_top_k(2);
    REQUIRE(v.nnz() == 2);
    CHECK(v.entries()[0] == SparseVector::Entry{2, 3.0});
    CHECK(v.entries()[1] == SparseVector::Entry{4, 2.0});
    v.prune_top_k(0);  // 0 disables pruning
    CHECK(v.nnz() == 2);
}

TEST_CASE("cosine of anything with a zero vector is zero") {
    SparseVector zero;
    auto v = SparseVector::from_pairs({{1, 1.0}});
    CHECK(cosine(v, zero) == 0.0);
    CHECK(cosine(zero, zero) == 0.0);
    CHECK(cosine(v, v) == doctest::Approx(1.0));
    DenseVector dz, dv{1.0, 0.0};
    CHECK(dense_cosine(dv, dz) == 0.0);
    CHECK(dense_cosine(dv, dv) == doctest::Approx(1.0));
}

TEST_CASE("dense helpers resize and accumulate") {
    DenseVector a{1.0};
    dense_add(a, {1.0, 2.0, 3.0});
    CHECK(a == DenseVector{2.0, 2.0, 3.0});
    CHECK(dense_dot(a, {0.0, 1.0}) == doctest::Approx(2.0));
    dense_normalize(a);
    CHECK(dense_norm(a) == doctest::Approx(1.0).epsilon(1e-15));
    DenseVector z;
    dense_normalize(z);  // zero vector untouched
    CHECK(z.empty());
}

TEST_CASE("term dict separates classes and round-trips surfaces") {
    TermDict dict;
    TermId t = dict.intern(FeatureClass::Tokens, "merkel");
    TermId l = dict.intern(FeatureClass::Lemmas, "merkel");
    TermId e = dict.intern(FeatureClass::Entities, "merkel");
    CHECK(t != l);
    CHECK(l != e);
    CHECK(t != e);
    CHECK(dict.intern(FeatureClass::Tokens, "merkel") == t);
    CHECK(dict.term(t) == "merkel");
    CHECK(dict.term(e) == "merkel");
    CHECK(dict.intern(FeatureClass::Tokens, "zika") != t);
}

TEST_CASE("language codes normalize to lowercase") {
    CHECK(Language("EN") == Language("en"));
    CHECK(Language("De").code() == "de");
    CHECK(Language("en") != Language("de"));
    CHECK_THROWS_AS(Language(""), InputError);
}
