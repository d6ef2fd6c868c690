#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "storyline/annotator.hpp"
#include "storyline/embeddings.hpp"
#include "storyline/featurizer.hpp"
#include "storyline/idf.hpp"
#include "storyline/types.hpp"

using namespace storyline;

namespace {

Document make_doc(const std::string& id, const std::string& lang, const std::string& title,
                  const std::string& body, double ts = 0.0) {
    Document d;
    d.id = id;
    d.language = Language(lang);
    d.title = title;
    d.body = body;
    d.timestamp = ts;
    return d;
}

const std::vector<Document>& tiny_corpus() {
    // Document frequencies over title+body unions: alpha 3, gamma 2, beta 1,
    // delta 1, kappa 1.
    static const std::vector<Document> corpus = {
        make_doc("c1", "en", "alpha beta", "alpha gamma"),
        make_doc("c2", "en", "alpha", "gamma"),
        make_doc("c3", "en", "delta", "alpha kappa"),
    };
    return corpus;
}

}  // namespace

TEST_CASE("document frequencies turn into smoothed idf values") {
    IdentityAnnotator ann;
    IdfTable idf = build_idf(tiny_corpus(), Language("en"), ann);
    CHECK(idf.doc_count(Language("en")) == 3);
    // ln((1+N)/(1+df)) + 1 with N=3.
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "alpha") == 1.0);
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "gamma") ==
          doctest::Approx(1.2876820724517808).epsilon(1e-15));
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "beta") ==
          doctest::Approx(1.6931471805599454).epsilon(1e-15));
    // Unseen terms take the df=0 value.
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "nosuch") ==
          doctest::Approx(2.386294361119891).epsilon(1e-15));
    // Identity annotation copies tokens into lemmas, so the lemma table
    // carries the same frequencies.
    CHECK(idf.idf(Language("en"), FeatureClass::Lemmas, "beta") ==
          doctest::Approx(1.6931471805599454).epsilon(1e-15));
}

TEST_CASE("document frequency counts each document once per term") {
    // "alpha" twice inside one document must count as df=1.
    IdentityAnnotator ann;
    std::vector<Document> corpus = {make_doc("r1", "en", "alpha alpha", "alpha"),
                                    make_doc("r2", "en", "beta", "beta beta")};
    IdfTable idf = build_idf(corpus, Language("en"), ann);
    // df=1, N=2: ln(3/2)+1.
    double expected = std::log(1.5) + 1.0;
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "alpha") ==
          doctest::Approx(expected).epsilon(1e-15));
    CHECK(idf.idf(Language("en"), FeatureClass::Tokens, "beta") ==
          doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("idf table round-trips through its text format bit-exactly") {
    IdentityAnnotator ann;
    IdfTable idf = build_idf_all(
        {make_doc("c1", "en", "alpha beta", "gamma"), make_doc("d1", "de", "zug", "wald zug")},
        ann);
    std::stringstream buf;
    idf.save(buf);
    IdfTable back = IdfTable::load(buf);
    for (const auto& lang : idf.languages()) {
        CHECK(back.doc_count(lang) == idf.doc_count(lang));
    }
    for (const char* term : {"alpha", "beta", "gamma"}) {
        CHECK(back.idf(Language("en"), FeatureClass::Tokens, term) ==
              idf.idf(Language("en"), FeatureClass::Tokens, term));
    }
    CHECK(back.idf(Language("de"), FeatureClass::Tokens, "zug") ==
          idf.idf(Language("de"), FeatureClass::Tokens, "zug"));
    CHECK(back.term_count() == idf.term_count());
}

TEST_CASE("embedding table parses the header and keeps the first duplicate") {
    std::stringstream in(
        "3 2\n"
        "alpha 1.0 0.0\n"
        "Alpha 9.0 9.0\n"
        "beta 0.0 1.0\n");
    EmbeddingTable table = EmbeddingTable::load(in);
    CHECK(table.dim() == 2);
    CHECK(table.size() == 2);  // "Alpha" folds onto "alpha", first row wins
    auto v = table.lookup("ALPHA");
    REQUIRE(v.has_value());
    CHECK((*v)[0] == 1.0);
    CHECK((*v)[1] == 0.0);
    CHECK_FALSE(table.lookup("missing").has_value());
}

TEST_CASE("embedding table works without a header line") {
    std::stringstream in(
        "alpha 1.0 0.0 0.0\n"
        "beta 0.0 1.0 0.0\n");
    EmbeddingTable table = EmbeddingTable::load(in);
    CHECK(table.dim() == 3);
    CHECK(table.size() == 2);
}

TEST_CASE("embedding table rejects inconsistent rows") {
    std::stringstream short_row(
        "alpha 1.0 0.0\n"
        "beta 1.0\n");
    CHECK_THROWS_AS(EmbeddingTable::load(short_row), InputError);
    std::stringstream bad_number("alpha 1.0 zzz\n");
    CHECK_THROWS_AS(EmbeddingTable::load(bad_number), InputError);
    std::stringstream empty("");
    CHECK_THROWS_AS(EmbeddingTable::load(empty), InputError);
}

TEST_CASE("identity annotator lowercases tokens and emits no entities") {
    IdentityAnnotator ann;
    Annotation a = ann.annotate("Merkel visits Berlin!");
    CHECK(a.tokens == std::vector<std::string>{"merkel", "visits", "berlin"});
    CHECK(a.lemmas == a.tokens);
    CHECK(a.entities.empty());
}

TEST_CASE("external command annotator round-trips through a subprocess") {
    // The command receives the raw text on stdin and answers with a JSON
    // object; entity surfaces are taken verbatim, tokens and lemmas folded.
    std::string cmd =
        "python3 -c 'import sys,json; t=sys.stdin.read().split(); "
        "print(json.dumps({\"tokens\": t, \"lemmas\": [w[:3] for w in t], "
        "\"entities\": [\"Berlin Wall\"]}))'";
    ExternalCommandAnnotator ann(cmd);
    Annotation a = ann.annotate("Tear DOWN this");
    CHECK(a.tokens == std::vector<std::string>{"tear", "down", "this"});
    CHECK(a.lemmas == std::vector<std::string>{"tea", "dow", "thi"});
    CHECK(a.entities == std::vector<std::string>{"Berlin Wall"});
}

TEST_CASE("external command annotator surfaces subprocess failures") {
    ExternalCommandAnnotator broken("false");
    CHECK_THROWS_AS(broken.annotate("text"), InputError);
    ExternalCommandAnnotator garbage("echo not-json");
    CHECK_THROWS_AS(garbage.annotate("text"), InputError);
}

TEST_CASE("annotator factory") {
    CHECK(make_annotator("none") != nullptr);
    CHECK(make_annotator("") != nullptr);
    CHECK(make_annotator("external-command:cat") != nullptr);
    CHECK_THROWS_AS(make_annotator("external-command"), ConfigError);
    CHECK_THROWS_AS(make_annotator("neural-magic"), ConfigError);
}

TEST_CASE("representation builds weighted normalized subvectors per section") {
    IdfTable idf;
    Language en("en");
    idf.set_doc_count(en, 4);
    for (FeatureClass cls : {FeatureClass::Tokens, FeatureClass::Lemmas}) {
        idf.set_idf(en, cls, "alpha", 1.0);
        idf.set_idf(en, cls, "beta", 2.0);
        idf.set_idf(en, cls, "gamma", 1.5);
    }
    std::stringstream emb_in(
        "alpha 1.0 0.0\n"
        "beta 0.0 1.0\n");
    EmbeddingTable emb = EmbeddingTable::load(emb_in);
    IdentityAnnotator ann;
    TermDict dict;
    Featurizer fz(idf, &emb, ann, dict);

    Document d = make_doc("x", "en", "Alpha beta", "alpha gamma", 10.0);
    DocRepresentation rep = fz.represent(d);
    CHECK(rep.timestamp == 10.0);

    // tokens/both: alpha tf=2 idf=1 -> 2; beta 1*2 -> 2; gamma 1*1.5 -> 1.5.
    const auto& both = rep.mono[mono_subvector_index(FeatureClass::Tokens, Section::Both)];
    REQUIRE(both.nnz() == 3);
    double n = std::sqrt(4.0 + 4.0 + 2.25);
    TermId alpha_id = dict.intern(FeatureClass::Tokens, "alpha");
    TermId beta_id = dict.intern(FeatureClass::Tokens, "beta");
    TermId gamma_id = dict.intern(FeatureClass::Tokens, "gamma");
    for (const auto& [id, w] : both.entries()) {
        if (id == alpha_id) CHECK(w == doctest::Approx(2.0 / n).epsilon(1e-15));
        if (id == beta_id) CHECK(w == doctest::Approx(2.0 / n).epsilon(1e-15));
        if (id == gamma_id) CHECK(w == doctest::Approx(1.5 / n).epsilon(1e-15));
    }
    CHECK(both.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // tokens/title has only the title terms.
    const auto& title = rep.mono[mono_subvector_index(FeatureClass::Tokens, Section::Title)];
    CHECK(title.nnz() == 2);
    const auto& body = rep.mono[mono_subvector_index(FeatureClass::Tokens, Section::Body)];
    CHECK(body.nnz() == 2);

    // No entities -> entity subvectors stay zero.
    CHECK(rep.mono[mono_subvector_index(FeatureClass::Entities, Section::Both)].is_zero());

    // Lemma subvectors mirror tokens under the identity annotator but use
    // distinct term ids.
    const auto& lboth = rep.mono[mono_subvector_index(FeatureClass::Lemmas, Section::Both)];
    CHECK(lboth.nnz() == 3);
    CHECK(lboth.entries()[0].first != both.entries()[0].first);

    // Dense both-section: 2*(1,0) + 2*(0,1) = (2,2), normalized. gamma is
    // out of the embedding vocabulary and contributes nothing.
    const auto& dense_both = rep.cross[cross_subvector_index(Section::Both)];
    REQUIRE(dense_both.size() == 2);
    CHECK(dense_both[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(dense_both[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    // Dense body-section: only alpha is in vocabulary -> unit (1,0).
    const auto& dense_body = rep.cross[cross_subvector_index(Section::Body)];
    REQUIRE(dense_body.size() == 2);
    CHECK(dense_body[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dense_body[1] == doctest::Approx(0.0));
}

TEST_CASE("representation without embeddings leaves dense subvectors empty") {
    IdfTable idf;
    Language en("en");
    idf.set_doc_count(en, 1);
    idf.set_idf(en, FeatureClass::Tokens, "alpha", 1.0);
    IdentityAnnotator ann;
    TermDict dict;
    Featurizer fz(idf, nullptr, ann, dict);
    DocRepresentation rep = fz.represent(make_doc("x", "en", "alpha", ""));
    for (const auto& v : rep.cross) CHECK(v.empty());
    CHECK_FALSE(rep.mono[kPrimarySubvector].is_zero());
    // Empty body -> zero body subvector.
    CHECK(rep.mono[mono_subvector_index(FeatureClass::Tokens, Section::Body)].is_zero());
}

TEST_CASE("representation requires idf statistics for the document language") {
    IdfTable idf;
    idf.set_doc_count(Language("en"), 1);
    IdentityAnnotator ann;
    TermDict dict;
    Featurizer fz(idf, nullptr, ann, dict);
    CHECK_THROWS_AS(fz.represent(make_doc("x", "fr", "bonjour", "monde")), InputError);
}
