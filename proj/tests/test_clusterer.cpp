#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "storyline/clusterer.hpp"
#include "storyline/pipeline.hpp"

using namespace storyline;
using testutil::doc;
using testutil::rep;

namespace {

ClustererConfig sum_domino(double tau) {
    ClustererConfig cfg;
    cfg.merge_policy = MergePolicy::Threshold;
    cfg.tau = tau;
    cfg.g_update = GUpdateMode::Domino;
    cfg.cross.mode = CrossMode::Sum;
    return cfg;
}

// Checks the structural invariants of a clustering state: every monolingual
// cluster has a crosslingual home, each home lists at most one cluster per
// language, and home membership matches the cluster-side back pointers.
void check_invariants(const ClusteringState& state) {
    std::size_t mono_total = 0, cross_total = 0;
    for (const auto& lang : state.languages()) {
        for (const auto& c : state.clusters(lang)) {
            ++mono_total;
            REQUIRE(c.cross_id != 0);
            const auto& home = state.cross_clusters().at(c.cross_id);
            REQUIRE(home.members.at(c.language) == c.id);
        }
    }
    for (const auto& [id, x] : state.cross_clusters()) {
        REQUIRE_FALSE(x.members.empty());
        for (const auto& [lang, mono_id] : x.members) {
            ++cross_total;
            REQUIRE(state.get({lang, mono_id}).cross_id == id);
        }
    }
    REQUIRE(mono_total == cross_total);
}

}  // namespace

TEST_CASE("merge decision: threshold is strict, classifier needs a model") {
    ClustererConfig cfg = sum_domino(2.0);
    std::array<double, kMonoFeatures> maxima{};
    CHECK(merge_decision(2.1, maxima, cfg, nullptr, 2.0));
    CHECK_FALSE(merge_decision(2.0, maxima, cfg, nullptr, 2.0));

    cfg.merge_policy = MergePolicy::Classifier;
    CHECK_THROWS_AS(merge_decision(9.9, maxima, cfg, nullptr, 2.0), ConfigError);
    MergeModel m;
    m.weights[0] = 1.0;
    m.bias = -0.5;
    maxima[0] = 0.6;
    CHECK(merge_decision(0.0, maxima, cfg, &m, 2.0));
    maxima[0] = 0.4;
    CHECK_FALSE(merge_decision(0.0, maxima, cfg, &m, 2.0));
}

TEST_CASE("best candidate breaks score ties toward the older cluster") {
    std::vector<CandidateScore> cs(3);
    cs[0].id = 4;
    cs[0].score = 1.0;
    cs[1].id = 2;
    cs[1].score = 1.0;
    cs[2].id = 9;
    cs[2].score = 0.5;
    auto best = best_candidate(cs);
    REQUIRE(best.has_value());
    CHECK(best->id == 2);
    CHECK(best_candidate({}) == std::nullopt);
}

TEST_CASE("feature maxima are per-coordinate over the pool") {
    std::vector<CandidateScore> cs(2);
    cs[0].features[0] = 0.9;
    cs[0].features[11] = 0.2;
    cs[1].features[0] = 0.1;
    cs[1].features[11] = 0.7;
    auto maxima = feature_maxima(cs);
    CHECK(maxima[0] == 0.9);
    CHECK(maxima[11] == 0.7);
    CHECK(maxima[5] == 0.0);
}

TEST_CASE("threshold join semantics on an exact-score stream") {
    // Single-term vectors give exactly cos 1 and recency 1, so the score of
    // a duplicate document against its own cluster is exactly 4.
    ModelSet models;
    ClusteringState s1;
    auto r1 = ingest(s1, doc("a", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, sum_domino(3.999));
    auto r2 = ingest(s1, doc("b", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, sum_domino(3.999));
    CHECK(r2.trace.best_score == 4.0);
    CHECK(r2.trace.joined);
    CHECK(r2.mono.id == r1.mono.id);

    ClusteringState s2;
    ingest(s2, doc("a", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, sum_domino(4.0));
    auto r3 = ingest(s2, doc("b", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, sum_domino(4.0));
    CHECK_FALSE(r3.trace.joined);  // best == tau stays out
    CHECK(r3.mono.id == 2);
}

TEST_CASE("per-language tau overrides") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(4.0);
    cfg.tau_overrides[Language("de")] = 3.0;
    ClusteringState s;
    ingest(s, doc("e1", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, cfg);
    auto re = ingest(s, doc("e2", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, cfg);
    CHECK_FALSE(re.trace.joined);  // en uses the base tau of 4
    ingest(s, doc("d1", "de", 0.0), rep({{2, 1.0}}, {}, 0.0), models, cfg);
    auto rd = ingest(s, doc("d2", "de", 0.0), rep({{2, 1.0}}, {}, 0.0), models, cfg);
    CHECK(rd.trace.joined);  // de threshold is 3 < 4
}

TEST_CASE("candidate index agrees with the full scan on sparse-only models") {
    ModelSet models;
    SimilarityModel sparse_only = SimilarityModel::primary_only();
    models.rankers[Language("en")] = sparse_only;

    ClusteringState state;
    ClustererConfig cfg = sum_domino(1e9);
    cfg.use_candidate_index = true;
    ModelSet builder;  // all-ones; used only to seed clusters
    ingest(state, doc("a", "en", 0.0), rep({{1, 1.0}, {2, 1.0}}, {}, 0.0), builder, cfg);
    ingest(state, doc("b", "en", 0.0), rep({{2, 1.0}, {3, 1.0}}, {}, 0.0), builder, cfg);
    ingest(state, doc("c", "en", 0.0), rep({{7, 1.0}}, {}, 0.0), builder, cfg);
    ingest(state, doc("d", "en", 0.0), rep({{8, 1.0}, {9, 1.0}}, {}, 0.0), builder, cfg);

    DocRepresentation probe = rep({{2, 1.0}, {9, 1.0}}, {}, 0.0);
    auto full = score_candidates(state, probe, Language("en"), sparse_only, false);
    auto indexed = score_candidates(state, probe, Language("en"), sparse_only, true);
    auto bf = best_candidate(full);
    auto bi = best_candidate(indexed);
    REQUIRE(bf.has_value());
    REQUIRE(bi.has_value());
    CHECK(bf->id == bi->id);
    CHECK(bf->score == bi->score);
    // Every shortlisted score matches its full-scan counterpart exactly.
    for (const auto& ci : indexed) {
        bool found = false;
        for (const auto& cf : full) {
            if (cf.id == ci.id) {
                CHECK(cf.score == ci.score);
                found = true;
            }
        }
        CHECK(found);
    }

    // A probe sharing no terms falls back to the full scan.
    DocRepresentation stranger = rep({{99, 1.0}}, {}, 0.0);
    auto fallback = score_candidates(state, stranger, Language("en"), sparse_only, true);
    CHECK(fallback.size() == full.size());
}

TEST_CASE("crosslingual placement: empty space, free slot, single displacement") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);

    ClusteringState s;
    // Empty partition: the first cluster founds its own home.
    auto r_en1 = ingest(s, doc("en1", "en", 0.0), rep({{1, 1.0}}, {1, 0, 0, 0}, 0.0), models, cfg);
    CHECK(r_en1.cross_id == 1);
    // Free language slot: joins the best home without any contest.
    auto r_de1 = ingest(s, doc("de1", "de", 0.0),
                        rep({{2, 1.0}}, {0.9, 0.4358898943540674, 0, 0}, 0.0), models, cfg);
    CHECK(r_de1.cross_id == 1);
    CHECK(r_de1.trace.topples.empty());
    // Occupied slot, weaker challenger: founds a new home instead.
    auto r_en2 = ingest(s, doc("en2", "en", 0.0), rep({{3, 1.0}}, {0, 1, 0, 0}, 0.0), models, cfg);
    CHECK(r_en2.cross_id == 2);

    // Occupied slot, stronger challenger: displaces the incumbent, which
    // re-homes into the free slot of the other cluster.
    auto r_de2 = ingest(s, doc("de2", "de", 0.0),
                        rep({{4, 1.0}}, {0.98, 0.19899748742132398, 0, 0}, 0.0), models, cfg);
    CHECK(r_de2.cross_id == 1);
    REQUIRE(r_de2.trace.topples.size() == 1);
    CHECK(r_de2.trace.topples[0].moved == MonoClusterRef{Language("de"), 1});
    CHECK(r_de2.trace.topples[0].from_cross == 1);
    CHECK(r_de2.trace.topples[0].to_cross == 2);
    CHECK(s.get({Language("de"), 1}).cross_id == 2);
    check_invariants(s);
}

TEST_CASE("crosslingual placement: displacement chain across five clusters") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);
    ClusteringState s;

    ingest(s, doc("en1", "en", 0.0), rep({{1, 1.0}}, {1, 0, 0, 0}, 0.0), models, cfg);
    ingest(s, doc("de1", "de", 0.0), rep({{2, 1.0}}, {0.9, 0.4358898943540674, 0, 0}, 0.0),
           models, cfg);
    ingest(s, doc("en2", "en", 0.0), rep({{3, 1.0}}, {0, 1, 0, 0}, 0.0), models, cfg);
    ingest(s, doc("de2", "de", 0.0), rep({{4, 1.0}}, {0, 0.3, 0.9539392014169457, 0}, 0.0),
           models, cfg);
    // State now: home 1 = {en/1, de/1}, home 2 = {en/2, de/2}.
    CHECK(s.get({Language("de"), 2}).cross_id == 2);

    // The incoming cluster beats de/1 at home 1; de/1 then beats de/2 at
    // home 2; de/2 finds no seat anywhere and founds home 3.
    auto r = ingest(s, doc("de3", "de", 0.0),
                    rep({{5, 1.0}}, {0.98, 0.19899748742132398, 0, 0}, 0.0), models, cfg);
    CHECK(r.cross_id == 1);
    REQUIRE(r.trace.topples.size() == 2);
    CHECK(r.trace.topples[0].moved == MonoClusterRef{Language("de"), 1});
    CHECK(r.trace.topples[0].from_cross == 1);
    CHECK(r.trace.topples[0].to_cross == 2);
    CHECK(r.trace.topples[1].moved == MonoClusterRef{Language("de"), 2});
    CHECK(r.trace.topples[1].from_cross == 2);
    CHECK(r.trace.topples[1].to_cross == 3);
    CHECK_FALSE(r.trace.topple_budget_exhausted);

    CHECK(s.get({Language("en"), 1}).cross_id == 1);
    CHECK(s.get({Language("de"), 3}).cross_id == 1);
    CHECK(s.get({Language("en"), 2}).cross_id == 2);
    CHECK(s.get({Language("de"), 1}).cross_id == 2);
    CHECK(s.get({Language("de"), 2}).cross_id == 3);
    check_invariants(s);
}

TEST_CASE("the topple budget parks the last displaced cluster") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);
    cfg.topple_budget = 1;
    ClusteringState s;
    ingest(s, doc("en1", "en", 0.0), rep({{1, 1.0}}, {1, 0, 0, 0}, 0.0), models, cfg);
    ingest(s, doc("de1", "de", 0.0), rep({{2, 1.0}}, {0.9, 0.4358898943540674, 0, 0}, 0.0),
           models, cfg);
    ingest(s, doc("en2", "en", 0.0), rep({{3, 1.0}}, {0, 1, 0, 0}, 0.0), models, cfg);
    ingest(s, doc("de2", "de", 0.0), rep({{4, 1.0}}, {0, 0.3, 0.9539392014169457, 0}, 0.0),
           models, cfg);

    auto r = ingest(s, doc("de3", "de", 0.0),
                    rep({{5, 1.0}}, {0.98, 0.19899748742132398, 0, 0}, 0.0), models, cfg);
    CHECK(r.trace.topple_budget_exhausted);
    REQUIRE(r.trace.topples.size() == 1);
    CHECK(r.trace.topples[0].to_cross == 3);  // parked in a fresh home
    CHECK(s.get({Language("de"), 1}).cross_id == 3);
    CHECK(s.get({Language("de"), 2}).cross_id == 2);  // chain stopped early
    check_invariants(s);
}

TEST_CASE("immutable crosslingual mode never revisits a placement") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);
    cfg.g_update = GUpdateMode::Immutable;
    ClusteringState s;
    ingest(s, doc("en1", "en", 0.0), rep({{1, 1.0}}, {1, 0, 0, 0}, 0.0), models, cfg);
    ingest(s, doc("de1", "de", 0.0), rep({{2, 1.0}}, {0.9, 0.4358898943540674, 0, 0}, 0.0),
           models, cfg);
    ingest(s, doc("en2", "en", 0.0), rep({{3, 1.0}}, {0, 1, 0, 0}, 0.0), models, cfg);

    // A stronger challenger arrives, but occupied homes are not candidates:
    // it takes the free slot in home 2 instead of displacing de/1.
    auto r = ingest(s, doc("de3", "de", 0.0),
                    rep({{5, 1.0}}, {0.98, 0.19899748742132398, 0, 0}, 0.0), models, cfg);
    CHECK(r.cross_id == 2);
    CHECK(r.trace.topples.empty());
    CHECK(s.get({Language("de"), 1}).cross_id == 1);
    check_invariants(s);
}

TEST_CASE("a story that stays alone keeps its crosslingual id across updates") {
    ModelSet models;
    ClusteringState s;
    ClustererConfig cfg = sum_domino(3.0);
    // Two same-language singleton stories in separate homes.
    ingest(s, doc("a1", "en", 0.0), rep({{1, 1.0}}, {1, 0}, 0.0), models, cfg);
    ingest(s, doc("b1", "en", 0.0), rep({{9, 1.0}}, {0, 1}, 0.0), models, cfg);
    CHECK(s.get({Language("en"), 1}).cross_id == 1);
    CHECK(s.get({Language("en"), 2}).cross_id == 2);

    // A new member of story a triggers a crosslingual re-derivation; the
    // only other home is occupied by a same-language incumbent that keeps
    // its seat, so the emptied id 1 is revived rather than replaced.
    auto r = ingest(s, doc("a2", "en", 0.0), rep({{1, 1.0}}, {1, 0}, 0.0), models, cfg);
    CHECK(r.trace.joined);
    CHECK(r.cross_id == 1);
    CHECK(s.cross_clusters().count(1) == 1);
    CHECK(s.cross_clusters().count(2) == 1);
    check_invariants(s);
}

TEST_CASE("pivot mode gates candidates without a pivot member") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);
    cfg.cross.mode = CrossMode::Pivot;
    cfg.cross.pivot = Language("en");
    ClusteringState s;

    // A German-only home exists; a French cluster cannot see it (no pivot
    // member, no fallback), so it founds its own home.
    ingest(s, doc("d1", "de", 0.0), rep({{1, 1.0}}, {1, 0}, 0.0), models, cfg);
    auto rf = ingest(s, doc("f1", "fr", 0.0), rep({{2, 1.0}}, {1, 0}, 0.0), models, cfg);
    CHECK(rf.cross_id == 2);

    // An English cluster may enter any home (every pair involves the
    // pivot); it lands in the highest-scoring one.
    auto re = ingest(s, doc("e1", "en", 0.0), rep({{3, 1.0}}, {1, 0}, 0.0), models, cfg);
    CHECK(re.cross_id == 1);  // equal scores, tie to the smaller id
    check_invariants(s);

    // With the fallback enabled the French cluster would have seen both.
    ClusteringState s2;
    ClustererConfig cfg2 = cfg;
    cfg2.cross.pivot_fallback_to_sum = true;
    ingest(s2, doc("d1", "de", 0.0), rep({{1, 1.0}}, {1, 0}, 0.0), models, cfg2);
    auto rf2 = ingest(s2, doc("f1", "fr", 0.0), rep({{2, 1.0}}, {1, 0}, 0.0), models, cfg2);
    CHECK(rf2.cross_id == 1);
    check_invariants(s2);
}

TEST_CASE("pivot mode without a pivot language is a configuration error") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(1e9);
    cfg.cross.mode = CrossMode::Pivot;
    cfg.cross.pivot = Language();
    ClusteringState s;
    CHECK_THROWS_AS(
        ingest(s, doc("a", "en", 0.0), rep({{1, 1.0}}, {1, 0}, 0.0), models, cfg),
        ConfigError);
}

TEST_CASE("duplicate document ids are rejected") {
    ModelSet models;
    ClusteringState s;
    ClustererConfig cfg = sum_domino(0.0);
    ingest(s, doc("a", "en", 0.0), rep({{1, 1.0}}, {}, 0.0), models, cfg);
    CHECK_THROWS_AS(ingest(s, doc("a", "en", 1.0), rep({{1, 1.0}}, {}, 1.0), models, cfg),
                    InputError);
}

TEST_CASE("random streams keep every structural invariant, deterministically") {
    ModelSet models;
    ClustererConfig cfg = sum_domino(3.4);

    auto run = [&](ClusteringState& s, std::vector<std::pair<MonoClusterRef, ClusterId>>* log) {
        std::mt19937_64 rng(42);
        std::uniform_int_distribution<int> lang_pick(0, 2);
        std::uniform_int_distribution<TermId> term(0, 25);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const char* langs[] = {"en", "de", "es"};
        double ts = 0.0;
        for (int i = 0; i < 160; ++i) {
            ts += unit(rng) * 2.0;
            std::vector<SparseVector::Entry> terms;
            for (int k = 0; k < 4; ++k) terms.emplace_back(term(rng), 1.0 + unit(rng));
            DenseVector dv{unit(rng), unit(rng), unit(rng)};
            auto r = ingest(s, doc("d" + std::to_string(i), langs[lang_pick(rng)], ts),
                            rep(std::move(terms), std::move(dv), ts), models, cfg);
            check_invariants(s);
            if (log) log->emplace_back(r.mono, r.cross_id);
        }
    };

    ClusteringState s1, s2;
    std::vector<std::pair<MonoClusterRef, ClusterId>> log1, log2;
    run(s1, &log1);
    run(s2, &log2);
    CHECK(log1 == log2);
}

TEST_CASE("the pipeline rejects documents that regress past the slack") {
    IdfTable idf;
    idf.set_doc_count(Language("en"), 1);
    idf.set_idf(Language("en"), FeatureClass::Tokens, "x", 1.0);
    IdentityAnnotator ann;
    TermDict dict;
    Featurizer fz(idf, nullptr, ann, dict);
    ModelSet models;
    ClustererConfig cfg = sum_domino(100.0);

    ClusterPipeline pipe(fz, models, cfg, 10.0);
    pipe.process(testutil::text_doc("a", "en", 0.0, "x", "x"));
    pipe.process(testutil::text_doc("b", "en", 100.0, "x", "x"));
    pipe.process(testutil::text_doc("c", "en", 95.0, "x", "x"));  // within slack
    CHECK_THROWS_AS(pipe.process(testutil::text_doc("d", "en", 80.0, "x", "x")), InputError);
}
