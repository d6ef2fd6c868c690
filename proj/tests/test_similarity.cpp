#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "storyline/similarity.hpp"

using namespace storyline;
using testutil::doc;
using testutil::rep;

TEST_CASE("gaussian recency feature unit values") {
    CHECK(time_feature(0.0, 0.0, 72.0) == 1.0);
    CHECK(time_feature(72.0, 0.0, 72.0) ==
          doctest::Approx(0.6065306597126334).epsilon(1e-12));
    CHECK(time_feature(36.0, 0.0, 72.0) ==
          doctest::Approx(0.8824969025845955).epsilon(1e-12));
    // Peak follows mu.
    CHECK(time_feature(72.0, 72.0, 10.0) == 1.0);
    // Symmetric around mu.
    for (double t : {1.0, 7.5, 72.0, 200.0}) {
        CHECK(time_feature(t, 0.0, 72.0) == time_feature(-t, 0.0, 72.0));
    }
    CHECK_THROWS_AS(time_feature(1.0, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(time_feature(1.0, 0.0, -5.0), ConfigError);
}

TEST_CASE("document-to-cluster features: cosines then recency") {
    ClusteringState state;
    Language en("en");
    // Cluster seeded with one document whose primary vector is (1,1)/sqrt(2).
    auto& cluster = state.create_cluster(en, doc("a", "en", 0.0),
                                         rep({{1, 1.0}, {2, 1.0}}, {}, 0.0));

    DocRepresentation probe = rep({{1, 1.0}}, {}, 36.0);
    auto f = gamma0_features(probe, cluster, 0.0, 72.0);
    CHECK(f[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    for (int i = 1; i < kMonoSubvectors; ++i) CHECK(f[i] == 0.0);  // zero vs zero
    for (int i = 0; i < 3; ++i) {
        CHECK(f[kMonoSubvectors + i] ==
              doctest::Approx(0.8824969025845955).epsilon(1e-12));
    }

    // The weighted score is the plain dot product with the weights.
    SimilarityModel m = SimilarityModel::all_ones();
    for (int i = 0; i < kMonoSubvectors; ++i) m.subvector_weights[i] = 0.1 * (i + 1);
    for (int i = 0; i < 3; ++i) m.timestamp_weights[i] = 2.0 + i;
    double expected = 0.0;
    for (int i = 0; i < kMonoSubvectors; ++i) expected += m.subvector_weights[i] * f[i];
    for (int i = 0; i < 3; ++i) expected += m.timestamp_weights[i] * f[kMonoSubvectors + i];
    CHECK(gamma0(probe, cluster, m) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("scoring against sums equals scoring against the mean centroid") {
    ClusteringState state;
    Language en("en");
    auto& cluster = state.create_cluster(en, doc("a", "en", 0.0),
                                         rep({{1, 1.0}, {2, 1.0}}, {}, 0.0));
    state.add_document(cluster, doc("b", "en", 0.0), rep({{2, 1.0}, {3, 1.0}}, {}, 0.0));

    DocRepresentation probe = rep({{2, 1.0}}, {}, 0.0);
    auto f = gamma0_features(probe, cluster, 0.0, 72.0);
    double via_mean = cosine(probe.mono[kPrimarySubvector], cluster.mono_centroid(0));
    CHECK(f[0] == doctest::Approx(via_mean).epsilon(1e-14));
}

TEST_CASE("cluster-pair features and symmetry at mu zero") {
    ClusteringState state;
    auto& a = state.create_cluster(Language("en"), doc("a", "en", 0.0),
                                   rep({{1, 1.0}}, {1.0, 0.0}, 0.0));
    auto& b = state.create_cluster(Language("de"), doc("b", "de", 72.0),
                                   rep({{2, 1.0}}, {0.6, 0.8}, 72.0));

    auto f = gamma1_pair_features(a, b, 0.0, 72.0);
    CHECK(f[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(f[kCrossSubvectors + i] ==
              doctest::Approx(0.6065306597126334).epsilon(1e-12));
    }
    CHECK(gamma1_pair(a, b, CrossSimilarityModel::all_ones()) ==
          doctest::Approx(0.6 + 3 * 0.6065306597126334).epsilon(1e-12));

    // Random pairs: swapping arguments permutes nothing.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        ClusteringState s2;
        DenseVector va{u(rng), u(rng), u(rng)}, vb{u(rng), u(rng), u(rng)};
        double ta = 100.0 * u(rng), tb = 100.0 * u(rng);
        auto& ca = s2.create_cluster(Language("en"), doc("a", "en", ta), rep({{1, 1.0}}, va, ta));
        auto& cb = s2.create_cluster(Language("de"), doc("b", "de", tb), rep({{2, 1.0}}, vb, tb));
        auto fab = gamma1_pair_features(ca, cb, 0.0, 72.0);
        auto fba = gamma1_pair_features(cb, ca, 0.0, 72.0);
        for (int i = 0; i < kCrossFeatures; ++i) CHECK(fab[i] == fba[i]);
    }
}

TEST_CASE("crosslingual aggregation: sum over members vs pivot member") {
    ClusteringState state;
    auto& en = state.create_cluster(Language("en"), doc("e", "en", 0.0),
                                    rep({{1, 1.0}}, {1.0, 0.0, 0.0}, 0.0));
    auto& de = state.create_cluster(Language("de"), doc("d", "de", 0.0),
                                    rep({{2, 1.0}}, {0.0, 1.0, 0.0}, 0.0));
    auto& fr = state.create_cluster(Language("fr"), doc("f", "fr", 0.0),
                                    rep({{3, 1.0}}, {0.8, 0.6, 0.0}, 0.0));
    auto& x = state.create_cross_cluster();
    state.attach(en, x);
    state.attach(de, x);

    CrossSimilarityModel m = CrossSimilarityModel::all_ones();

    CrossScoringOptions sum_opts;
    sum_opts.mode = CrossMode::Sum;
    double sum_score = gamma1_to_crosslingual(state, fr, x, m, sum_opts);
    CHECK(sum_score ==
          doctest::Approx(gamma1_pair(fr, en, m) + gamma1_pair(fr, de, m)).epsilon(1e-12));

    CrossScoringOptions pivot_opts;
    pivot_opts.mode = CrossMode::Pivot;
    pivot_opts.pivot = Language("en");
    double pivot_score = gamma1_to_crosslingual(state, fr, x, m, pivot_opts);
    CHECK(pivot_score == doctest::Approx(gamma1_pair(fr, en, m)).epsilon(1e-12));

    // Candidate without a pivot member: only reachable for pivot-language
    // incomers or with the fallback, and then scored by the member sum.
    state.detach(de);
    auto& y = state.create_cross_cluster();
    state.attach(de, y);
    CHECK(cross_candidate_eligible(y, Language("en"), pivot_opts));
    CHECK_FALSE(cross_candidate_eligible(y, Language("fr"), pivot_opts));
    pivot_opts.pivot_fallback_to_sum = true;
    CHECK(cross_candidate_eligible(y, Language("fr"), pivot_opts));
    double fallback_score = gamma1_to_crosslingual(state, fr, y, m, pivot_opts);
    CHECK(fallback_score == doctest::Approx(gamma1_pair(fr, de, m)).epsilon(1e-12));

    CrossScoringOptions bad;
    bad.mode = CrossMode::Pivot;  // pivot left empty
    std::vector<const MonolingualCluster*> members{&en};
    CHECK_THROWS_AS(gamma1_to_members(fr, members, m, bad), ConfigError);
}

TEST_CASE("zero dense subvectors contribute zero cosine instead of nan") {
    ClusteringState state;
    auto& a = state.create_cluster(Language("en"), doc("a", "en", 0.0),
                                   rep({{1, 1.0}}, {}, 0.0));
    auto& b = state.create_cluster(Language("de"), doc("b", "de", 0.0),
                                   rep({{2, 1.0}}, {1.0, 0.0}, 0.0));
    auto f = gamma1_pair_features(a, b, 0.0, 72.0);
    CHECK(f[0] == 0.0);
    CHECK(gamma1_pair(a, b, CrossSimilarityModel::all_ones()) == doctest::Approx(3.0));
}
