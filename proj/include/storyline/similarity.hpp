#pragma once

#include <array>
#include <vector>

#include "storyline/cluster_state.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Gaussian recency feature exp(-(delta - mu)^2 / (2 sigma^2)) over a
// timestamp difference in hours. Peaks at delta == mu; sigma must be
// positive.
double time_feature(double delta_hours, double mu, double sigma);

// Weights of the document-to-monolingual-cluster score: one weight per
// sparse subvector cosine plus three for the Gaussian timestamp features
// (against the cluster's newest, average, and oldest member timestamps).
// The untrained model has every weight at 1.
struct SimilarityModel {
    std::array<double, kMonoSubvectors> subvector_weights;
    std::array<double, 3> timestamp_weights;
    double mu = 0.0;
    double sigma = 72.0;

    static SimilarityModel all_ones(double mu = 0.0, double sigma = 72.0);
    // Token-both cosine only; used by replay-based data generation.
    static SimilarityModel primary_only(double mu = 0.0, double sigma = 72.0);
};

// Weights of the cluster-to-cluster crosslingual score: one per dense
// subvector cosine plus three timestamp-feature weights.
struct CrossSimilarityModel {
    std::array<double, kCrossSubvectors> subvector_weights;
    std::array<double, 3> timestamp_weights;
    double mu = 0.0;
    double sigma = 72.0;

    static CrossSimilarityModel all_ones(double mu = 0.0, double sigma = 72.0);
};

// The 12 raw features of the document-vs-cluster score: nine subvector
// cosines (document subvector vs cluster centroid, in layout order),
// then the three timestamp features. Cosines against the running sums --
// equal to cosines against the mean, since the two differ by a positive
// scalar.
std::array<double, kMonoFeatures> gamma0_features(const DocRepresentation& rep,
                                                  const MonolingualCluster& cluster,
                                                  double mu, double sigma);

// Weighted sum of the 12 features under the model.
double gamma0(const DocRepresentation& rep, const MonolingualCluster& cluster,
              const SimilarityModel& model);

// The 6 raw features of a monolingual-cluster pair: three dense subvector
// cosines plus three timestamp features over the differences of the
// like-named aggregates (newest-newest, average-average, oldest-oldest).
// Symmetric in its arguments when mu == 0.
std::array<double, kCrossFeatures> gamma1_pair_features(const MonolingualCluster& a,
                                                        const MonolingualCluster& b,
                                                        double mu, double sigma);

double gamma1_pair(const MonolingualCluster& a, const MonolingualCluster& b,
                   const CrossSimilarityModel& model);

// How the document-cluster-to-crosslingual-cluster score aggregates over
// the member clusters.
enum class CrossMode {
    Sum,    // sum of pairwise scores against every member
    Pivot,  // score against the pivot-language member only
};

struct CrossScoringOptions {
    CrossMode mode = CrossMode::Sum;
    Language pivot;                    // required in pivot mode
    bool pivot_fallback_to_sum = false;  // pivot mode: score pivot-less
                                         // candidates by sum instead of
                                         // skipping them
};

// Score of placing monolingual cluster c into crosslingual cluster `a`,
// computed over a's current member list. In pivot mode the score is the
// pair score against a's pivot-language member; when a has none, the sum
// over members is used if c itself is pivot-language (every pair involves
// the pivot) or when fallback is enabled.
double gamma1_to_crosslingual(const ClusteringState& state, const MonolingualCluster& c,
                              const CrosslingualCluster& a, const CrossSimilarityModel& model,
                              const CrossScoringOptions& options);

// Same score over an explicit member list (used for displacement contests
// where one member is held out).
double gamma1_to_members(const MonolingualCluster& c,
                         const std::vector<const MonolingualCluster*>& members,
                         const CrossSimilarityModel& model,
                         const CrossScoringOptions& options);

// Whether crosslingual cluster `a` may be scored at all for cluster c
// under the options (pivot mode skips pivot-less candidates unless the
// incoming cluster speaks the pivot language or fallback is on).
bool cross_candidate_eligible(const CrosslingualCluster& a, const Language& incoming,
                              const CrossScoringOptions& options);

}  // namespace storyline
