#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storyline/cluster_state.hpp"
#include "storyline/similarity.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Linear join/new classifier over the per-feature maxima of the candidate
// pool: join when weights . maxima + bias > 0.
struct MergeModel {
    std::array<double, kMonoFeatures> weights{};
    double bias = 0.0;

    double decide(const std::array<double, kMonoFeatures>& maxima) const {
        double s = bias;
        for (int i = 0; i < kMonoFeatures; ++i) s += weights[i] * maxima[i];
        return s;
    }
};

enum class MergePolicy {
    Threshold,   // join when the best candidate score exceeds tau
    Classifier,  // join when the merge model fires on the pool maxima
};

enum class GUpdateMode {
    Immutable,  // crosslingual membership never revisited
    Domino,     // displacement chains fix earlier crosslingual decisions
};

// How a displacement contest between the incoming cluster c and the
// incumbent y of the same language is scored.
enum class ContestConvention {
    // Both contestants are scored against the candidate's members with the
    // incumbent held out; an empty residue falls back to comparing the
    // direct pair scores gamma1(c,y) vs gamma1(y,c).
    Residual,
    // Both contestants are scored against the candidate as-is, incumbent
    // included (the incumbent then scores its own self-similarity).
    Naive,
};

struct ClustererConfig {
    MergePolicy merge_policy = MergePolicy::Threshold;
    double tau = 0.0;
    std::map<Language, double> tau_overrides;  // per-language thresholds
    GUpdateMode g_update = GUpdateMode::Domino;
    CrossScoringOptions cross;
    ContestConvention contest = ContestConvention::Residual;
    int topple_budget = 1000;  // max displacements per document
    bool use_candidate_index = false;

    double tau_for(const Language& lang) const {
        auto it = tau_overrides.find(lang);
        return it == tau_overrides.end() ? tau : it->second;
    }
};

// All trained parameters in one place. Languages without a trained entry
// fall back to the untrained all-ones model.
struct ModelSet {
    std::map<Language, SimilarityModel> rankers;
    std::map<Language, MergeModel> merge_models;
    CrossSimilarityModel cross_ranker = CrossSimilarityModel::all_ones();
    double default_mu = 0.0;
    double default_sigma = 72.0;

    SimilarityModel ranker_for(const Language& lang) const {
        auto it = rankers.find(lang);
        return it == rankers.end() ? SimilarityModel::all_ones(default_mu, default_sigma)
                                   : it->second;
    }
    const MergeModel* merge_model_for(const Language& lang) const {
        auto it = merge_models.find(lang);
        return it == merge_models.end() ? nullptr : &it->second;
    }
};

struct CandidateScore {
    ClusterId id = 0;
    double score = 0.0;
    std::array<double, kMonoFeatures> features{};
};

// One crosslingual displacement: `moved` lost its place in `from_cross`
// to the incoming cluster and was re-homed into `to_cross`.
struct ToppleStep {
    MonoClusterRef moved;
    ClusterId from_cross = 0;
    ClusterId to_cross = 0;
};

// Everything the engine decided for one document, for audit traces.
struct DecisionTrace {
    std::string doc_id;
    Language language;
    std::vector<std::pair<ClusterId, double>> top_candidates;  // best five
    double best_score = 0.0;
    bool joined = false;
    ClusterId mono_id = 0;
    ClusterId cross_id = 0;
    std::vector<ToppleStep> topples;
    bool topple_budget_exhausted = false;
};

struct IngestResult {
    MonoClusterRef mono;
    ClusterId cross_id = 0;
    DecisionTrace trace;
};

// Scores the document against every cluster of its language (or only the
// candidate-index shortlist when enabled). Results are ordered by cluster
// id; each carries the full 12-feature vector.
std::vector<CandidateScore> score_candidates(const ClusteringState& state,
                                             const DocRepresentation& rep,
                                             const Language& lang,
                                             const SimilarityModel& model,
                                             bool use_index);

// Best candidate by score, ties to the older (smaller-id) cluster.
std::optional<CandidateScore> best_candidate(const std::vector<CandidateScore>& candidates);

// Per-feature maxima across the candidate pool (all zeros when empty).
std::array<double, kMonoFeatures> feature_maxima(const std::vector<CandidateScore>& candidates);

// The join-vs-new decision for a non-empty pool.
bool merge_decision(double best_score, const std::array<double, kMonoFeatures>& maxima,
                    const ClustererConfig& config, const MergeModel* merge_model, double tau);

// Places (or re-places) monolingual cluster c in the crosslingual
// partition per the configured update mode. Returns the crosslingual id c
// ends up in. `trace` may be null.
ClusterId update_crosslingual(ClusteringState& state, MonolingualCluster& c,
                              const CrossSimilarityModel& model, const ClustererConfig& config,
                              DecisionTrace* trace);

// One full online step: monolingual placement followed by the
// crosslingual update.
IngestResult ingest(ClusteringState& state, const Document& doc, const DocRepresentation& rep,
                    const ModelSet& models, const ClustererConfig& config);

}  // namespace storyline
