#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "storyline/clusterer.hpp"
#include "storyline/similarity.hpp"
#include "storyline/types.hpp"

namespace storyline {

// A document together with its feature-space representation; the unit of
// replay-based training.
struct DocRecord {
    Document doc;
    DocRepresentation rep;
};

// One scored alternative inside a ranking query.
struct RankingCandidate {
    std::vector<double> features;
    bool positive = false;
};

// All candidates generated for one stream step. Rankable when it holds at
// least one positive and one negative.
struct RankingQuery {
    std::string query_id;
    std::vector<RankingCandidate> candidates;

    bool rankable() const {
        bool pos = false, neg = false;
        for (const auto& c : candidates) (c.positive ? pos : neg) = true;
        return pos && neg;
    }
};

// Which cluster pool the replay maintains while generating examples:
// System re-runs the engine with the primary-cosine model and a join
// threshold, Gold keeps one pool cluster per gold story.
enum class PoolMode { System, Gold };

struct RankingDataOptions {
    PoolMode pool_mode = PoolMode::Gold;
    double tau = 0.0;  // join threshold for the system-pool replay
    double mu = 0.0;
    double sigma = 72.0;
    int max_negatives = 20;
};

// Replays the stream restricted to one language and emits one query per
// document that has at least one correct candidate in the pool. Positives
// are pool clusters holding at least one document of the incoming
// document's gold story; negatives are the highest-primary-cosine
// incorrect clusters, capped at max_negatives. Every document must carry
// a gold story label.
std::vector<RankingQuery> generate_ranking_data(const std::vector<DocRecord>& stream,
                                                const Language& language,
                                                const RankingDataOptions& options);

// Crosslingual analogue: replays all languages with gold pools and emits,
// after each document lands in its story's cluster, one query scoring
// that cluster against every cluster of the other languages. Positives
// share the gold crosslingual label; negatives are ranked by the
// combined-section embedding cosine. Documents without a crosslingual
// label yield no queries but still feed the pools.
std::vector<RankingQuery> generate_cross_ranking_data(const std::vector<DocRecord>& stream,
                                                      const RankingDataOptions& options);

struct TrainOptions {
    std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    int folds = 5;
    int epochs = 400;
    double learning_rate = 0.5;
    std::uint64_t seed = 1;
};

struct TrainedRanker {
    std::vector<double> weights;
    double chosen_lambda = 0.0;
    double cv_accuracy = 0.0;     // mean held-out pairwise agreement
    std::size_t query_count = 0;  // distinct queries used
    std::size_t pair_count = 0;   // positive-negative pairs among them
};

// Trains a linear scoring function by pairwise hinge loss: every
// (positive, negative) pair inside a query should be ordered by at least
// the unit margin. Full-batch subgradient descent, so results are exactly
// reproducible. Duplicate queries are collapsed and each query's pairs
// share one unit of loss weight, making the result invariant to copying
// queries. Lambda comes from round-robin cross-validation over the grid
// (ties to the strongest regularizer). Throws when no query is rankable.
TrainedRanker train_ranker(const std::vector<RankingQuery>& queries,
                           const TrainOptions& options);

// Fraction of (positive, negative) pairs the weights order correctly.
double pairwise_agreement(const std::vector<double>& weights,
                          const std::vector<RankingQuery>& queries);

struct MergeTrainOptions {
    TrainOptions optimizer;
};

struct TrainedMerge {
    MergeModel model;
    double cv_accuracy = 0.0;
    bool degenerate = false;  // one-class data: constant decision
    std::size_t example_count = 0;
};

// Trains the join/new classifier for one language by replaying the stream
// with gold story pools: each document past the first yields the
// per-feature maxima over the pool as input, labeled "join" when its
// story already has a cluster. The ranker argument supplies mu and sigma
// for the timestamp features. One-class data produces a constant
// classifier flagged degenerate.
TrainedMerge train_merge(const std::vector<DocRecord>& stream, const Language& language,
                         const SimilarityModel& ranker, const MergeTrainOptions& options);

struct TauResult {
    double tau = 0.0;
    double f1 = 0.0;
};

// Picks the join threshold per language by replaying the development
// stream at grid points: a coarse pass at refine_window stride brackets
// the maximum, then the surrounding window is swept exhaustively (ties to
// the smaller threshold). Exact for unimodal F1 curves. Every document
// needs a gold story label. Throws on an empty grid.
std::map<Language, TauResult> tune_tau(const std::vector<DocRecord>& dev,
                                       const ModelSet& models, const ClustererConfig& base,
                                       const std::vector<double>& grid, int refine_window = 8);

}  // namespace storyline
