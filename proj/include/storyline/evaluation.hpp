#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "storyline/cluster_state.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Pairwise clustering metrics: a true positive is an item pair placed
// together by both partitions, a false positive a pair together only in
// the prediction, a false negative a pair together only in the gold
// partition. Counts are exact integers from the contingency table;
// precision/recall on an empty denominator are 1.
struct PairwiseMetrics {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
};

// Both maps go item id -> cluster label and must cover the same ids.
PairwiseMetrics pairwise_metrics(const std::unordered_map<std::string, std::string>& predicted,
                                 const std::unordered_map<std::string, std::string>& gold);

// Final placement of one document, as read back from an assignments file.
struct DocAssignment {
    std::string doc_id;
    Language language;
    ClusterId mono_cluster = 0;
    ClusterId cross_cluster = 0;
};

// The item id/label maps of one crosslingual evaluation instance. Items
// are the predicted monolingual clusters. On the predicted side each is
// labeled by its crosslingual cluster; on the gold side by the gold
// crosslingual label reached through the majority gold story among its
// documents. Clusters that cannot be matched to any labeled gold story
// become gold singletons.
struct CrosslingualInstance {
    std::unordered_map<std::string, std::string> predicted;
    std::unordered_map<std::string, std::string> gold;
};

CrosslingualInstance build_crosslingual_instance(
    const std::vector<DocAssignment>& assignments,
    const std::unordered_map<std::string, const Document*>& gold_docs);

// Streaming micro-cluster baseline over one monolingual stream using only
// the primary token vector. A document joins the nearest micro-cluster
// when it falls within the cluster's boundary (boundary_factor times the
// RMS deviation of its members; for singletons, the distance to the
// closest other cluster); otherwise it founds a new micro-cluster. When
// max_clusters > 0 and founding would exceed it, the closest pair of
// micro-clusters is merged first. Returns document id -> final label
// (merged micro-clusters share a label).
struct BaselineConfig {
    std::size_t max_clusters = 0;  // 0 = unbounded
    double boundary_factor = 2.0;
};

std::unordered_map<std::string, std::string> microcluster_baseline(
    const std::vector<const Document*>& stream,
    const std::vector<const DocRepresentation*>& representations, const BaselineConfig& config);

}  // namespace storyline
