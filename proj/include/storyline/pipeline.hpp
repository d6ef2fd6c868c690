#pragma once

#include <limits>
#include <vector>

#include "storyline/clusterer.hpp"
#include "storyline/evaluation.hpp"
#include "storyline/featurizer.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Featurize-then-ingest driver for a document stream. Enforces that the
// stream is (approximately) time-ordered: a document may lag the newest
// timestamp seen so far by at most `slack_hours`.
class ClusterPipeline {
public:
    ClusterPipeline(const Featurizer& featurizer, const ModelSet& models,
                    const ClustererConfig& config, double slack_hours = 72.0)
        : featurizer_(featurizer), models_(models), config_(config),
          slack_hours_(slack_hours) {}

    IngestResult process(const Document& doc) {
        if (doc.timestamp < newest_ - slack_hours_) {
            throw InputError("document '" + doc.id + "' regresses " +
                             std::to_string(newest_ - doc.timestamp) +
                             " hours behind the newest timestamp seen (slack is " +
                             std::to_string(slack_hours_) + ")");
        }
        newest_ = std::max(newest_, doc.timestamp);
        DocRepresentation rep = featurizer_.represent(doc);
        IngestResult result = ingest(state_, doc, rep, models_, config_);
        assignments_.push_back(
            {doc.id, doc.language, result.mono.id, result.cross_id});
        return result;
    }

    // Re-reads final crosslingual homes: domino updates can move a mono
    // cluster after some of its documents were recorded.
    const std::vector<DocAssignment>& final_assignments() {
        for (auto& a : assignments_) {
            const MonolingualCluster& c = state_.get({a.language, a.mono_cluster});
            a.cross_cluster = c.cross_id;
        }
        return assignments_;
    }

    ClusteringState& state() { return state_; }
    const ClusteringState& state() const { return state_; }

private:
    const Featurizer& featurizer_;
    const ModelSet& models_;
    ClustererConfig config_;
    double slack_hours_;
    double newest_ = -std::numeric_limits<double>::infinity();
    ClusteringState state_;
    std::vector<DocAssignment> assignments_;
};

}  // namespace storyline
