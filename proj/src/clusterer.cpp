#include "storyline/clusterer.hpp"

#include <algorithm>

namespace storyline {

namespace {

// gamma0 feature vector with the document-side norms hoisted out, so a
// scan over many clusters computes them once.
std::array<double, kMonoFeatures> features_with_norms(
    const DocRepresentation& rep, const std::array<double, kMonoSubvectors>& doc_norms,
    const MonolingualCluster& cluster, double mu, double sigma) {
    std::array<double, kMonoFeatures> f{};
    for (int i = 0; i < kMonoSubvectors; ++i) {
        double cn = cluster.mono_norms[i];
        f[i] = (cn > 0.0 && doc_norms[i] > 0.0)
                   ? rep.mono[i].dot(cluster.mono_sums[i]) / (cn * doc_norms[i])
                   : 0.0;
    }
    f[kMonoSubvectors + 0] = time_feature(rep.timestamp - cluster.ts_newest, mu, sigma);
    f[kMonoSubvectors + 1] = time_feature(rep.timestamp - cluster.ts_avg(), mu, sigma);
    f[kMonoSubvectors + 2] = time_feature(rep.timestamp - cluster.ts_oldest, mu, sigma);
    return f;
}

double weighted_score(const std::array<double, kMonoFeatures>& f, const SimilarityModel& m) {
    double s = 0.0;
    for (int i = 0; i < kMonoSubvectors; ++i) s += m.subvector_weights[i] * f[i];
    for (int i = 0; i < 3; ++i) s += m.timestamp_weights[i] * f[kMonoSubvectors + i];
    return s;
}

std::vector<CandidateScore> score_subset(const ClusteringState& state,
                                         const DocRepresentation& rep, const Language& lang,
                                         const SimilarityModel& model,
                                         const std::vector<ClusterId>* subset) {
    std::array<double, kMonoSubvectors> doc_norms;
    for (int i = 0; i < kMonoSubvectors; ++i) doc_norms[i] = rep.mono[i].norm();

    std::vector<CandidateScore> out;
    auto score_one = [&](const MonolingualCluster& cluster) {
        CandidateScore cs;
        cs.id = cluster.id;
        cs.features = features_with_norms(rep, doc_norms, cluster, model.mu, model.sigma);
        cs.score = weighted_score(cs.features, model);
        out.push_back(std::move(cs));
    };

    if (subset != nullptr) {
        out.reserve(subset->size());
        for (ClusterId id : *subset) score_one(state.get({lang, id}));
    } else {
        const auto& table = state.clusters(lang);
        out.reserve(table.size());
        for (const auto& cluster : table) score_one(cluster);
    }
    return out;
}

}  // namespace

std::vector<CandidateScore> score_candidates(const ClusteringState& state,
                                             const DocRepresentation& rep,
                                             const Language& lang,
                                             const SimilarityModel& model, bool use_index) {
    if (!use_index) {
        return score_subset(state, rep, lang, model, nullptr);
    }

    // Shortlist: clusters sharing at least one "both"-section term with the
    // document. Exact whenever only sparse-cosine weights are nonzero;
    // otherwise a prefilter, with a full-scan fallback when it finds
    // nothing scoring above zero.
    const CandidateIndex* index = state.candidate_index(lang);
    std::vector<ClusterId> shortlist;
    if (index != nullptr) {
        for (FeatureClass cls :
             {FeatureClass::Tokens, FeatureClass::Lemmas, FeatureClass::Entities}) {
            const SparseVector& v = rep.mono[mono_subvector_index(cls, Section::Both)];
            for (const auto& [term, weight] : v.entries()) {
                (void)weight;
                auto it = index->postings.find(term);
                if (it == index->postings.end()) continue;
                shortlist.insert(shortlist.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(shortlist.begin(), shortlist.end());
        shortlist.erase(std::unique(shortlist.begin(), shortlist.end()), shortlist.end());
    }

    if (!shortlist.empty()) {
        auto scored = score_subset(state, rep, lang, model, &shortlist);
        auto best = best_candidate(scored);
        if (best && best->score > 0.0) {
            return scored;
        }
    }
    return score_subset(state, rep, lang, model, nullptr);
}

std::optional<CandidateScore> best_candidate(const std::vector<CandidateScore>& candidates) {
    std::optional<CandidateScore> best;
    for (const auto& c : candidates) {
        if (!best || c.score > best->score ||
            (c.score == best->score && c.id < best->id)) {
            best = c;
        }
    }
    return best;
}

std::array<double, kMonoFeatures> feature_maxima(
    const std::vector<CandidateScore>& candidates) {
    std::array<double, kMonoFeatures> maxima{};
    for (const auto& c : candidates) {
        for (int i = 0; i < kMonoFeatures; ++i) {
            maxima[i] = std::max(maxima[i], c.features[i]);
        }
    }
    return maxima;
}

bool merge_decision(double best_score, const std::array<double, kMonoFeatures>& maxima,
                    const ClustererConfig& config, const MergeModel* merge_model, double tau) {
    if (config.merge_policy == MergePolicy::Threshold) {
        return best_score > tau;
    }
    if (merge_model == nullptr) {
        throw ConfigError("classifier merge policy configured without a merge model");
    }
    return merge_model->decide(maxima) > 0.0;
}

namespace {

// Does the detached cluster take the incumbent's seat?
bool contest_win(const ClusteringState& state, const MonolingualCluster& challenger,
                 const MonolingualCluster& incumbent, const CrosslingualCluster& home,
                 const CrossSimilarityModel& model, const ClustererConfig& config) {
    if (config.contest == ContestConvention::Naive) {
        double sc = gamma1_to_crosslingual(state, challenger, home, model, config.cross);
        double sy = gamma1_to_crosslingual(state, incumbent, home, model, config.cross);
        return sc > sy;
    }
    // Residual: both sides scored against the other members only, so the
    // incumbent gets no credit for its own self-similarity.
    std::vector<const MonolingualCluster*> residue;
    residue.reserve(home.members.size());
    for (const auto& [lang, id] : home.members) {
        if (lang == incumbent.language) continue;
        residue.push_back(&state.get({lang, id}));
    }
    if (residue.empty()) {
        // Two-party contest over an otherwise empty home: compare the
        // direct pair scores. At mu == 0 these are equal and the incumbent
        // stays put.
        return gamma1_pair(challenger, incumbent, model) >
               gamma1_pair(incumbent, challenger, model);
    }
    return gamma1_to_members(challenger, residue, model, config.cross) >
           gamma1_to_members(incumbent, residue, model, config.cross);
}

// Walks a detached cluster (and any clusters it displaces) to a home.
// `revive_id` optionally recycles the id of a crosslingual cluster that
// was emptied by detaching the walk's first cluster, so a story that ends
// up alone again keeps its public id. Returns the home of the *first*
// cluster of the walk.
ClusterId place_detached(ClusteringState& state, MonolingualCluster& first,
                         const CrossSimilarityModel& model, const ClustererConfig& config,
                         DecisionTrace* trace, ClusterId revive_id) {
    const bool allow_displace = config.g_update == GUpdateMode::Domino;
    MonolingualCluster* current = &first;
    ClusterId first_home = 0;
    int displacements = 0;
    // Index into trace->topples of the step whose destination is pending.
    std::ptrdiff_t pending_step = -1;

    auto record_landing = [&](ClusterId home) {
        if (current == &first) {
            first_home = home;
            // The vacated id is only for the first cluster; once it has
            // landed elsewhere, displaced strangers get genuinely new ids.
            revive_id = 0;
        }
        if (trace != nullptr && pending_step >= 0) {
            trace->topples[static_cast<std::size_t>(pending_step)].to_cross = home;
            pending_step = -1;
        }
    };
    auto fresh_home = [&]() -> CrosslingualCluster& {
        if (revive_id != 0) {
            ClusterId id = revive_id;
            revive_id = 0;
            return state.revive_cross_cluster(id);
        }
        return state.create_cross_cluster();
    };

    while (true) {
        std::vector<std::pair<ClusterId, double>> scored;
        for (const auto& [id, a] : state.cross_clusters()) {
            if (!cross_candidate_eligible(a, current->language, config.cross)) continue;
            if (!allow_displace && a.has_language(current->language)) continue;
            scored.emplace_back(id,
                                gamma1_to_crosslingual(state, *current, a, model, config.cross));
        }
        // Score-descending; the id-ascending map order breaks ties.
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& x, const auto& y) { return x.second > y.second; });

        MonolingualCluster* displaced = nullptr;
        bool placed = false;
        for (const auto& [id, score] : scored) {
            (void)score;
            CrosslingualCluster& a = state.cross(id);
            auto seat = a.members.find(current->language);
            if (seat == a.members.end()) {
                state.attach(*current, a);
                record_landing(a.id);
                placed = true;
                break;
            }
            MonolingualCluster& incumbent = state.get({current->language, seat->second});
            if (contest_win(state, *current, incumbent, a, model, config)) {
                incumbent.cross_id = 0;
                a.members.erase(seat);
                state.attach(*current, a);
                record_landing(a.id);
                if (trace != nullptr) {
                    trace->topples.push_back({incumbent.ref(), a.id, 0});
                    pending_step = static_cast<std::ptrdiff_t>(trace->topples.size()) - 1;
                }
                displaced = &incumbent;
                placed = true;
                break;
            }
        }

        if (!placed) {
            CrosslingualCluster& home = fresh_home();
            state.attach(*current, home);
            record_landing(home.id);
            return first_home;
        }
        if (displaced == nullptr) {
            return first_home;
        }
        ++displacements;
        if (displacements >= config.topple_budget) {
            // Budget spent: park the last displaced cluster instead of
            // letting the chain continue.
            current = displaced;
            CrosslingualCluster& home = fresh_home();
            state.attach(*current, home);
            record_landing(home.id);
            if (trace != nullptr) trace->topple_budget_exhausted = true;
            return first_home;
        }
        current = displaced;
    }
}

}  // namespace

ClusterId update_crosslingual(ClusteringState& state, MonolingualCluster& c,
                              const CrossSimilarityModel& model, const ClustererConfig& config,
                              DecisionTrace* trace) {
    if (config.cross.mode == CrossMode::Pivot && config.cross.pivot.empty()) {
        throw ConfigError("pivot crosslingual mode needs a pivot language");
    }
    if (config.g_update == GUpdateMode::Immutable) {
        if (c.cross_id != 0) {
            return c.cross_id;  // membership is final; sums already updated
        }
        return place_detached(state, c, model, config, trace, 0);
    }
    // Domino: re-derive the cluster's crosslingual home from scratch. If
    // detaching empties its old home we hold on to the id, so the cluster
    // gets it back when it stays alone.
    ClusterId revive_id = state.detach(c);
    return place_detached(state, c, model, config, trace, revive_id);
}

IngestResult ingest(ClusteringState& state, const Document& doc, const DocRepresentation& rep,
                    const ModelSet& models, const ClustererConfig& config) {
    if (state.has_document(doc.id)) {
        throw InputError("duplicate document id: " + doc.id);
    }

    SimilarityModel model = models.ranker_for(doc.language);
    auto candidates =
        score_candidates(state, rep, doc.language, model, config.use_candidate_index);
    auto best = best_candidate(candidates);
    auto maxima = feature_maxima(candidates);

    DecisionTrace trace;
    trace.doc_id = doc.id;
    trace.language = doc.language;
    {
        auto ranked = candidates;
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.score > b.score;
        });
        for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
            trace.top_candidates.emplace_back(ranked[i].id, ranked[i].score);
        }
    }

    bool join = best.has_value() &&
                merge_decision(best->score, maxima, config,
                               models.merge_model_for(doc.language),
                               config.tau_for(doc.language));
    MonolingualCluster* cluster;
    if (join) {
        cluster = &state.get({doc.language, best->id});
        state.add_document(*cluster, doc, rep);
    } else {
        cluster = &state.create_cluster(doc.language, doc, rep);
    }
    trace.joined = join;
    trace.best_score = best ? best->score : 0.0;
    trace.mono_id = cluster->id;

    ClusterId cross_id =
        update_crosslingual(state, *cluster, models.cross_ranker, config, &trace);
    trace.cross_id = cross_id;

    IngestResult result;
    result.mono = cluster->ref();
    result.cross_id = cross_id;
    result.trace = std::move(trace);
    return result;
}

}  // namespace storyline
