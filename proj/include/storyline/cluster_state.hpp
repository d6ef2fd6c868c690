#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "storyline/types.hpp"

namespace storyline {

using ClusterId = std::uint32_t;

// Names one monolingual cluster; ids are a per-language namespace.
struct MonoClusterRef {
    Language language;
    ClusterId id = 0;

    friend bool operator==(const MonoClusterRef& a, const MonoClusterRef& b) {
        return a.id == b.id && a.language == b.language;
    }
    friend bool operator<(const MonoClusterRef& a, const MonoClusterRef& b) {
        if (a.language != b.language) return a.language < b.language;
        return a.id < b.id;
    }
};

// Incremental centroid state for one monolingual story cluster. Stores
// running sums plus the member count, so insertion is O(nonzeros) and the
// centroid (sum / count) stays exact. Membership is append-only: a document
// never leaves the cluster it was assigned to.
struct MonolingualCluster {
    ClusterId id = 0;
    Language language;
    std::vector<std::string> member_ids;
    std::uint32_t count = 0;
    std::array<SparseVector, kMonoSubvectors> mono_sums;
    std::array<DenseVector, kCrossSubvectors> cross_sums;
    // Cached L2 norms of the sums, refreshed on every insertion.
    std::array<double, kMonoSubvectors> mono_norms{};
    std::array<double, kCrossSubvectors> cross_norms{};
    double ts_newest = 0.0;
    double ts_oldest = 0.0;
    double ts_sum = 0.0;
    // Crosslingual home (0 = not yet assigned).
    ClusterId cross_id = 0;

    double ts_avg() const { return count ? ts_sum / count : 0.0; }

    MonoClusterRef ref() const { return {language, id}; }

    // Centroid of one subvector slot, 0..8 sparse. Mean of the members.
    SparseVector mono_centroid(int index) const {
        if (index < 0 || index >= kMonoSubvectors) throw ConfigError("subvector index out of range");
        SparseVector c = mono_sums[index];
        if (count > 0) c.scale(1.0 / count);
        return c;
    }

    // Centroid of one dense slot, indices 9..11 of the combined layout
    // (or 0..2 when addressed directly).
    DenseVector cross_centroid(int index) const {
        if (index < 0 || index >= kCrossSubvectors) throw ConfigError("subvector index out of range");
        DenseVector c = cross_sums[index];
        if (count > 0)
            for (double& x : c) x /= count;
        return c;
    }
};

// A set of monolingual clusters, at most one per language.
struct CrosslingualCluster {
    ClusterId id = 0;
    std::map<Language, ClusterId> members;

    bool has_language(const Language& l) const { return members.count(l) > 0; }
    std::size_t size() const { return members.size(); }
};

// Per-language posting lists: term id -> clusters whose centroid support
// contains the term. Fed from the "both"-section subvectors, whose support
// is the union of title and body, so any cluster with a nonzero sparse
// cosine against a document appears in at least one consulted list.
struct CandidateIndex {
    std::unordered_map<TermId, std::vector<ClusterId>> postings;

    void add(TermId term, ClusterId cluster) { postings[term].push_back(cluster); }
};

// The whole clustering state: per-language monolingual cluster tables and
// the crosslingual table. Single-writer; stream insertion is sequential.
class ClusteringState {
public:
    // --- monolingual side -------------------------------------------------

    const std::deque<MonolingualCluster>& clusters(const Language& lang) const {
        static const std::deque<MonolingualCluster> empty;
        auto it = mono_.find(lang);
        return it == mono_.end() ? empty : it->second;
    }

    bool has_language(const Language& lang) const { return mono_.count(lang) > 0; }

    std::vector<Language> languages() const {
        std::vector<Language> out;
        out.reserve(mono_.size());
        for (const auto& [lang, tbl] : mono_) out.push_back(lang);
        return out;
    }

    MonolingualCluster& get(const MonoClusterRef& ref) {
        auto it = mono_.find(ref.language);
        if (it == mono_.end() || ref.id == 0 || ref.id > it->second.size())
            throw InputError("unknown monolingual cluster " + ref.language.code() + "/" +
                             std::to_string(ref.id));
        return it->second[ref.id - 1];
    }
    const MonolingualCluster& get(const MonoClusterRef& ref) const {
        return const_cast<ClusteringState*>(this)->get(ref);
    }

    // Allocates the next cluster id for the language (monotone from 1,
    // never reused) and inserts the first member.
    MonolingualCluster& create_cluster(const Language& lang, const Document& doc,
                                       const DocRepresentation& rep) {
        if (assignments_.count(doc.id)) throw InputError("duplicate document id: " + doc.id);
        auto& table = mono_[lang];
        MonolingualCluster c;
        c.id = static_cast<ClusterId>(table.size() + 1);
        c.language = lang;
        c.ts_newest = c.ts_oldest = doc.timestamp;
        table.push_back(std::move(c));
        add_document(table.back(), doc, rep);
        return table.back();
    }

    // Appends a document to a cluster: updates member list, sums, cached
    // norms, timestamp aggregates, the assignment map, and the candidate
    // index. Throws on duplicate document id.
    void add_document(MonolingualCluster& cluster, const Document& doc,
                      const DocRepresentation& rep) {
        auto [it, inserted] = assignments_.try_emplace(doc.id, cluster.ref());
        if (!inserted) throw InputError("duplicate document id: " + doc.id);

        cluster.member_ids.push_back(doc.id);
        if (cluster.count == 0) {
            cluster.ts_newest = cluster.ts_oldest = doc.timestamp;
        } else {
            cluster.ts_newest = std::max(cluster.ts_newest, doc.timestamp);
            cluster.ts_oldest = std::min(cluster.ts_oldest, doc.timestamp);
        }
        cluster.ts_sum += doc.timestamp;
        cluster.count += 1;

        std::vector<TermId> new_terms;
        for (int i = 0; i < kMonoSubvectors; ++i) {
            bool indexed = i == mono_subvector_index(FeatureClass::Tokens, Section::Both) ||
                           i == mono_subvector_index(FeatureClass::Lemmas, Section::Both) ||
                           i == mono_subvector_index(FeatureClass::Entities, Section::Both);
            new_terms.clear();
            cluster.mono_sums[i].add(rep.mono[i], indexed ? &new_terms : nullptr);
            if (prune_top_k_ > 0) cluster.mono_sums[i].prune_top_k(prune_top_k_);
            cluster.mono_norms[i] = cluster.mono_sums[i].norm();
            if (indexed)
                for (TermId t : new_terms) index_[cluster.language].add(t, cluster.id);
        }
        for (int i = 0; i < kCrossSubvectors; ++i) {
            dense_add(cluster.cross_sums[i], rep.cross[i]);
            cluster.cross_norms[i] = dense_norm(cluster.cross_sums[i]);
        }
    }

    bool has_document(const std::string& doc_id) const { return assignments_.count(doc_id) > 0; }

    const std::unordered_map<std::string, MonoClusterRef>& assignments() const {
        return assignments_;
    }

    const CandidateIndex* candidate_index(const Language& lang) const {
        auto it = index_.find(lang);
        return it == index_.end() ? nullptr : &it->second;
    }

    // Optional top-k cap on sparse centroid sums (0 = exact, unbounded).
    // Lossy; keep disabled when exact centroids matter.
    void set_prune_top_k(std::size_t k) { prune_top_k_ = k; }
    std::size_t prune_top_k() const { return prune_top_k_; }

    // --- crosslingual side ------------------------------------------------

    const std::map<ClusterId, CrosslingualCluster>& cross_clusters() const { return cross_; }

    CrosslingualCluster& cross(ClusterId id) {
        auto it = cross_.find(id);
        if (it == cross_.end()) throw InputError("unknown crosslingual cluster " + std::to_string(id));
        return it->second;
    }

    CrosslingualCluster& create_cross_cluster() {
        ClusterId id = next_cross_id_++;
        auto [it, ok] = cross_.emplace(id, CrosslingualCluster{id, {}});
        return it->second;
    }

    // Re-creates a cross cluster under a previously allocated id. Used to
    // give a detached cluster back its old (now empty, removed) home so
    // singleton stories keep a stable crosslingual id across updates.
    CrosslingualCluster& revive_cross_cluster(ClusterId id) {
        auto [it, ok] = cross_.emplace(id, CrosslingualCluster{id, {}});
        return it->second;
    }

    void attach(MonolingualCluster& mono, CrosslingualCluster& cross_cluster) {
        cross_cluster.members[mono.language] = mono.id;
        mono.cross_id = cross_cluster.id;
    }

    // Removes a mono cluster from its cross home; deletes the home if it
    // becomes empty (returns its id in that case so it can be revived).
    ClusterId detach(MonolingualCluster& mono) {
        ClusterId empty_home = 0;
        if (mono.cross_id != 0) {
            auto it = cross_.find(mono.cross_id);
            if (it != cross_.end()) {
                it->second.members.erase(mono.language);
                if (it->second.members.empty()) {
                    empty_home = it->first;
                    cross_.erase(it);
                }
            }
            mono.cross_id = 0;
        }
        return empty_home;
    }

private:
    std::map<Language, std::deque<MonolingualCluster>> mono_;
    std::map<ClusterId, CrosslingualCluster> cross_;
    ClusterId next_cross_id_ = 1;
    std::unordered_map<std::string, MonoClusterRef> assignments_;
    std::map<Language, CandidateIndex> index_;
    std::size_t prune_top_k_ = 0;
};

}  // namespace storyline
