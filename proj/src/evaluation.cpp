#include "storyline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace storyline {

namespace {

std::uint64_t pairs_of(std::uint64_t n) { return n * (n - 1) / 2; }

}  // namespace

PairwiseMetrics pairwise_metrics(const std::unordered_map<std::string, std::string>& predicted,
                                 const std::unordered_map<std::string, std::string>& gold) {
    if (predicted.size() != gold.size()) {
        throw InputError("pairwise metrics: partitions cover different item sets (" +
                         std::to_string(predicted.size()) + " vs " +
                         std::to_string(gold.size()) + " items)");
    }

    // Intern labels on both sides, then count the contingency table
    // n[p][g] plus the marginals.
    std::unordered_map<std::string, std::uint32_t> pred_ids, gold_ids;
    std::vector<std::uint64_t> pred_sizes, gold_sizes;
    std::unordered_map<std::uint64_t, std::uint64_t> cells;

    for (const auto& [item, pred_label] : predicted) {
        auto git = gold.find(item);
        if (git == gold.end()) {
            throw InputError("pairwise metrics: item '" + item +
                             "' missing from the gold partition");
        }
        auto [pit, pnew] = pred_ids.try_emplace(pred_label,
                                                static_cast<std::uint32_t>(pred_ids.size()));
        if (pnew) pred_sizes.push_back(0);
        auto [jit, gnew] = gold_ids.try_emplace(git->second,
                                                static_cast<std::uint32_t>(gold_ids.size()));
        if (gnew) gold_sizes.push_back(0);
        ++pred_sizes[pit->second];
        ++gold_sizes[jit->second];
        std::uint64_t key = (static_cast<std::uint64_t>(pit->second) << 32) | jit->second;
        ++cells[key];
    }

    PairwiseMetrics m;
    std::uint64_t together_both = 0;
    for (const auto& [key, n] : cells) {
        (void)key;
        together_both += pairs_of(n);
    }
    std::uint64_t together_pred =
        std::accumulate(pred_sizes.begin(), pred_sizes.end(), std::uint64_t{0},
                        [](std::uint64_t acc, std::uint64_t n) { return acc + pairs_of(n); });
    std::uint64_t together_gold =
        std::accumulate(gold_sizes.begin(), gold_sizes.end(), std::uint64_t{0},
                        [](std::uint64_t acc, std::uint64_t n) { return acc + pairs_of(n); });

    m.tp = together_both;
    m.fp = together_pred - together_both;
    m.fn = together_gold - together_both;
    m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / (m.tp + m.fp) : 1.0;
    m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 1.0;
    m.f1 = (m.precision + m.recall > 0.0)
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

CrosslingualInstance build_crosslingual_instance(
    const std::vector<DocAssignment>& assignments,
    const std::unordered_map<std::string, const Document*>& gold_docs) {
    // Majority gold crosslingual label per gold story, over all documents.
    std::map<std::string, std::map<std::string, std::uint64_t>> story_cross_votes;
    for (const auto& [id, doc] : gold_docs) {
        (void)id;
        if (doc->gold_mono_label && doc->gold_cross_label) {
            ++story_cross_votes[*doc->gold_mono_label][*doc->gold_cross_label];
        }
    }
    auto majority = [](const std::map<std::string, std::uint64_t>& votes) -> std::string {
        std::string best;
        std::uint64_t best_n = 0;
        for (const auto& [label, n] : votes) {
            if (n > best_n) {  // ties go to the lexicographically first label
                best = label;
                best_n = n;
            }
        }
        return best;
    };
    std::map<std::string, std::string> story_cross;
    for (const auto& [story, votes] : story_cross_votes) {
        story_cross[story] = majority(votes);
    }

    // Group documents by predicted monolingual cluster and vote for the
    // majority gold story per cluster.
    std::map<std::string, std::map<std::string, std::uint64_t>> cluster_story_votes;
    std::map<std::string, ClusterId> cluster_cross;
    for (const auto& a : assignments) {
        std::string key = a.language.code() + "/" + std::to_string(a.mono_cluster);
        cluster_cross[key] = a.cross_cluster;
        auto dit = gold_docs.find(a.doc_id);
        if (dit == gold_docs.end()) {
            throw InputError("crosslingual evaluation: document '" + a.doc_id +
                             "' missing from the gold stream");
        }
        if (dit->second->gold_mono_label) {
            ++cluster_story_votes[key][*dit->second->gold_mono_label];
        } else {
            cluster_story_votes.try_emplace(key);
        }
    }

    CrosslingualInstance inst;
    std::uint64_t singleton = 0;
    for (const auto& [key, votes] : cluster_story_votes) {
        inst.predicted[key] = "x/" + std::to_string(cluster_cross[key]);
        std::string story = votes.empty() ? std::string() : majority(votes);
        auto sit = story.empty() ? story_cross.end() : story_cross.find(story);
        if (sit != story_cross.end()) {
            inst.gold[key] = "g/" + sit->second;
        } else {
            // No labeled gold story to match: the cluster stands alone.
            inst.gold[key] = "solo/" + std::to_string(singleton++);
        }
    }
    return inst;
}

namespace {

struct MicroCluster {
    std::uint32_t id = 0;
    SparseVector sum;      // linear sum of member vectors
    double sumsq = 0.0;    // sum of squared member norms
    std::uint64_t n = 0;

    // Squared distance from a vector to the mean.
    double dist2(const SparseVector& x, double x_norm2) const {
        double mean_dot = sum.dot(x) / static_cast<double>(n);
        double mean_norm2 = sum.dot(sum) / (static_cast<double>(n) * static_cast<double>(n));
        return std::max(0.0, x_norm2 - 2.0 * mean_dot + mean_norm2);
    }

    // Squared distance between the means of two micro-clusters.
    double mean_dist2(const MicroCluster& o) const {
        double a = sum.dot(sum) / (static_cast<double>(n) * static_cast<double>(n));
        double b = o.sum.dot(o.sum) / (static_cast<double>(o.n) * static_cast<double>(o.n));
        double ab = sum.dot(o.sum) / (static_cast<double>(n) * static_cast<double>(o.n));
        return std::max(0.0, a + b - 2.0 * ab);
    }

    // RMS deviation of members about the mean.
    double rms() const {
        double mean_norm2 = sum.dot(sum) / (static_cast<double>(n) * static_cast<double>(n));
        double var = sumsq / static_cast<double>(n) - mean_norm2;
        return std::sqrt(std::max(0.0, var));
    }

    void absorb(const SparseVector& x, double x_norm2) {
        sum.add(x);
        sumsq += x_norm2;
        n += 1;
    }

    void absorb(const MicroCluster& o) {
        sum.add(o.sum);
        sumsq += o.sumsq;
        n += o.n;
    }
};

struct UnionFind {
    std::vector<std::uint32_t> parent;

    std::uint32_t add() {
        parent.push_back(static_cast<std::uint32_t>(parent.size()));
        return parent.back();
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::unordered_map<std::string, std::string> microcluster_baseline(
    const std::vector<const Document*>& stream,
    const std::vector<const DocRepresentation*>& representations,
    const BaselineConfig& config) {
    if (stream.size() != representations.size()) {
        throw InputError("baseline: stream and representation counts differ");
    }
    if (config.boundary_factor <= 0.0) {
        throw ConfigError("baseline boundary factor must be positive");
    }
    if (!stream.empty()) {
        const Language& lang = stream.front()->language;
        for (const Document* d : stream) {
            if (d->language != lang) {
                throw InputError("baseline expects a monolingual stream; saw '" +
                                 lang.code() + "' and '" + d->language.code() + "'");
            }
        }
    }

    std::vector<MicroCluster> live;        // active micro-clusters
    UnionFind labels;                      // original micro id -> merged label
    std::unordered_map<std::string, std::uint32_t> doc_micro;

    auto closest_pair = [&]() -> std::pair<std::size_t, std::size_t> {
        std::pair<std::size_t, std::size_t> best{0, 1};
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < live.size(); ++i) {
            for (std::size_t j = i + 1; j < live.size(); ++j) {
                double d = live[i].mean_dist2(live[j]);
                if (d < best_d) {
                    best_d = d;
                    best = {i, j};
                }
            }
        }
        return best;
    };

    for (std::size_t k = 0; k < stream.size(); ++k) {
        const SparseVector& x = representations[k]->mono[kPrimarySubvector];
        double x_norm2 = x.dot(x);

        std::size_t nearest = live.size();
        double nearest_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < live.size(); ++i) {
            double d2 = live[i].dist2(x, x_norm2);
            if (d2 < nearest_d2) {
                nearest_d2 = d2;
                nearest = i;
            }
        }

        bool joined = false;
        if (nearest < live.size()) {
            double boundary;
            if (live[nearest].n > 1) {
                boundary = config.boundary_factor * live[nearest].rms();
            } else {
                // Singleton: boundary is the distance to the closest other
                // micro-cluster (unbounded when it is the only one).
                boundary = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < live.size(); ++i) {
                    if (i == nearest) continue;
                    boundary = std::min(boundary,
                                        std::sqrt(live[nearest].mean_dist2(live[i])));
                }
            }
            if (std::sqrt(nearest_d2) <= boundary) {
                live[nearest].absorb(x, x_norm2);
                doc_micro[stream[k]->id] = live[nearest].id;
                joined = true;
            }
        }
        if (!joined) {
            if (config.max_clusters > 0 && live.size() >= config.max_clusters) {
                if (live.size() < 2) {
                    // Capacity 1: nothing to merge, the lone cluster takes
                    // everything.
                    live[0].absorb(x, x_norm2);
                    doc_micro[stream[k]->id] = live[0].id;
                    continue;
                }
                auto [i, j] = closest_pair();
                labels.unite(live[j].id, live[i].id);
                live[i].absorb(live[j]);
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(j));
            }
            MicroCluster fresh;
            fresh.id = labels.add();
            fresh.absorb(x, x_norm2);
            doc_micro[stream[k]->id] = fresh.id;
            live.push_back(std::move(fresh));
        }
    }

    std::unordered_map<std::string, std::string> out;
    out.reserve(doc_micro.size());
    for (const auto& [id, micro] : doc_micro) {
        out[id] = "m/" + std::to_string(labels.find(micro));
    }
    return out;
}

}  // namespace storyline
