#include "storyline/similarity.hpp"

#include <cmath>

namespace storyline {

double time_feature(double delta_hours, double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw ConfigError("timestamp feature needs sigma > 0");
    }
    double z = (delta_hours - mu) / sigma;
    return std::exp(-0.5 * z * z);
}

SimilarityModel SimilarityModel::all_ones(double mu, double sigma) {
    SimilarityModel m;
    m.subvector_weights.fill(1.0);
    m.timestamp_weights.fill(1.0);
    m.mu = mu;
    m.sigma = sigma;
    return m;
}

SimilarityModel SimilarityModel::primary_only(double mu, double sigma) {
    SimilarityModel m;
    m.subvector_weights.fill(0.0);
    m.subvector_weights[kPrimarySubvector] = 1.0;
    m.timestamp_weights.fill(0.0);
    m.mu = mu;
    m.sigma = sigma;
    return m;
}

CrossSimilarityModel CrossSimilarityModel::all_ones(double mu, double sigma) {
    CrossSimilarityModel m;
    m.subvector_weights.fill(1.0);
    m.timestamp_weights.fill(1.0);
    m.mu = mu;
    m.sigma = sigma;
    return m;
}

std::array<double, kMonoFeatures> gamma0_features(const DocRepresentation& rep,
                                                  const MonolingualCluster& cluster,
                                                  double mu, double sigma) {
    std::array<double, kMonoFeatures> f{};
    for (int i = 0; i < kMonoSubvectors; ++i) {
        // Document subvectors are unit-length (or zero); the cluster side
        // uses the cached norm of the running sum.
        double cn = cluster.mono_norms[i];
        double dn = rep.mono[i].norm();
        f[i] = (cn > 0.0 && dn > 0.0)
                   ? rep.mono[i].dot(cluster.mono_sums[i]) / (cn * dn)
                   : 0.0;
    }
    f[kMonoSubvectors + 0] = time_feature(rep.timestamp - cluster.ts_newest, mu, sigma);
    f[kMonoSubvectors + 1] = time_feature(rep.timestamp - cluster.ts_avg(), mu, sigma);
    f[kMonoSubvectors + 2] = time_feature(rep.timestamp - cluster.ts_oldest, mu, sigma);
    return f;
}

double gamma0(const DocRepresentation& rep, const MonolingualCluster& cluster,
              const SimilarityModel& model) {
    auto f = gamma0_features(rep, cluster, model.mu, model.sigma);
    double s = 0.0;
    for (int i = 0; i < kMonoSubvectors; ++i) s += model.subvector_weights[i] * f[i];
    for (int i = 0; i < 3; ++i) s += model.timestamp_weights[i] * f[kMonoSubvectors + i];
    return s;
}

std::array<double, kCrossFeatures> gamma1_pair_features(const MonolingualCluster& a,
                                                        const MonolingualCluster& b,
                                                        double mu, double sigma) {
    std::array<double, kCrossFeatures> f{};
    for (int i = 0; i < kCrossSubvectors; ++i) {
        double na = a.cross_norms[i];
        double nb = b.cross_norms[i];
        f[i] = (na > 0.0 && nb > 0.0)
                   ? dense_dot(a.cross_sums[i], b.cross_sums[i]) / (na * nb)
                   : 0.0;
    }
    f[kCrossSubvectors + 0] = time_feature(a.ts_newest - b.ts_newest, mu, sigma);
    f[kCrossSubvectors + 1] = time_feature(a.ts_avg() - b.ts_avg(), mu, sigma);
    f[kCrossSubvectors + 2] = time_feature(a.ts_oldest - b.ts_oldest, mu, sigma);
    return f;
}

double gamma1_pair(const MonolingualCluster& a, const MonolingualCluster& b,
                   const CrossSimilarityModel& model) {
    auto f = gamma1_pair_features(a, b, model.mu, model.sigma);
    double s = 0.0;
    for (int i = 0; i < kCrossSubvectors; ++i) s += model.subvector_weights[i] * f[i];
    for (int i = 0; i < 3; ++i) s += model.timestamp_weights[i] * f[kCrossSubvectors + i];
    return s;
}

bool cross_candidate_eligible(const CrosslingualCluster& a, const Language& incoming,
                              const CrossScoringOptions& options) {
    if (options.mode == CrossMode::Sum) return true;
    if (a.has_language(options.pivot)) return true;
    if (incoming == options.pivot) return true;  // every pair involves the pivot
    return options.pivot_fallback_to_sum;
}

double gamma1_to_members(const MonolingualCluster& c,
                         const std::vector<const MonolingualCluster*>& members,
                         const CrossSimilarityModel& model,
                         const CrossScoringOptions& options) {
    if (options.mode == CrossMode::Pivot) {
        if (options.pivot.empty()) {
            throw ConfigError("pivot crosslingual scoring needs a pivot language");
        }
        for (const MonolingualCluster* m : members) {
            if (m->language == options.pivot) {
                return gamma1_pair(c, *m, model);
            }
        }
        // No pivot member: fall through to sum (caller gates eligibility).
    }
    double s = 0.0;
    for (const MonolingualCluster* m : members) {
        s += gamma1_pair(c, *m, model);
    }
    return s;
}

double gamma1_to_crosslingual(const ClusteringState& state, const MonolingualCluster& c,
                              const CrosslingualCluster& a, const CrossSimilarityModel& model,
                              const CrossScoringOptions& options) {
    std::vector<const MonolingualCluster*> members;
    members.reserve(a.members.size());
    for (const auto& [lang, id] : a.members) {
        members.push_back(&state.get({lang, id}));
    }
    return gamma1_to_members(c, members, model, options);
}

}  // namespace storyline
