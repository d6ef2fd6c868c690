#include "storyline/learning.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "storyline/evaluation.hpp"

namespace storyline {

namespace {

const std::string& require_story_label(const Document& doc) {
    if (!doc.gold_mono_label) {
        throw InputError("training requires a gold story label on every document; '" +
                         doc.id + "' has none");
    }
    return *doc.gold_mono_label;
}

std::vector<double> to_vector(const std::array<double, kMonoFeatures>& f) {
    return std::vector<double>(f.begin(), f.end());
}

}  // namespace

std::vector<RankingQuery> generate_ranking_data(const std::vector<DocRecord>& stream,
                                                const Language& language,
                                                const RankingDataOptions& options) {
    SimilarityModel probe = SimilarityModel::primary_only(options.mu, options.sigma);
    ClusteringState state;
    // Gold story labels seen per pool cluster, and the pool cluster of
    // each story for gold-mode assignment.
    std::unordered_map<ClusterId, std::unordered_set<std::string>> cluster_stories;
    std::unordered_map<std::string, ClusterId> story_cluster;

    std::vector<RankingQuery> queries;
    for (const DocRecord& r : stream) {
        if (r.doc.language != language) continue;
        const std::string& story = require_story_label(r.doc);

        auto candidates = score_candidates(state, r.rep, language, probe, false);

        std::vector<const CandidateScore*> positives, negatives;
        for (const auto& c : candidates) {
            auto it = cluster_stories.find(c.id);
            bool correct = it != cluster_stories.end() && it->second.count(story) > 0;
            (correct ? positives : negatives).push_back(&c);
        }
        if (!positives.empty()) {
            // Keep the hardest negatives: highest primary cosine first.
            std::stable_sort(negatives.begin(), negatives.end(),
                             [](const CandidateScore* a, const CandidateScore* b) {
                                 return a->features[kPrimarySubvector] >
                                        b->features[kPrimarySubvector];
                             });
            if (options.max_negatives >= 0 &&
                negatives.size() > static_cast<std::size_t>(options.max_negatives)) {
                negatives.resize(static_cast<std::size_t>(options.max_negatives));
            }
            RankingQuery q;
            q.query_id = r.doc.id;
            for (const CandidateScore* c : positives) {
                q.candidates.push_back({to_vector(c->features), true});
            }
            for (const CandidateScore* c : negatives) {
                q.candidates.push_back({to_vector(c->features), false});
            }
            queries.push_back(std::move(q));
        }

        // Advance the pool.
        MonolingualCluster* home = nullptr;
        if (options.pool_mode == PoolMode::Gold) {
            auto it = story_cluster.find(story);
            if (it != story_cluster.end()) {
                home = &state.get({language, it->second});
                state.add_document(*home, r.doc, r.rep);
            } else {
                home = &state.create_cluster(language, r.doc, r.rep);
                story_cluster.emplace(story, home->id);
            }
        } else {
            auto best = best_candidate(candidates);
            if (best && best->score > options.tau) {
                home = &state.get({language, best->id});
                state.add_document(*home, r.doc, r.rep);
            } else {
                home = &state.create_cluster(language, r.doc, r.rep);
            }
        }
        cluster_stories[home->id].insert(story);
    }
    return queries;
}

std::vector<RankingQuery> generate_cross_ranking_data(const std::vector<DocRecord>& stream,
                                                      const RankingDataOptions& options) {
    ClusteringState state;
    std::map<std::pair<Language, std::string>, ClusterId> story_cluster;
    // Gold crosslingual label of each pool cluster (gold pools are pure,
    // so the first labeled member decides).
    std::map<MonoClusterRef, std::string> cluster_cross_label;

    std::vector<RankingQuery> queries;
    for (const DocRecord& r : stream) {
        const std::string& story = require_story_label(r.doc);
        const Language& lang = r.doc.language;

        MonolingualCluster* home;
        auto key = std::make_pair(lang, story);
        auto it = story_cluster.find(key);
        if (it != story_cluster.end()) {
            home = &state.get({lang, it->second});
            state.add_document(*home, r.doc, r.rep);
        } else {
            home = &state.create_cluster(lang, r.doc, r.rep);
            story_cluster.emplace(key, home->id);
        }
        if (r.doc.gold_cross_label) {
            cluster_cross_label.try_emplace(home->ref(), *r.doc.gold_cross_label);
        }

        auto cit = cluster_cross_label.find(home->ref());
        if (cit == cluster_cross_label.end()) continue;
        const std::string& cross_label = cit->second;

        std::vector<RankingCandidate> positives, negatives;
        for (const Language& other : state.languages()) {
            if (other == lang) continue;
            for (const auto& cluster : state.clusters(other)) {
                auto f = gamma1_pair_features(*home, cluster, options.mu, options.sigma);
                RankingCandidate cand;
                cand.features.assign(f.begin(), f.end());
                auto lit = cluster_cross_label.find(cluster.ref());
                cand.positive = lit != cluster_cross_label.end() &&
                                lit->second == cross_label;
                (cand.positive ? positives : negatives).push_back(std::move(cand));
            }
        }
        if (positives.empty()) continue;
        std::stable_sort(negatives.begin(), negatives.end(),
                         [](const RankingCandidate& a, const RankingCandidate& b) {
                             return a.features[0] > b.features[0];
                         });
        if (options.max_negatives >= 0 &&
            negatives.size() > static_cast<std::size_t>(options.max_negatives)) {
            negatives.resize(static_cast<std::size_t>(options.max_negatives));
        }
        RankingQuery q;
        q.query_id = r.doc.id;
        for (auto& c : positives) q.candidates.push_back(std::move(c));
        for (auto& c : negatives) q.candidates.push_back(std::move(c));
        queries.push_back(std::move(q));
    }
    return queries;
}

namespace {

struct PairSet {
    // Margin-ordered pairs of one query: difference vectors x_pos - x_neg,
    // all sharing the weight 1 / (queries * pairs-in-query).
    std::vector<std::vector<double>> diffs;
    double weight = 0.0;
};

std::vector<double> train_weights(const std::vector<PairSet>& pair_sets, std::size_t dims,
                                  double lambda, int epochs, double lr) {
    std::vector<double> w(dims, 0.0);
    std::vector<double> grad(dims, 0.0);
    for (int t = 0; t < epochs; ++t) {
        for (std::size_t d = 0; d < dims; ++d) grad[d] = lambda * w[d];
        for (const auto& ps : pair_sets) {
            for (const auto& diff : ps.diffs) {
                double margin = 0.0;
                for (std::size_t d = 0; d < dims; ++d) margin += w[d] * diff[d];
                if (margin < 1.0) {
                    for (std::size_t d = 0; d < dims; ++d) grad[d] -= ps.weight * diff[d];
                }
            }
        }
        double eta = lr / (1.0 + lr * lambda * t);
        for (std::size_t d = 0; d < dims; ++d) w[d] -= eta * grad[d];
    }
    return w;
}

double agreement_on(const std::vector<double>& w, const std::vector<PairSet>& pair_sets) {
    std::uint64_t good = 0, total = 0;
    for (const auto& ps : pair_sets) {
        for (const auto& diff : ps.diffs) {
            double margin = 0.0;
            for (std::size_t d = 0; d < diff.size() && d < w.size(); ++d) {
                margin += w[d] * diff[d];
            }
            ++total;
            if (margin > 0.0) ++good;
        }
    }
    return total ? static_cast<double>(good) / static_cast<double>(total) : 0.0;
}

std::string query_fingerprint(const RankingQuery& q) {
    // Canonical byte string of the candidate set, ignoring order and the
    // query id, so duplicated queries collapse to one.
    std::vector<std::string> rows;
    rows.reserve(q.candidates.size());
    for (const auto& c : q.candidates) {
        std::string row(1, c.positive ? '+' : '-');
        row.resize(1 + c.features.size() * sizeof(double));
        std::memcpy(row.data() + 1, c.features.data(), c.features.size() * sizeof(double));
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    std::string key;
    for (const auto& r : rows) {
        key += r;
        key += '\x1e';
    }
    return key;
}

}  // namespace

double pairwise_agreement(const std::vector<double>& weights,
                          const std::vector<RankingQuery>& queries) {
    std::uint64_t good = 0, total = 0;
    for (const auto& q : queries) {
        for (const auto& p : q.candidates) {
            if (!p.positive) continue;
            for (const auto& n : q.candidates) {
                if (n.positive) continue;
                double margin = 0.0;
                for (std::size_t d = 0; d < p.features.size() && d < weights.size(); ++d) {
                    margin += weights[d] * (p.features[d] - n.features[d]);
                }
                ++total;
                if (margin > 0.0) ++good;
            }
        }
    }
    return total ? static_cast<double>(good) / static_cast<double>(total) : 0.0;
}

TrainedRanker train_ranker(const std::vector<RankingQuery>& queries,
                           const TrainOptions& options) {
    if (options.lambda_grid.empty()) {
        throw ConfigError("ranker training needs at least one lambda");
    }

    // Collapse duplicates, keep rankable queries in first-seen order.
    std::vector<const RankingQuery*> unique;
    {
        std::unordered_set<std::string> seen;
        for (const auto& q : queries) {
            if (!q.rankable()) continue;
            if (seen.insert(query_fingerprint(q)).second) {
                unique.push_back(&q);
            }
        }
    }
    if (unique.empty()) {
        throw InputError("ranking data holds no rankable query (need at least one query "
                         "with both a positive and a negative candidate)");
    }

    std::size_t dims = unique.front()->candidates.front().features.size();
    for (const RankingQuery* q : unique) {
        for (const auto& c : q->candidates) {
            if (c.features.size() != dims) {
                throw InputError("ranking data mixes feature arities (" +
                                 std::to_string(c.features.size()) + " vs " +
                                 std::to_string(dims) + ")");
            }
        }
    }

    std::mt19937_64 rng(options.seed);
    std::shuffle(unique.begin(), unique.end(), rng);

    // Precompute the difference vectors once.
    std::vector<PairSet> all;
    all.reserve(unique.size());
    std::size_t pair_count = 0;
    for (const RankingQuery* q : unique) {
        PairSet ps;
        for (const auto& p : q->candidates) {
            if (!p.positive) continue;
            for (const auto& n : q->candidates) {
                if (n.positive) continue;
                std::vector<double> diff(dims);
                for (std::size_t d = 0; d < dims; ++d) {
                    diff[d] = p.features[d] - n.features[d];
                }
                ps.diffs.push_back(std::move(diff));
            }
        }
        pair_count += ps.diffs.size();
        all.push_back(std::move(ps));
    }
    for (auto& ps : all) {
        ps.weight = 1.0 / (static_cast<double>(all.size()) *
                           static_cast<double>(ps.diffs.size()));
    }

    int folds = std::min<int>(options.folds, static_cast<int>(all.size()));
    folds = std::max(folds, 1);

    double best_lambda = options.lambda_grid.front();
    double best_acc = -1.0;
    for (double lambda : options.lambda_grid) {
        double acc_sum = 0.0;
        int counted = 0;
        if (folds < 2) {
            auto w = train_weights(all, dims, lambda, options.epochs, options.learning_rate);
            acc_sum = agreement_on(w, all);
            counted = 1;
        } else {
            for (int k = 0; k < folds; ++k) {
                std::vector<PairSet> train_set, held_out;
                for (std::size_t i = 0; i < all.size(); ++i) {
                    (static_cast<int>(i % folds) == k ? held_out : train_set)
                        .push_back(all[i]);
                }
                if (train_set.empty() || held_out.empty()) continue;
                // Re-normalize query weights for the fold's size.
                for (auto& ps : train_set) {
                    ps.weight = 1.0 / (static_cast<double>(train_set.size()) *
                                       static_cast<double>(ps.diffs.size()));
                }
                auto w = train_weights(train_set, dims, lambda, options.epochs,
                                       options.learning_rate);
                acc_sum += agreement_on(w, held_out);
                ++counted;
            }
        }
        double acc = counted ? acc_sum / counted : 0.0;
        if (acc >= best_acc) {  // ties to the larger lambda (grid ascends)
            best_acc = acc;
            best_lambda = lambda;
        }
    }

    TrainedRanker out;
    out.weights = train_weights(all, dims, best_lambda, options.epochs, options.learning_rate);
    out.chosen_lambda = best_lambda;
    out.cv_accuracy = best_acc;
    out.query_count = all.size();
    out.pair_count = pair_count;
    return out;
}

TrainedMerge train_merge(const std::vector<DocRecord>& stream, const Language& language,
                         const SimilarityModel& ranker, const MergeTrainOptions& options) {
    SimilarityModel probe = SimilarityModel::primary_only(ranker.mu, ranker.sigma);
    ClusteringState state;
    std::unordered_map<std::string, ClusterId> story_cluster;

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (const DocRecord& r : stream) {
        if (r.doc.language != language) continue;
        const std::string& story = require_story_label(r.doc);

        auto candidates = score_candidates(state, r.rep, language, probe, false);
        if (!candidates.empty()) {
            xs.push_back(to_vector(feature_maxima(candidates)));
            ys.push_back(story_cluster.count(story) ? +1 : -1);
        }

        auto it = story_cluster.find(story);
        if (it != story_cluster.end()) {
            state.add_document(state.get({language, it->second}), r.doc, r.rep);
        } else {
            story_cluster.emplace(story, state.create_cluster(language, r.doc, r.rep).id);
        }
    }
    if (xs.empty()) {
        throw InputError("merge training saw no decisions for language '" + language.code() +
                         "'");
    }

    TrainedMerge out;
    out.example_count = xs.size();

    bool any_pos = false, any_neg = false;
    for (int y : ys) (y > 0 ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) {
        out.degenerate = true;
        out.model.weights.fill(0.0);
        out.model.bias = any_pos ? 1.0 : -1.0;
        out.cv_accuracy = 1.0;
        return out;
    }

    // Binary hinge classification on augmented vectors [x, 1]; the last
    // weight is the bias and stays unregularized.
    const std::size_t dims = kMonoFeatures + 1;
    const TrainOptions& opt = options.optimizer;
    if (opt.lambda_grid.empty()) {
        throw ConfigError("merge training needs at least one lambda");
    }

    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(opt.seed);
    std::shuffle(order.begin(), order.end(), rng);

    auto train_on = [&](const std::vector<std::size_t>& idx, double lambda) {
        std::vector<double> w(dims, 0.0);
        std::vector<double> grad(dims, 0.0);
        double inv_n = 1.0 / static_cast<double>(idx.size());
        for (int t = 0; t < opt.epochs; ++t) {
            for (std::size_t d = 0; d + 1 < dims; ++d) grad[d] = lambda * w[d];
            grad[dims - 1] = 0.0;
            for (std::size_t i : idx) {
                double s = w[dims - 1];
                for (int d = 0; d < kMonoFeatures; ++d) s += w[d] * xs[i][d];
                if (ys[i] * s < 1.0) {
                    for (int d = 0; d < kMonoFeatures; ++d) {
                        grad[d] -= inv_n * ys[i] * xs[i][d];
                    }
                    grad[dims - 1] -= inv_n * ys[i];
                }
            }
            double eta = opt.learning_rate / (1.0 + opt.learning_rate * lambda * t);
            for (std::size_t d = 0; d < dims; ++d) w[d] -= eta * grad[d];
        }
        return w;
    };
    auto accuracy_on = [&](const std::vector<double>& w, const std::vector<std::size_t>& idx) {
        std::uint64_t good = 0;
        for (std::size_t i : idx) {
            double s = w[dims - 1];
            for (int d = 0; d < kMonoFeatures; ++d) s += w[d] * xs[i][d];
            bool join = s > 0.0;
            if (join == (ys[i] > 0)) ++good;
        }
        return idx.empty() ? 0.0 : static_cast<double>(good) / idx.size();
    };

    int folds = std::max(1, std::min<int>(opt.folds, static_cast<int>(order.size())));
    double best_lambda = opt.lambda_grid.front();
    double best_acc = -1.0;
    for (double lambda : opt.lambda_grid) {
        double acc_sum = 0.0;
        int counted = 0;
        if (folds < 2) {
            acc_sum = accuracy_on(train_on(order, lambda), order);
            counted = 1;
        } else {
            for (int k = 0; k < folds; ++k) {
                std::vector<std::size_t> train_idx, held_out;
                for (std::size_t i = 0; i < order.size(); ++i) {
                    (static_cast<int>(i % folds) == k ? held_out : train_idx)
                        .push_back(order[i]);
                }
                if (train_idx.empty() || held_out.empty()) continue;
                acc_sum += accuracy_on(train_on(train_idx, lambda), held_out);
                ++counted;
            }
        }
        double acc = counted ? acc_sum / counted : 0.0;
        if (acc >= best_acc) {
            best_acc = acc;
            best_lambda = lambda;
        }
    }

    auto w = train_on(order, best_lambda);
    for (int d = 0; d < kMonoFeatures; ++d) out.model.weights[d] = w[d];
    out.model.bias = w[dims - 1];
    out.cv_accuracy = best_acc;
    return out;
}

std::map<Language, TauResult> tune_tau(const std::vector<DocRecord>& dev,
                                       const ModelSet& models, const ClustererConfig& base,
                                       const std::vector<double>& grid, int refine_window) {
    if (grid.empty()) {
        throw ConfigError("tau tuning needs a non-empty threshold grid");
    }
    std::vector<double> taus = grid;
    std::sort(taus.begin(), taus.end());

    std::set<Language> langs;
    for (const DocRecord& r : dev) {
        require_story_label(r.doc);
        langs.insert(r.doc.language);
    }
    if (langs.empty()) {
        throw InputError("tau tuning needs a non-empty development stream");
    }

    // One replay per distinct grid point, shared across languages.
    std::map<std::size_t, std::map<Language, double>> memo;
    auto f1_at = [&](std::size_t gi) -> const std::map<Language, double>& {
        auto mit = memo.find(gi);
        if (mit != memo.end()) return mit->second;

        ClustererConfig config = base;
        config.merge_policy = MergePolicy::Threshold;
        config.tau = taus[gi];
        config.tau_overrides.clear();
        ClusteringState state;
        for (const DocRecord& r : dev) {
            ingest(state, r.doc, r.rep, models, config);
        }
        std::map<Language, double> scores;
        for (const Language& lang : langs) {
            std::unordered_map<std::string, std::string> pred, gold;
            for (const DocRecord& r : dev) {
                if (r.doc.language != lang) continue;
                const MonoClusterRef& ref = state.assignments().at(r.doc.id);
                pred[r.doc.id] = std::to_string(ref.id);
                gold[r.doc.id] = *r.doc.gold_mono_label;
            }
            scores[lang] = pairwise_metrics(pred, gold).f1;
        }
        return memo.emplace(gi, std::move(scores)).first->second;
    };

    // Coarse bracketing pass at the window stride, then an exhaustive
    // sweep of the bracketed window. For a unimodal F1 curve the true
    // argmax lies within one stride of the best coarse point, so the
    // sweep recovers it exactly; plateaus and mild non-unimodality are
    // handled by sampling the whole range.
    const std::size_t stride = static_cast<std::size_t>(std::max(refine_window, 1));
    std::map<Language, TauResult> out;
    for (const Language& lang : langs) {
        auto f = [&](std::size_t gi) { return f1_at(gi).at(lang); };

        std::size_t seed = 0;
        for (std::size_t gi = 0; gi < taus.size(); gi += stride) {
            if (f(gi) > f(seed)) seed = gi;
        }
        if (f(taus.size() - 1) > f(seed)) seed = taus.size() - 1;

        std::size_t from = seed > stride ? seed - stride : 0;
        std::size_t to = std::min(seed + stride, taus.size() - 1);
        std::size_t best = from;
        for (std::size_t gi = from; gi <= to; ++gi) {
            if (f(gi) > f(best)) best = gi;  // ties keep the smaller tau
        }
        out[lang] = TauResult{taus[best], f(best)};
    }
    return out;
}

}  // namespace storyline
