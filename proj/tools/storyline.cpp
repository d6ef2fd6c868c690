// Command-line front end: IDF building, online clustering, training,
// threshold tuning, evaluation, and the micro-cluster baseline.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "storyline/annotator.hpp"
#include "storyline/clusterer.hpp"
#include "storyline/embeddings.hpp"
#include "storyline/evaluation.hpp"
#include "storyline/featurizer.hpp"
#include "storyline/idf.hpp"
#include "storyline/learning.hpp"
#include "storyline/pipeline.hpp"
#include "storyline/stream_io.hpp"
#include "storyline/term_dict.hpp"
#include "storyline/types.hpp"

namespace {

using namespace storyline;
using ordered_json = nlohmann::ordered_json;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("unable to open output file for writing: " + path);
    }
    return out;
}

// Flags shared by every command that reads a document stream.
struct StreamOpts {
    std::string input;
    std::string idf;
    std::string embeddings;
    std::string annotator = "none";

    void add_to(CLI::App& cmd, bool idf_required) {
        cmd.add_option("--input", input, "Document stream (JSONL)")
            ->required();
        auto* idf_opt = cmd.add_option("--idf", idf, "IDF table built by build-idf");
        if (idf_required) idf_opt->required();
        cmd.add_option("--embeddings", embeddings,
                       "Word embeddings in text format (word v1 .. vm)");
        cmd.add_option("--annotator", annotator,
                       "Linguistic preprocessing: none or external-command:<cmd>");
    }

    void fingerprint_into(RunSettings& s) const {
        s.set("input", input);
        s.set("idf", idf);
        s.set("embeddings", embeddings);
        s.set("annotator", annotator);
    }
};

// Loaded stream plus everything needed to featurize it.
struct LoadedStream {
    std::vector<Document> docs;
    IdfTable idf;
    std::optional<EmbeddingTable> embeddings;
    std::unique_ptr<Annotator> annotator;
    std::unique_ptr<TermDict> dict;
    std::unique_ptr<Featurizer> featurizer;

    explicit LoadedStream(const StreamOpts& opts) {
        docs = read_documents_file(opts.input);
        if (docs.empty()) {
            throw InputError("input stream '" + opts.input + "' holds no documents");
        }
        idf = IdfTable::load_file(opts.idf);
        if (!opts.embeddings.empty()) {
            embeddings = EmbeddingTable::load_file(opts.embeddings);
        }
        annotator = make_annotator(opts.annotator);
        dict = std::make_unique<TermDict>();
        featurizer = std::make_unique<Featurizer>(
            idf, embeddings ? &*embeddings : nullptr, *annotator, *dict);
    }

    std::vector<DocRecord> featurize_all() const {
        std::vector<DocRecord> records;
        records.reserve(docs.size());
        for (const Document& d : docs) {
            records.push_back({d, featurizer->represent(d)});
        }
        return records;
    }
};

// Flags controlling the clustering engine.
struct EngineOpts {
    std::string ranker;
    std::string merge_model;
    std::string tau_overrides;
    double tau = 0.0;
    double sigma_hours = 72.0;
    std::string cross_mode = "sum";
    std::string pivot = "en";
    bool pivot_fallback = false;
    std::string g_update = "domino";
    std::string contest = "residual";
    int topple_budget = 1000;
    double slack_hours = 72.0;
    bool use_index = false;
    std::size_t prune_top_k = 0;
    std::uint64_t seed = 1;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--ranker", ranker, "Trained similarity models (JSON)");
        cmd.add_option("--merge-model", merge_model,
                       "Trained join/new classifier (JSON); switches the merge policy "
                       "from threshold to classifier");
        cmd.add_option("--tau", tau, "Join threshold for the threshold merge policy")
            ->capture_default_str();
        cmd.add_option("--tau-overrides", tau_overrides,
                       "Per-language thresholds written by tune-tau (JSON)");
        cmd.add_option("--sigma-hours", sigma_hours,
                       "Gaussian width of the timestamp features for untrained models")
            ->capture_default_str();
        cmd.add_option("--cross-mode", cross_mode, "Crosslingual scoring: sum or pivot")
            ->check(CLI::IsMember({"sum", "pivot"}))
            ->capture_default_str();
        cmd.add_option("--pivot", pivot, "Pivot language for --cross-mode pivot")
            ->capture_default_str();
        cmd.add_flag("--pivot-fallback", pivot_fallback,
                     "Pivot mode: score clusters without a pivot member by the sum "
                     "rule instead of skipping them");
        cmd.add_option("--g-update", g_update,
                       "Crosslingual update rule: immutable or domino")
            ->check(CLI::IsMember({"immutable", "domino"}))
            ->capture_default_str();
        cmd.add_option("--contest", contest,
                       "Displacement contest scoring: residual or naive")
            ->check(CLI::IsMember({"residual", "naive"}))
            ->capture_default_str();
        cmd.add_option("--topple-budget", topple_budget,
                       "Max crosslingual displacements per document")
            ->capture_default_str();
        cmd.add_option("--slack-hours", slack_hours,
                       "How far a document may lag the newest timestamp seen")
            ->capture_default_str();
        cmd.add_flag("--use-index", use_index,
                     "Shortlist monolingual candidates through the term index");
        cmd.add_option("--prune-top-k", prune_top_k,
                       "Keep only the k heaviest terms per centroid sum (0 = exact)");
        cmd.add_option("--seed", seed, "Random seed recorded with the run")
            ->capture_default_str();
    }

    ModelSet load_models() const {
        ModelSet models;
        models.default_sigma = sigma_hours;
        if (!ranker.empty()) {
            models = load_models_file(ranker);
        }
        if (!merge_model.empty()) {
            models.merge_models = load_merge_models_file(merge_model);
        }
        return models;
    }

    ClustererConfig make_config() const {
        ClustererConfig config;
        config.merge_policy =
            merge_model.empty() ? MergePolicy::Threshold : MergePolicy::Classifier;
        config.tau = tau;
        if (!tau_overrides.empty()) {
            std::ifstream in(tau_overrides, std::ios::binary);
            if (!in) throw ConfigError("unable to open tau file: " + tau_overrides);
            ordered_json root;
            try {
                root = ordered_json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw InputError("tau file: invalid JSON (" + std::string(e.what()) + ")");
            }
            if (auto it = root.find("per_language"); it != root.end()) {
                for (const auto& [code, entry] : it->items()) {
                    config.tau_overrides[Language(code)] =
                        entry.is_object() ? entry.at("tau").get<double>()
                                          : entry.get<double>();
                }
            }
        }
        config.g_update =
            g_update == "immutable" ? GUpdateMode::Immutable : GUpdateMode::Domino;
        config.cross.mode = cross_mode == "pivot" ? CrossMode::Pivot : CrossMode::Sum;
        config.cross.pivot = Language(pivot);
        config.cross.pivot_fallback_to_sum = pivot_fallback;
        config.contest =
            contest == "naive" ? ContestConvention::Naive : ContestConvention::Residual;
        if (topple_budget < 1) {
            throw ConfigError("--topple-budget must be at least 1");
        }
        config.topple_budget = topple_budget;
        config.use_candidate_index = use_index;
        return config;
    }

    void fingerprint_into(RunSettings& s) const {
        s.set("ranker", ranker);
        s.set("merge_model", merge_model);
        s.set("tau", std::to_string(tau));
        s.set("tau_overrides", tau_overrides);
        s.set("sigma_hours", std::to_string(sigma_hours));
        s.set("cross_mode", cross_mode);
        s.set("pivot", pivot);
        s.set("pivot_fallback", pivot_fallback ? "1" : "0");
        s.set("g_update", g_update);
        s.set("contest", contest);
        s.set("topple_budget", std::to_string(topple_budget));
        s.set("slack_hours", std::to_string(slack_hours));
        s.set("use_index", use_index ? "1" : "0");
        s.set("prune_top_k", std::to_string(prune_top_k));
        s.set("seed", std::to_string(seed));
    }
};

// ---------------------------------------------------------------------------

int cmd_build_idf(const std::string& input, const std::string& output,
                  const std::string& annotator_setting,
                  const std::vector<std::string>& languages) {
    auto docs = read_documents_file(input);
    auto annotator = make_annotator(annotator_setting);
    IdfTable table;
    if (languages.empty()) {
        table = build_idf_all(docs, *annotator);
    } else {
        std::vector<Language> langs;
        langs.reserve(languages.size());
        for (const auto& code : languages) langs.emplace_back(code);
        table = build_idf_languages(docs, langs, *annotator);
    }
    table.save_file(output);
    std::cerr << "idf: " << table.term_count() << " terms across "
              << table.languages().size() << " language(s) -> " << output << "\n";
    return 0;
}

int cmd_cluster(const StreamOpts& stream_opts, const EngineOpts& engine_opts,
                const std::string& output, const std::string& trace_path,
                const std::string& snapshot_path) {
    RunSettings settings;
    settings.set("command", "cluster");
    stream_opts.fingerprint_into(settings);
    engine_opts.fingerprint_into(settings);
    const std::string fp = fingerprint(settings);

    LoadedStream stream(stream_opts);
    ModelSet models = engine_opts.load_models();
    ClustererConfig config = engine_opts.make_config();

    ClusterPipeline pipeline(*stream.featurizer, models, config, engine_opts.slack_hours);
    pipeline.state().set_prune_top_k(engine_opts.prune_top_k);

    std::optional<std::ofstream> trace_out;
    if (!trace_path.empty()) trace_out = open_output(trace_path);

    std::size_t topples = 0;
    for (const Document& doc : stream.docs) {
        IngestResult result = pipeline.process(doc);
        topples += result.trace.topples.size();
        if (trace_out) write_trace_line(*trace_out, result.trace);
    }

    auto out = open_output(output);
    write_assignments(out, pipeline.final_assignments(), fp);

    if (!snapshot_path.empty()) {
        auto snap = open_output(snapshot_path);
        write_snapshot(snap, pipeline.state(), *stream.dict, fp);
    }

    const ClusteringState& state = pipeline.state();
    std::cerr << "clustered " << stream.docs.size() << " documents";
    for (const Language& lang : state.languages()) {
        std::cerr << "  " << lang.code() << ":" << state.clusters(lang).size();
    }
    std::cerr << "  cross:" << state.cross_clusters().size() << "  topples:" << topples
              << "  fingerprint:" << fp << "\n";
    return 0;
}

int cmd_train(const StreamOpts& stream_opts, const EngineOpts& engine_opts,
              const std::string& output, const std::string& merge_output,
              const std::string& pool_mode, double pool_tau, int max_negatives,
              int epochs, int folds, double learning_rate,
              const std::string& ranking_dump) {
    RunSettings settings;
    settings.set("command", "train");
    stream_opts.fingerprint_into(settings);
    settings.set("pool", pool_mode);
    settings.set("pool_tau", std::to_string(pool_tau));
    settings.set("max_negatives", std::to_string(max_negatives));
    settings.set("epochs", std::to_string(epochs));
    settings.set("folds", std::to_string(folds));
    settings.set("learning_rate", std::to_string(learning_rate));
    settings.set("sigma_hours", std::to_string(engine_opts.sigma_hours));
    settings.set("seed", std::to_string(engine_opts.seed));
    const std::string fp = fingerprint(settings);

    LoadedStream stream(stream_opts);
    auto records = stream.featurize_all();

    std::set<Language> langs;
    for (const auto& r : records) langs.insert(r.doc.language);

    RankingDataOptions rdo;
    rdo.pool_mode = pool_mode == "system" ? PoolMode::System : PoolMode::Gold;
    rdo.tau = pool_tau;
    rdo.mu = 0.0;
    rdo.sigma = engine_opts.sigma_hours;
    rdo.max_negatives = max_negatives;

    TrainOptions topt;
    topt.epochs = epochs;
    topt.folds = folds;
    topt.learning_rate = learning_rate;
    topt.seed = engine_opts.seed;

    ModelSet models;
    models.default_sigma = engine_opts.sigma_hours;

    std::vector<RankingQuery> dump_queries;
    for (const Language& lang : langs) {
        auto queries = generate_ranking_data(records, lang, rdo);
        if (!ranking_dump.empty()) {
            dump_queries.insert(dump_queries.end(), queries.begin(), queries.end());
        }
        bool rankable = false;
        for (const auto& q : queries) rankable = rankable || q.rankable();
        if (!rankable) {
            std::cerr << "train[" << lang.code()
                      << "]: no rankable queries, keeping the untrained model\n";
            continue;
        }
        TrainedRanker tr = train_ranker(queries, topt);
        SimilarityModel m;
        for (int i = 0; i < kMonoSubvectors; ++i) m.subvector_weights[i] = tr.weights[i];
        for (int i = 0; i < 3; ++i) m.timestamp_weights[i] = tr.weights[kMonoSubvectors + i];
        m.mu = 0.0;
        m.sigma = engine_opts.sigma_hours;
        models.rankers[Language(lang)] = m;
        std::cerr << "train[" << lang.code() << "]: " << tr.query_count << " queries, "
                  << tr.pair_count << " pairs, lambda " << tr.chosen_lambda
                  << ", cv agreement " << tr.cv_accuracy << "\n";
    }

    auto cross_queries = generate_cross_ranking_data(records, rdo);
    bool cross_rankable = false;
    for (const auto& q : cross_queries) cross_rankable = cross_rankable || q.rankable();
    if (cross_rankable) {
        TrainedRanker tr = train_ranker(cross_queries, topt);
        CrossSimilarityModel m;
        for (int i = 0; i < kCrossSubvectors; ++i) m.subvector_weights[i] = tr.weights[i];
        for (int i = 0; i < 3; ++i) {
            m.timestamp_weights[i] = tr.weights[kCrossSubvectors + i];
        }
        m.mu = 0.0;
        m.sigma = engine_opts.sigma_hours;
        models.cross_ranker = m;
        std::cerr << "train[cross]: " << tr.query_count << " queries, " << tr.pair_count
                  << " pairs, lambda " << tr.chosen_lambda << ", cv agreement "
                  << tr.cv_accuracy << "\n";
    } else {
        std::cerr << "train[cross]: no rankable queries, keeping the untrained model\n";
    }
    if (!ranking_dump.empty()) {
        dump_queries.insert(dump_queries.end(), cross_queries.begin(), cross_queries.end());
        auto dump = open_output(ranking_dump);
        write_ranking_tsv(dump, dump_queries);
    }

    save_models_file(output, models, fp);
    std::cerr << "models -> " << output << "  fingerprint:" << fp << "\n";

    if (!merge_output.empty()) {
        std::map<Language, MergeModel> merge_models;
        MergeTrainOptions mopt;
        mopt.optimizer = topt;
        for (const Language& lang : langs) {
            TrainedMerge tm = train_merge(records, lang, models.ranker_for(lang), mopt);
            merge_models[lang] = tm.model;
            std::cerr << "merge[" << lang.code() << "]: " << tm.example_count
                      << " examples, cv accuracy " << tm.cv_accuracy
                      << (tm.degenerate ? " (degenerate one-class data)" : "") << "\n";
        }
        std::ofstream out = open_output(merge_output);
        save_merge_models(out, merge_models, fp);
        std::cerr << "merge models -> " << merge_output << "\n";
    }
    return 0;
}

int cmd_tune_tau(const StreamOpts& stream_opts, const EngineOpts& engine_opts,
                 const std::string& output, double grid_min, double grid_max,
                 double grid_step, int refine_window) {
    if (grid_step <= 0.0 || grid_max < grid_min) {
        throw ConfigError("threshold grid needs grid-min <= grid-max and a positive step");
    }
    RunSettings settings;
    settings.set("command", "tune-tau");
    stream_opts.fingerprint_into(settings);
    engine_opts.fingerprint_into(settings);
    settings.set("grid", std::to_string(grid_min) + ":" + std::to_string(grid_max) + ":" +
                             std::to_string(grid_step));
    const std::string fp = fingerprint(settings);

    LoadedStream stream(stream_opts);
    auto records = stream.featurize_all();

    std::vector<double> grid;
    for (double t = grid_min; t <= grid_max + grid_step * 1e-9; t += grid_step) {
        grid.push_back(t);
    }

    ModelSet models = engine_opts.load_models();
    ClustererConfig base = engine_opts.make_config();
    base.merge_policy = MergePolicy::Threshold;

    auto results = tune_tau(records, models, base, grid, refine_window);

    ordered_json root;
    root["format"] = "storyline-tau";
    root["version"] = 1;
    root["fingerprint"] = fp;
    ordered_json per_lang;
    std::cout << "language\ttau\tf1\n";
    for (const auto& [lang, r] : results) {
        per_lang[lang.code()] = {{"tau", r.tau}, {"f1", r.f1}};
        std::cout << lang.code() << '\t' << r.tau << '\t' << r.f1 << '\n';
    }
    root["per_language"] = std::move(per_lang);
    if (!output.empty()) {
        auto out = open_output(output);
        out << root.dump(2) << '\n';
    }
    return 0;
}

int cmd_evaluate(const std::string& input, const std::string& assignments_path,
                 const std::string& output) {
    RunSettings settings;
    settings.set("command", "evaluate");
    settings.set("input", input);
    settings.set("assignments", assignments_path);
    const std::string fp = fingerprint(settings);

    auto docs = read_documents_file(input);
    auto assignments = read_assignments_file(assignments_path);
    if (assignments.empty()) {
        throw InputError("assignments file holds no rows");
    }

    std::unordered_map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id.emplace(d.id, &d);
    for (const auto& a : assignments) {
        if (!by_id.count(a.doc_id)) {
            throw InputError("assignment references document '" + a.doc_id +
                             "' absent from the gold stream");
        }
    }

    ordered_json report;
    report["format"] = "storyline-report";
    report["version"] = 1;
    report["fingerprint"] = fp;

    std::cout << "scope\titems\tprecision\trecall\tf1\n";

    std::map<Language, std::vector<const DocAssignment*>> by_lang;
    for (const auto& a : assignments) by_lang[a.language].push_back(&a);

    ordered_json mono_report;
    bool any_labeled = false;
    for (const auto& [lang, rows] : by_lang) {
        std::unordered_map<std::string, std::string> pred, gold;
        for (const DocAssignment* a : rows) {
            const Document* d = by_id.at(a->doc_id);
            if (!d->gold_mono_label) continue;
            pred[a->doc_id] = std::to_string(a->mono_cluster);
            gold[a->doc_id] = *d->gold_mono_label;
        }
        if (pred.empty()) continue;
        any_labeled = true;
        PairwiseMetrics m = pairwise_metrics(pred, gold);
        mono_report[lang.code()] = {{"items", pred.size()}, {"tp", m.tp},
                                    {"fp", m.fp},           {"fn", m.fn},
                                    {"precision", m.precision}, {"recall", m.recall},
                                    {"f1", m.f1}};
        std::cout << "mono/" << lang.code() << '\t' << pred.size() << '\t' << m.precision
                  << '\t' << m.recall << '\t' << m.f1 << '\n';
    }
    if (!any_labeled) {
        throw InputError("no document in the gold stream carries a gold story label");
    }
    report["monolingual"] = std::move(mono_report);

    CrosslingualInstance inst = build_crosslingual_instance(assignments, by_id);
    if (!inst.predicted.empty()) {
        PairwiseMetrics m = pairwise_metrics(inst.predicted, inst.gold);
        report["crosslingual"] = {{"items", inst.predicted.size()},
                                  {"tp", m.tp},
                                  {"fp", m.fp},
                                  {"fn", m.fn},
                                  {"precision", m.precision},
                                  {"recall", m.recall},
                                  {"f1", m.f1}};
        std::cout << "crosslingual\t" << inst.predicted.size() << '\t' << m.precision
                  << '\t' << m.recall << '\t' << m.f1 << '\n';
    }

    if (!output.empty()) {
        auto out = open_output(output);
        out << report.dump(2) << '\n';
    }
    return 0;
}

int cmd_baseline(const StreamOpts& stream_opts, const std::string& output,
                 const std::string& language, std::size_t max_clusters,
                 double boundary_factor) {
    RunSettings settings;
    settings.set("command", "baseline");
    stream_opts.fingerprint_into(settings);
    settings.set("language", language);
    settings.set("max_clusters", std::to_string(max_clusters));
    settings.set("boundary_factor", std::to_string(boundary_factor));
    const std::string fp = fingerprint(settings);

    LoadedStream stream(stream_opts);

    std::vector<const Document*> docs;
    for (const Document& d : stream.docs) {
        if (!language.empty() && d.language != Language(language)) continue;
        docs.push_back(&d);
    }
    if (docs.empty()) {
        throw InputError("baseline stream is empty after the language filter");
    }

    std::vector<DocRepresentation> reps;
    reps.reserve(docs.size());
    for (const Document* d : docs) reps.push_back(stream.featurizer->represent(*d));
    std::vector<const DocRepresentation*> rep_ptrs;
    rep_ptrs.reserve(reps.size());
    for (const auto& r : reps) rep_ptrs.push_back(&r);

    BaselineConfig config;
    config.max_clusters = max_clusters;
    config.boundary_factor = boundary_factor;
    auto labels = microcluster_baseline(docs, rep_ptrs, config);

    auto out = open_output(output);
    ordered_json meta;
    meta["_meta"] = {{"format", "storyline-baseline"},
                     {"version", 1},
                     {"fingerprint", fp}};
    out << meta.dump() << '\n';
    for (const Document* d : docs) {
        ordered_json row;
        row["id"] = d->id;
        row["language"] = d->language.code();
        row["cluster"] = labels.at(d->id);
        out << row.dump() << '\n';
    }

    std::unordered_map<std::string, std::string> pred, gold;
    for (const Document* d : docs) {
        if (!d->gold_mono_label) continue;
        pred[d->id] = labels.at(d->id);
        gold[d->id] = *d->gold_mono_label;
    }
    if (!pred.empty()) {
        PairwiseMetrics m = pairwise_metrics(pred, gold);
        std::cout << "baseline\t" << pred.size() << '\t' << m.precision << '\t' << m.recall
                  << '\t' << m.f1 << '\n';
    }
    std::cerr << "baseline: " << docs.size() << " documents -> " << output
              << "  fingerprint:" << fp << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online multilingual news story clustering"};
    app.require_subcommand(1);

    int rc = 0;

    // build-idf ---------------------------------------------------------------
    auto* build_idf_cmd =
        app.add_subcommand("build-idf", "Build the per-language IDF table from a corpus");
    struct {
        std::string input, output, annotator = "none";
        std::vector<std::string> languages;
    } bi;
    build_idf_cmd->add_option("--input", bi.input, "Corpus (JSONL)")->required();
    build_idf_cmd->add_option("--output", bi.output, "IDF table output path")->required();
    build_idf_cmd->add_option("--annotator", bi.annotator,
                              "none or external-command:<cmd>");
    build_idf_cmd->add_option("--language", bi.languages,
                              "Restrict to specific language(s); default: all found");
    build_idf_cmd->callback(
        [&] { rc = cmd_build_idf(bi.input, bi.output, bi.annotator, bi.languages); });

    // cluster -------------------------------------------------------------------
    auto* cluster_cmd = app.add_subcommand("cluster", "Cluster a document stream online");
    StreamOpts cluster_stream;
    EngineOpts cluster_engine;
    struct {
        std::string output, trace, snapshot;
    } cl;
    cluster_stream.add_to(*cluster_cmd, /*idf_required=*/true);
    cluster_cmd->add_option("--output", cl.output, "Assignments output (JSONL)")
        ->required();
    cluster_engine.add_to(*cluster_cmd);
    cluster_cmd->add_option("--trace", cl.trace, "Per-document decision trace (JSONL)");
    cluster_cmd->add_option("--snapshot", cl.snapshot,
                            "Full clustering-state dump after the run (JSON)");
    cluster_cmd->callback([&] {
        rc = cmd_cluster(cluster_stream, cluster_engine, cl.output, cl.trace, cl.snapshot);
    });

    // train ------------------------------------------------------------------------
    auto* train_cmd =
        app.add_subcommand("train", "Train similarity models from a labeled stream");
    StreamOpts train_stream;
    EngineOpts train_engine;
    struct {
        std::string output, merge_model, pool = "gold", ranking_dump;
        double pool_tau = 0.0;
        int max_negatives = 20;
        int epochs = 400;
        int folds = 5;
        double learning_rate = 0.5;
    } tr;
    train_stream.add_to(*train_cmd, /*idf_required=*/true);
    train_cmd->add_option("--output", tr.output, "Trained models output (JSON)")
        ->required();
    train_cmd->add_option("--merge-model", tr.merge_model,
                          "Also train the join/new classifier and write it here");
    train_cmd->add_option("--sigma-hours", train_engine.sigma_hours,
                          "Gaussian width of the timestamp features")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_engine.seed, "Fold-assignment shuffle seed")
        ->capture_default_str();
    train_cmd->add_option("--pool", tr.pool, "Replay pool for example generation")
        ->check(CLI::IsMember({"gold", "system"}))
        ->capture_default_str();
    train_cmd->add_option("--pool-tau", tr.pool_tau,
                          "Join threshold of the system-pool replay")
        ->capture_default_str();
    train_cmd->add_option("--max-negatives", tr.max_negatives,
                          "Negatives kept per query")
        ->capture_default_str();
    train_cmd->add_option("--epochs", tr.epochs, "Optimizer epochs")->capture_default_str();
    train_cmd->add_option("--folds", tr.folds, "Cross-validation folds")
        ->capture_default_str();
    train_cmd->add_option("--learning-rate", tr.learning_rate, "Optimizer step size")
        ->capture_default_str();
    train_cmd->add_option("--dump-ranking", tr.ranking_dump,
                          "Write the generated ranking examples as TSV");
    train_cmd->callback([&] {
        rc = cmd_train(train_stream, train_engine, tr.output, tr.merge_model, tr.pool,
                       tr.pool_tau, tr.max_negatives, tr.epochs, tr.folds,
                       tr.learning_rate, tr.ranking_dump);
    });

    // tune-tau -------------------------------------------------------------------------
    auto* tune_cmd = app.add_subcommand(
        "tune-tau", "Pick per-language join thresholds on a development stream");
    StreamOpts tune_stream;
    EngineOpts tune_engine;
    struct {
        std::string output;
        double grid_min = 0.0, grid_max = 1.0, grid_step = 0.01;
        int refine_window = 8;
    } tn;
    tune_stream.add_to(*tune_cmd, /*idf_required=*/true);
    tune_engine.add_to(*tune_cmd);
    tune_cmd->add_option("--output", tn.output, "Per-language threshold report (JSON)");
    tune_cmd->add_option("--grid-min", tn.grid_min, "Smallest threshold")
        ->capture_default_str();
    tune_cmd->add_option("--grid-max", tn.grid_max, "Largest threshold")
        ->capture_default_str();
    tune_cmd->add_option("--grid-step", tn.grid_step, "Grid spacing")
        ->capture_default_str();
    tune_cmd->add_option("--refine-window", tn.refine_window,
                         "Grid steps swept around the search result")
        ->capture_default_str();
    tune_cmd->callback([&] {
        rc = cmd_tune_tau(tune_stream, tune_engine, tn.output, tn.grid_min, tn.grid_max,
                          tn.grid_step, tn.refine_window);
    });

    // evaluate ----------------------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Score an assignments file against gold labels");
    struct {
        std::string input, assignments, output;
    } ev;
    eval_cmd->add_option("--input", ev.input, "Gold document stream (JSONL)")->required();
    eval_cmd->add_option("--assignments", ev.assignments,
                         "Assignments written by cluster")
        ->required();
    eval_cmd->add_option("--output", ev.output, "Metric report output (JSON)");
    eval_cmd->callback([&] { rc = cmd_evaluate(ev.input, ev.assignments, ev.output); });

    // baseline -------------------------------------------------------------------------------
    auto* base_cmd = app.add_subcommand(
        "baseline", "Run the streaming micro-cluster baseline on one language");
    StreamOpts base_stream;
    struct {
        std::string output, language;
        std::size_t max_clusters = 0;
        double boundary_factor = 2.0;
    } bl;
    base_stream.add_to(*base_cmd, /*idf_required=*/true);
    base_cmd->add_option("--output", bl.output, "Baseline labels output (JSONL)")
        ->required();
    base_cmd->add_option("--language", bl.language,
                         "Language to keep (default: stream must be monolingual)");
    base_cmd->add_option("--max-clusters", bl.max_clusters,
                         "Micro-cluster capacity (0 = unbounded)")
        ->capture_default_str();
    base_cmd->add_option("--boundary-factor", bl.boundary_factor,
                         "Join boundary as a multiple of the RMS deviation")
        ->capture_default_str();
    base_cmd->callback([&] {
        rc = cmd_baseline(base_stream, bl.output, bl.language, bl.max_clusters,
                          bl.boundary_factor);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
