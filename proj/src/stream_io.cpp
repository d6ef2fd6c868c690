#include "storyline/stream_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace storyline {

using json = nlohmann::ordered_json;

// --- timestamps ------------------------------------------------------------

namespace {

// Days since 1970-01-01 of a proleptic-Gregorian civil date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    long long era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

unsigned days_in_month(unsigned year, unsigned month) {
    static constexpr unsigned lengths[12] = {31, 28, 31, 30, 31, 30,
                                             31, 31, 30, 31, 30, 31};
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return (month == 2 && leap) ? 29 : lengths[month - 1];
}

bool parse_fixed_uint(const std::string& s, std::size_t pos, std::size_t len,
                      unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

}  // namespace

double iso8601_to_hours(const std::string& text) {
    // YYYY-MM-DD[(T| )HH:MM[:SS[.frac]]][Z|+HH:MM|-HH:MM|+HHMM|-HHMM|+HH|-HH]
    auto fail = [&]() -> double {
        throw InputError("bad ISO-8601 timestamp: '" + text + "'");
    };
    unsigned year, month, day;
    if (!parse_fixed_uint(text, 0, 4, year) || text.size() < 10 || text[4] != '-' ||
        !parse_fixed_uint(text, 5, 2, month) || text[7] != '-' ||
        !parse_fixed_uint(text, 8, 2, day)) {
        return fail();
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
        return fail();
    }

    std::size_t pos = 10;
    unsigned hour = 0, minute = 0, second = 0;
    double frac = 0.0;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == 't' || text[pos] == ' ')) {
        ++pos;
        if (!parse_fixed_uint(text, pos, 2, hour)) return fail();
        pos += 2;
        if (pos >= text.size() || text[pos] != ':') return fail();
        ++pos;
        if (!parse_fixed_uint(text, pos, 2, minute)) return fail();
        pos += 2;
        if (pos < text.size() && text[pos] == ':') {
            ++pos;
            if (!parse_fixed_uint(text, pos, 2, second)) return fail();
            pos += 2;
            if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
                ++pos;
                double scale = 0.1;
                bool got = false;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                    frac += scale * (text[pos] - '0');
                    scale *= 0.1;
                    ++pos;
                    got = true;
                }
                if (!got) return fail();
            }
        }
        if (hour > 23 || minute > 59 || second > 60) return fail();
    }

    double offset_hours = 0.0;  // timestamps without a zone read as UTC
    if (pos < text.size()) {
        char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            double sign = c == '+' ? 1.0 : -1.0;
            ++pos;
            unsigned oh = 0, om = 0;
            if (!parse_fixed_uint(text, pos, 2, oh)) return fail();
            pos += 2;
            if (pos < text.size() && text[pos] == ':') {
                ++pos;
                if (!parse_fixed_uint(text, pos, 2, om)) return fail();
                pos += 2;
            } else if (pos + 2 <= text.size() && text[pos] >= '0' && text[pos] <= '9') {
                if (!parse_fixed_uint(text, pos, 2, om)) return fail();
                pos += 2;
            }
            if (oh > 23 || om > 59) return fail();
            offset_hours = sign * (oh + om / 60.0);
        } else {
            return fail();
        }
    }
    if (pos != text.size()) return fail();

    double hours = static_cast<double>(days_from_civil(year, month, day)) * 24.0 + hour +
                   minute / 60.0 + (second + frac) / 3600.0;
    return hours - offset_hours;
}

// --- documents ---------------------------------------------------------------

namespace {

std::string stringify_label(const json& v, const char* field, std::size_t line_no) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    throw InputError("line " + std::to_string(line_no) + ": field '" + field +
                     "' must be a string");
}

}  // namespace

Document parse_document_line(const std::string& line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() +
                         ")");
    }
    if (!obj.is_object()) {
        throw InputError("line " + std::to_string(line_no) + ": expected a JSON object");
    }

    Document doc;
    auto id_it = obj.find("id");
    if (id_it == obj.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
        throw InputError("line " + std::to_string(line_no) +
                         ": missing or empty string field 'id'");
    }
    doc.id = id_it->get<std::string>();

    auto lang_it = obj.find("language");
    if (lang_it == obj.end()) lang_it = obj.find("lang");
    if (lang_it == obj.end() || !lang_it->is_string()) {
        throw InputError("line " + std::to_string(line_no) + ": document '" + doc.id +
                         "' is missing the string field 'language'");
    }
    try {
        doc.language = Language(lang_it->get<std::string>());
    } catch (const InputError&) {
        throw InputError("line " + std::to_string(line_no) + ": document '" + doc.id +
                         "' has an empty language code");
    }

    for (const char* field : {"title", "body"}) {
        auto it = obj.find(field);
        if (it == obj.end() || it->is_null()) continue;
        if (!it->is_string()) {
            throw InputError("line " + std::to_string(line_no) + ": field '" +
                             std::string(field) + "' must be a string");
        }
        (std::string(field) == "title" ? doc.title : doc.body) = it->get<std::string>();
    }
    if (doc.title.empty() && doc.body.empty()) {
        throw InputError("line " + std::to_string(line_no) + ": document '" + doc.id +
                         "' has neither title nor body text");
    }

    auto ts_it = obj.find("timestamp");
    if (ts_it == obj.end()) {
        throw InputError("line " + std::to_string(line_no) + ": document '" + doc.id +
                         "' is missing 'timestamp'");
    }
    if (ts_it->is_number()) {
        doc.timestamp = ts_it->get<double>();
    } else if (ts_it->is_string()) {
        try {
            doc.timestamp = iso8601_to_hours(ts_it->get<std::string>());
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
    } else {
        throw InputError("line " + std::to_string(line_no) +
                         ": 'timestamp' must be a number of hours or an ISO-8601 string");
    }

    if (auto it = obj.find("gold_mono_label"); it != obj.end() && !it->is_null()) {
        doc.gold_mono_label = stringify_label(*it, "gold_mono_label", line_no);
    }
    if (auto it = obj.find("gold_cross_label"); it != obj.end() && !it->is_null()) {
        doc.gold_cross_label = stringify_label(*it, "gold_cross_label", line_no);
    }
    return doc;
}

std::vector<Document> read_documents(std::istream& in) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        docs.push_back(parse_document_line(line, line_no));
    }
    return docs;
}

std::vector<Document> read_documents_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("unable to open input file: " + path);
    }
    return read_documents(in);
}

std::string serialize_document(const Document& doc) {
    json obj;
    obj["id"] = doc.id;
    obj["language"] = doc.language.code();
    obj["title"] = doc.title;
    obj["body"] = doc.body;
    obj["timestamp"] = doc.timestamp;
    if (doc.gold_mono_label) obj["gold_mono_label"] = *doc.gold_mono_label;
    if (doc.gold_cross_label) obj["gold_cross_label"] = *doc.gold_cross_label;
    return obj.dump();
}

// --- run settings ------------------------------------------------------------

std::string RunSettings::canonical() const {
    auto sorted = entries;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& [k, v] : sorted) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string fingerprint(const RunSettings& settings) {
    std::string data = settings.canonical();
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- assignments ---------------------------------------------------------------

void write_assignments(std::ostream& out, const std::vector<DocAssignment>& assignments,
                       const std::string& run_fingerprint) {
    json meta;
    meta["_meta"] = {{"format", "storyline-assignments"},
                     {"version", 1},
                     {"fingerprint", run_fingerprint}};
    out << meta.dump() << '\n';
    for (const auto& a : assignments) {
        json row;
        row["id"] = a.doc_id;
        row["language"] = a.language.code();
        row["mono_cluster"] = a.mono_cluster;
        row["cross_cluster"] = a.cross_cluster;
        out << row.dump() << '\n';
    }
}

std::vector<DocAssignment> read_assignments(std::istream& in) {
    std::vector<DocAssignment> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("assignments line " + std::to_string(line_no) +
                             ": invalid JSON (" + e.what() + ")");
        }
        if (obj.contains("_meta")) continue;
        try {
            DocAssignment a;
            a.doc_id = obj.at("id").get<std::string>();
            a.language = Language(obj.at("language").get<std::string>());
            a.mono_cluster = obj.at("mono_cluster").get<ClusterId>();
            a.cross_cluster = obj.at("cross_cluster").get<ClusterId>();
            out.push_back(std::move(a));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("assignments line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<DocAssignment> read_assignments_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("unable to open assignments file: " + path);
    }
    return read_assignments(in);
}

// --- decision traces -------------------------------------------------------------

void write_trace_line(std::ostream& out, const DecisionTrace& trace) {
    json row;
    row["id"] = trace.doc_id;
    row["language"] = trace.language.code();
    json cands = json::array();
    for (const auto& [id, score] : trace.top_candidates) {
        cands.push_back({{"cluster", id}, {"score", score}});
    }
    row["candidates"] = std::move(cands);
    row["best_score"] = trace.best_score;
    row["joined"] = trace.joined;
    row["mono_cluster"] = trace.mono_id;
    row["cross_cluster"] = trace.cross_id;
    json topples = json::array();
    for (const auto& t : trace.topples) {
        topples.push_back({{"language", t.moved.language.code()},
                           {"mono_cluster", t.moved.id},
                           {"from", t.from_cross},
                           {"to", t.to_cross}});
    }
    row["topples"] = std::move(topples);
    row["topple_budget_exhausted"] = trace.topple_budget_exhausted;
    out << row.dump() << '\n';
}

// --- snapshot ----------------------------------------------------------------------

namespace {

const char* subvector_name(int i) {
    static const char* names[kMonoSubvectors] = {
        "tokens/both",   "tokens/title",   "tokens/body",
        "lemmas/both",   "lemmas/title",   "lemmas/body",
        "entities/both", "entities/title", "entities/body",
    };
    return names[i];
}

const char* section_name(int i) {
    static const char* names[kCrossSubvectors] = {"both", "title", "body"};
    return names[i];
}

}  // namespace

void write_snapshot(std::ostream& out, const ClusteringState& state, const TermDict& dict,
                    const std::string& run_fingerprint) {
    json root;
    root["format"] = "storyline-snapshot";
    root["version"] = 1;
    root["fingerprint"] = run_fingerprint;

    json clusters = json::array();
    for (const Language& lang : state.languages()) {
        for (const auto& c : state.clusters(lang)) {
            json jc;
            jc["language"] = lang.code();
            jc["id"] = c.id;
            jc["members"] = c.member_ids;
            jc["size"] = c.count;
            jc["ts_newest"] = c.ts_newest;
            jc["ts_oldest"] = c.ts_oldest;
            jc["ts_sum"] = c.ts_sum;
            jc["cross_cluster"] = c.cross_id;
            json sums;
            for (int i = 0; i < kMonoSubvectors; ++i) {
                json vec;
                for (const auto& [term, weight] : c.mono_sums[i].entries()) {
                    vec[dict.term(term)] = weight;
                }
                sums[subvector_name(i)] = std::move(vec);
            }
            jc["tfidf_sums"] = std::move(sums);
            json dense;
            for (int i = 0; i < kCrossSubvectors; ++i) {
                dense[section_name(i)] = c.cross_sums[i];
            }
            jc["embedding_sums"] = std::move(dense);
            clusters.push_back(std::move(jc));
        }
    }
    root["clusters"] = std::move(clusters);

    json cross = json::array();
    for (const auto& [id, cc] : state.cross_clusters()) {
        json jc;
        jc["id"] = id;
        json members;
        for (const auto& [lang, mono] : cc.members) {
            members[lang.code()] = mono;
        }
        jc["members"] = std::move(members);
        cross.push_back(std::move(jc));
    }
    root["cross_clusters"] = std::move(cross);

    out << root.dump(2) << '\n';
}

// --- model files ---------------------------------------------------------------------

namespace {

template <std::size_t N>
json weights_json(const std::array<double, N>& a) {
    return json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
void read_weights(const json& v, const char* what, std::array<double, N>& out) {
    if (!v.is_array() || v.size() != N) {
        throw InputError(std::string("model file: '") + what + "' must be a list of " +
                         std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) out[i] = v[i].get<double>();
}

void check_format(const json& obj, const char* expected) {
    auto it = obj.find("format");
    if (it == obj.end() || !it->is_string() || it->get<std::string>() != expected) {
        throw InputError(std::string("model file: expected format '") + expected + "'");
    }
    auto vit = obj.find("version");
    if (vit == obj.end() || !vit->is_number_integer() || vit->get<int>() != 1) {
        throw InputError(std::string("model file: unsupported version for '") + expected +
                         "'");
    }
}

json parse_stream(std::istream& in, const char* what) {
    try {
        return json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string(what) + ": invalid JSON (" + e.what() + ")");
    }
}

}  // namespace

void save_models(std::ostream& out, const ModelSet& models,
                 const std::string& run_fingerprint) {
    json root;
    root["format"] = "storyline-models";
    root["version"] = 1;
    root["fingerprint"] = run_fingerprint;
    root["mu_hours"] = models.default_mu;
    root["sigma_hours"] = models.default_sigma;

    json mono;
    for (const auto& [lang, m] : models.rankers) {
        json jm;
        jm["subvector_weights"] = weights_json(m.subvector_weights);
        jm["timestamp_weights"] = weights_json(m.timestamp_weights);
        jm["mu_hours"] = m.mu;
        jm["sigma_hours"] = m.sigma;
        mono[lang.code()] = std::move(jm);
    }
    root["monolingual"] = std::move(mono);

    json cross;
    cross["subvector_weights"] = weights_json(models.cross_ranker.subvector_weights);
    cross["timestamp_weights"] = weights_json(models.cross_ranker.timestamp_weights);
    cross["mu_hours"] = models.cross_ranker.mu;
    cross["sigma_hours"] = models.cross_ranker.sigma;
    root["crosslingual"] = std::move(cross);

    out << root.dump(2) << '\n';
}

ModelSet load_models(std::istream& in) {
    json root = parse_stream(in, "models file");
    check_format(root, "storyline-models");

    ModelSet models;
    models.default_mu = root.value("mu_hours", 0.0);
    models.default_sigma = root.value("sigma_hours", 72.0);

    if (auto it = root.find("monolingual"); it != root.end()) {
        for (const auto& [code, jm] : it->items()) {
            SimilarityModel m;
            read_weights(jm.at("subvector_weights"), "subvector_weights",
                         m.subvector_weights);
            read_weights(jm.at("timestamp_weights"), "timestamp_weights",
                         m.timestamp_weights);
            m.mu = jm.value("mu_hours", models.default_mu);
            m.sigma = jm.value("sigma_hours", models.default_sigma);
            models.rankers[Language(code)] = m;
        }
    }
    if (auto it = root.find("crosslingual"); it != root.end() && !it->is_null()) {
        CrossSimilarityModel m;
        read_weights(it->at("subvector_weights"), "subvector_weights", m.subvector_weights);
        read_weights(it->at("timestamp_weights"), "timestamp_weights", m.timestamp_weights);
        m.mu = it->value("mu_hours", models.default_mu);
        m.sigma = it->value("sigma_hours", models.default_sigma);
        models.cross_ranker = m;
    }
    return models;
}

void save_models_file(const std::string& path, const ModelSet& models,
                      const std::string& run_fingerprint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("unable to open model file for writing: " + path);
    save_models(out, models, run_fingerprint);
    if (!out) throw ConfigError("failed while writing model file: " + path);
}

ModelSet load_models_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("unable to open model file: " + path);
    return load_models(in);
}

void save_merge_models(std::ostream& out, const std::map<Language, MergeModel>& models,
                       const std::string& run_fingerprint) {
    json root;
    root["format"] = "storyline-merge";
    root["version"] = 1;
    root["fingerprint"] = run_fingerprint;
    json per_lang;
    for (const auto& [lang, m] : models) {
        json jm;
        jm["weights"] = weights_json(m.weights);
        jm["bias"] = m.bias;
        per_lang[lang.code()] = std::move(jm);
    }
    root["per_language"] = std::move(per_lang);
    out << root.dump(2) << '\n';
}

std::map<Language, MergeModel> load_merge_models(std::istream& in) {
    json root = parse_stream(in, "merge model file");
    check_format(root, "storyline-merge");
    std::map<Language, MergeModel> out;
    if (auto it = root.find("per_language"); it != root.end()) {
        for (const auto& [code, jm] : it->items()) {
            MergeModel m;
            read_weights(jm.at("weights"), "weights", m.weights);
            m.bias = jm.at("bias").get<double>();
            out[Language(code)] = m;
        }
    }
    return out;
}

std::map<Language, MergeModel> load_merge_models_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("unable to open merge model file: " + path);
    return load_merge_models(in);
}

// --- ranking dumps ---------------------------------------------------------------------

void write_ranking_tsv(std::ostream& out, const std::vector<RankingQuery>& queries) {
    std::size_t dims = 0;
    for (const auto& q : queries) {
        for (const auto& c : q.candidates) {
            dims = std::max(dims, c.features.size());
        }
    }
    out << "query\tlabel";
    for (std::size_t i = 0; i < dims; ++i) out << "\tf" << (i + 1);
    out << '\n';
    char buf[64];
    for (const auto& q : queries) {
        for (const auto& c : q.candidates) {
            out << q.query_id << '\t' << (c.positive ? 1 : 0);
            for (std::size_t i = 0; i < dims; ++i) {
                double v = i < c.features.size() ? c.features[i] : 0.0;
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << '\t' << buf;
            }
            out << '\n';
        }
    }
}

}  // namespace storyline
