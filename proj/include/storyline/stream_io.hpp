#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "storyline/cluster_state.hpp"
#include "storyline/clusterer.hpp"
#include "storyline/evaluation.hpp"
#include "storyline/learning.hpp"
#include "storyline/term_dict.hpp"
#include "storyline/types.hpp"

namespace storyline {

// --- documents -----------------------------------------------------------

// Parses one JSONL document line. Accepted fields: id (required string),
// language/lang (required), title, body (strings, not both empty),
// timestamp (required: hours since epoch as a number, or an ISO-8601
// string), gold_mono_label, gold_cross_label (optional strings; numbers
// are accepted and stringified). Unknown fields are ignored. line_no is
// only for error messages.
Document parse_document_line(const std::string& line, std::size_t line_no = 0);

std::vector<Document> read_documents(std::istream& in);
std::vector<Document> read_documents_file(const std::string& path);

// One canonical JSON line per document; parse(serialize(d)) == d.
std::string serialize_document(const Document& doc);

// "2016-11-08T10:30:00Z" (and offset variants) -> hours since the epoch.
double iso8601_to_hours(const std::string& text);

// --- run configuration ---------------------------------------------------

// The knobs that affect outputs, flattened for reporting/fingerprints.
struct RunSettings {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    }
    std::string canonical() const;
};

// FNV-1a 64-bit over the canonical settings string, hex-encoded; stamped
// into every output so runs can be told apart.
std::string fingerprint(const RunSettings& settings);

// --- engine outputs --------------------------------------------------------

void write_assignments(std::ostream& out, const std::vector<DocAssignment>& assignments,
                       const std::string& run_fingerprint);
std::vector<DocAssignment> read_assignments(std::istream& in);
std::vector<DocAssignment> read_assignments_file(const std::string& path);

void write_trace_line(std::ostream& out, const DecisionTrace& trace);

// Full self-describing dump of the clustering state: every cluster with
// members, timestamp aggregates, and centroid sums spelled with surface
// terms; the crosslingual table; the settings fingerprint.
void write_snapshot(std::ostream& out, const ClusteringState& state, const TermDict& dict,
                    const std::string& run_fingerprint);

// --- models ----------------------------------------------------------------

void save_models(std::ostream& out, const ModelSet& models, const std::string& run_fingerprint);
ModelSet load_models(std::istream& in);
void save_models_file(const std::string& path, const ModelSet& models,
                      const std::string& run_fingerprint);
ModelSet load_models_file(const std::string& path);

void save_merge_models(std::ostream& out, const std::map<Language, MergeModel>& models,
                       const std::string& run_fingerprint);
std::map<Language, MergeModel> load_merge_models(std::istream& in);
std::map<Language, MergeModel> load_merge_models_file(const std::string& path);

// --- training dumps ----------------------------------------------------------

// TSV audit dump: query id, label, then one column per feature.
void write_ranking_tsv(std::ostream& out, const std::vector<RankingQuery>& queries);

}  // namespace storyline
