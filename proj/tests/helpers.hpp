#pragma once

// Shared scaffolding for the test binaries: compact builders for documents,
// hand-crafted representations, and featurized synthetic streams.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "storyline/annotator.hpp"
#include "storyline/cluster_state.hpp"
#include "storyline/featurizer.hpp"
#include "storyline/idf.hpp"
#include "storyline/learning.hpp"
#include "storyline/types.hpp"

namespace testutil {

using namespace storyline;

inline Document doc(std::string id, const std::string& lang, double ts,
                    const std::string& story = "", const std::string& cross = "") {
    Document d;
    d.id = std::move(id);
    d.language = Language(lang);
    d.timestamp = ts;
    d.title = "t";
    d.body = "b";
    if (!story.empty()) d.gold_mono_label = story;
    if (!cross.empty()) d.gold_cross_label = cross;
    return d;
}

inline Document text_doc(std::string id, const std::string& lang, double ts,
                         std::string title, std::string body, const std::string& story = "",
                         const std::string& cross = "") {
    Document d = doc(std::move(id), lang, ts, story, cross);
    d.title = std::move(title);
    d.body = std::move(body);
    return d;
}

// Representation holding only the primary sparse subvector and the combined
// dense subvector, both normalized; enough to drive the engine directly.
inline DocRepresentation rep(std::vector<SparseVector::Entry> primary, DenseVector cross0,
                             double ts) {
    DocRepresentation r;
    r.mono[kPrimarySubvector] = SparseVector::from_pairs(std::move(primary));
    r.mono[kPrimarySubvector].normalize();
    r.cross[0] = std::move(cross0);
    dense_normalize(r.cross[0]);
    r.timestamp = ts;
    return r;
}

struct Featurized {
    IdfTable idf;
    // Behind a pointer: the dictionary owns a mutex, so the struct stays movable.
    std::unique_ptr<TermDict> dict = std::make_unique<TermDict>();
    std::vector<DocRecord> records;
};

// Runs the real corpus-statistics + featurizer pipeline over a synthetic
// document list with the identity annotator.
inline Featurized featurize(const std::vector<Document>& docs,
                            const EmbeddingTable* embeddings = nullptr) {
    Featurized out;
    IdentityAnnotator ann;
    out.idf = build_idf_all(docs, ann);
    Featurizer fz(out.idf, embeddings, ann, *out.dict);
    out.records.reserve(docs.size());
    for (const auto& d : docs) out.records.push_back({d, fz.represent(d)});
    return out;
}

}  // namespace testutil
