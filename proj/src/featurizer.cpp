#include "storyline/featurizer.hpp"

#include <map>
#include <string>
#include <vector>

namespace storyline {

namespace {

using Counts = std::map<std::string, std::uint64_t>;

Counts count_terms(const std::vector<std::string>& terms) {
    Counts c;
    for (const auto& t : terms) ++c[t];
    return c;
}

Counts merge_counts(const Counts& a, const Counts& b) {
    Counts out = a;
    for (const auto& [term, n] : b) out[term] += n;
    return out;
}

}  // namespace

DocRepresentation Featurizer::represent(const Document& doc) const {
    if (!idf_.has_language(doc.language)) {
        throw InputError("no idf table for language '" + doc.language.code() +
                         "' (document " + doc.id + ")");
    }

    Annotation title = annotator_.annotate(doc.title);
    Annotation body = annotator_.annotate(doc.body);

    DocRepresentation rep;
    rep.timestamp = doc.timestamp;

    // tf-idf per (class, section); "both" is the sum of the section counts.
    for (int ci = 0; ci < 3; ++ci) {
        auto cls = static_cast<FeatureClass>(ci);
        const std::vector<std::string>* title_terms;
        const std::vector<std::string>* body_terms;
        switch (cls) {
            case FeatureClass::Tokens:
                title_terms = &title.tokens;
                body_terms = &body.tokens;
                break;
            case FeatureClass::Lemmas:
                title_terms = &title.lemmas;
                body_terms = &body.lemmas;
                break;
            default:
                title_terms = &title.entities;
                body_terms = &body.entities;
                break;
        }
        Counts title_counts = count_terms(*title_terms);
        Counts body_counts = count_terms(*body_terms);
        Counts both_counts = merge_counts(title_counts, body_counts);

        auto build = [&](const Counts& counts, Section sec) {
            std::vector<SparseVector::Entry> pairs;
            pairs.reserve(counts.size());
            for (const auto& [term, tf] : counts) {
                double w = static_cast<double>(tf) * idf_.idf(doc.language, cls, term);
                pairs.emplace_back(dict_.intern(cls, term), w);
            }
            SparseVector v = SparseVector::from_pairs(std::move(pairs));
            v.normalize();
            rep.mono[mono_subvector_index(cls, sec)] = std::move(v);
        };
        build(both_counts, Section::Both);
        build(title_counts, Section::Title);
        build(body_counts, Section::Body);
    }

    if (embeddings_ != nullptr) {
        Counts title_counts = count_terms(title.tokens);
        Counts body_counts = count_terms(body.tokens);
        Counts both_counts = merge_counts(title_counts, body_counts);
        auto build = [&](const Counts& counts, Section sec) {
            DenseVector v;
            for (const auto& [term, tf] : counts) {
                auto emb = embeddings_->lookup(term);
                if (!emb) continue;
                double w = static_cast<double>(tf) *
                           idf_.idf(doc.language, FeatureClass::Tokens, term);
                if (v.empty()) v.assign(emb->size(), 0.0);
                for (std::size_t i = 0; i < emb->size(); ++i) v[i] += w * (*emb)[i];
            }
            dense_normalize(v);
            rep.cross[cross_subvector_index(sec)] = std::move(v);
        };
        build(both_counts, Section::Both);
        build(title_counts, Section::Title);
        build(body_counts, Section::Body);
    }

    return rep;
}

}  // namespace storyline
