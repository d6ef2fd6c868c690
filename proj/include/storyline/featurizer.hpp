#pragma once

#include "storyline/annotator.hpp"
#include "storyline/embeddings.hpp"
#include "storyline/idf.hpp"
#include "storyline/term_dict.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Turns raw documents into their feature-space representation:
//
//   - nine sparse TF-IDF subvectors, one per (feature class, section)
//     combination where the classes are tokens/lemmas/entities and the
//     sections are title+body, title, body;
//   - three dense subvectors per section, each the TF-IDF-weighted sum of
//     the embeddings of in-vocabulary tokens.
//
// Every subvector is L2-normalized unless it is all-zero (empty section,
// no entities, all tokens out of the embedding vocabulary), in which case
// it stays zero and contributes cosine 0 downstream.
class Featurizer {
public:
    Featurizer(const IdfTable& idf, const EmbeddingTable* embeddings,
               const Annotator& annotator, TermDict& dict)
        : idf_(idf), embeddings_(embeddings), annotator_(annotator), dict_(dict) {}

    DocRepresentation represent(const Document& doc) const;

    const TermDict& dict() const { return dict_; }

private:
    const IdfTable& idf_;
    const EmbeddingTable* embeddings_;  // may be null: cross subvectors stay zero
    const Annotator& annotator_;
    TermDict& dict_;
};

}  // namespace storyline
