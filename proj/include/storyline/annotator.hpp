#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace storyline {

// Output of linguistic preprocessing for one piece of text. Tokens and
// lemmas are case-folded; entities keep whatever surface form the
// annotator emits. Lemmas need not align with tokens position-wise --
// each list is consumed as an independent bag.
struct Annotation {
    std::vector<std::string> tokens;
    std::vector<std::string> lemmas;
    std::vector<std::string> entities;
};

class Annotator {
public:
    virtual ~Annotator() = default;
    virtual Annotation annotate(std::string_view text) const = 0;
};

// Fallback used when no NLP pipeline is configured: tokens come from the
// built-in segmenter, lemmas are identical to tokens, and the entity list
// stays empty (entity subvectors end up all-zero, which the similarity
// layer treats as cosine 0).
class IdentityAnnotator final : public Annotator {
public:
    Annotation annotate(std::string_view text) const override;
};

// Shells out to an external command for each text. The command receives
// the UTF-8 text on stdin and must print a single JSON object
//   {"tokens": [...], "lemmas": [...], "entities": [...]}
// on stdout. Missing keys default to empty lists; tokens/lemmas are
// case-folded on the way in so external pipelines do not have to agree
// with our folding rules. The command must be deterministic: the engine
// assumes annotating the same text twice gives the same result.
class ExternalCommandAnnotator final : public Annotator {
public:
    explicit ExternalCommandAnnotator(std::string command);
    Annotation annotate(std::string_view text) const override;

private:
    std::string command_;
};

// Factory for the --annotator CLI setting: "none" or
// "external-command:<shell command>".
std::unique_ptr<Annotator> make_annotator(const std::string& setting);

}  // namespace storyline
