#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "storyline/annotator.hpp"
#include "storyline/types.hpp"

namespace storyline {

// Per-language inverse document frequencies, one namespace per feature
// class so token/lemma/entity terms with equal surface strings stay
// distinct. Weights follow the smoothed formula
//   idf(t) = ln((1 + N) / (1 + df(t))) + 1
// so every weight is positive and unseen terms get the maximum value
// ln(1 + N) + 1.
class IdfTable {
public:
    double idf(const Language& lang, FeatureClass cls, const std::string& term) const;

    // Value assigned to terms never seen in the corpus (df = 0).
    double default_idf(const Language& lang) const;

    std::uint64_t doc_count(const Language& lang) const;
    bool has_language(const Language& lang) const { return tables_.count(lang) > 0; }
    std::vector<Language> languages() const;
    std::size_t term_count() const;

    void set_doc_count(const Language& lang, std::uint64_t n) { tables_[lang].doc_count = n; }
    void set_idf(const Language& lang, FeatureClass cls, const std::string& term, double value);

    void save(std::ostream& out) const;
    static IdfTable load(std::istream& in);
    void save_file(const std::string& path) const;
    static IdfTable load_file(const std::string& path);

private:
    struct LangTable {
        std::uint64_t doc_count = 0;
        std::array<std::unordered_map<std::string, double>, 3> by_class;
    };
    std::map<Language, LangTable> tables_;
};

// Builds the IDF table for one language from a corpus. Documents of other
// languages are ignored; throws if the corpus holds none of the requested
// language. A document "contains" a term when it occurs in its title or
// body.
IdfTable build_idf(const std::vector<Document>& corpus, const Language& language,
                   const Annotator& annotator);

// Builds one table covering several languages at once.
IdfTable build_idf_languages(const std::vector<Document>& corpus,
                             const std::vector<Language>& languages,
                             const Annotator& annotator);

// Builds tables for every language present in the corpus.
IdfTable build_idf_all(const std::vector<Document>& corpus, const Annotator& annotator);

}  // namespace storyline
