#include "storyline/idf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace storyline {

namespace {

const char* class_name(FeatureClass cls) {
    switch (cls) {
        case FeatureClass::Tokens: return "tokens";
        case FeatureClass::Lemmas: return "lemmas";
        case FeatureClass::Entities: return "entities";
    }
    return "?";
}

FeatureClass class_from_name(const std::string& name) {
    if (name == "tokens") return FeatureClass::Tokens;
    if (name == "lemmas") return FeatureClass::Lemmas;
    if (name == "entities") return FeatureClass::Entities;
    throw InputError("idf file: unknown feature class '" + name + "'");
}

// Shortest decimal form that parses back to the identical double, so the
// on-disk table round-trips bit-exactly.
std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char probe[64];
            std::snprintf(probe, sizeof probe, "%.*g", prec, v);
            if (std::strtod(probe, nullptr) == v) {
                return probe;
            }
        }
    }
    return buf;
}

}  // namespace

double IdfTable::idf(const Language& lang, FeatureClass cls, const std::string& term) const {
    auto lit = tables_.find(lang);
    if (lit == tables_.end()) {
        throw InputError("no idf table for language '" + lang.code() + "'");
    }
    const auto& by_class = lit->second.by_class[static_cast<int>(cls)];
    auto tit = by_class.find(term);
    if (tit != by_class.end()) {
        return tit->second;
    }
    return std::log(1.0 + static_cast<double>(lit->second.doc_count)) + 1.0;
}

double IdfTable::default_idf(const Language& lang) const {
    auto lit = tables_.find(lang);
    if (lit == tables_.end()) {
        throw InputError("no idf table for language '" + lang.code() + "'");
    }
    return std::log(1.0 + static_cast<double>(lit->second.doc_count)) + 1.0;
}

std::uint64_t IdfTable::doc_count(const Language& lang) const {
    auto lit = tables_.find(lang);
    if (lit == tables_.end()) {
        throw InputError("no idf table for language '" + lang.code() + "'");
    }
    return lit->second.doc_count;
}

std::vector<Language> IdfTable::languages() const {
    std::vector<Language> out;
    out.reserve(tables_.size());
    for (const auto& [lang, table] : tables_) {
        (void)table;
        out.push_back(lang);
    }
    return out;
}

std::size_t IdfTable::term_count() const {
    std::size_t n = 0;
    for (const auto& [lang, table] : tables_) {
        (void)lang;
        for (const auto& m : table.by_class) {
            n += m.size();
        }
    }
    return n;
}

void IdfTable::set_idf(const Language& lang, FeatureClass cls, const std::string& term,
                       double value) {
    tables_[lang].by_class[static_cast<int>(cls)][term] = value;
}

void IdfTable::save(std::ostream& out) const {
    out << "storyline-idf\tv1\n";
    for (const auto& [lang, table] : tables_) {
        out << "doccount\t" << lang.code() << '\t' << table.doc_count << '\n';
    }
    for (const auto& [lang, table] : tables_) {
        for (int c = 0; c < 3; ++c) {
            std::vector<const std::string*> terms;
            terms.reserve(table.by_class[c].size());
            for (const auto& [term, value] : table.by_class[c]) {
                (void)value;
                terms.push_back(&term);
            }
            std::sort(terms.begin(), terms.end(),
                      [](const std::string* a, const std::string* b) { return *a < *b; });
            for (const std::string* term : terms) {
                out << "term\t" << lang.code() << '\t'
                    << class_name(static_cast<FeatureClass>(c)) << '\t' << *term << '\t'
                    << format_double(table.by_class[c].at(*term)) << '\n';
            }
        }
    }
}

IdfTable IdfTable::load(std::istream& in) {
    IdfTable table;
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (!saw_header) {
            if (fields.size() != 2 || fields[0] != "storyline-idf" || fields[1] != "v1") {
                throw InputError("idf file: bad header on line " + std::to_string(line_no));
            }
            saw_header = true;
            continue;
        }
        if (fields[0] == "doccount") {
            if (fields.size() != 3) {
                throw InputError("idf file: malformed doccount on line " +
                                 std::to_string(line_no));
            }
            table.tables_[Language(fields[1])].doc_count =
                static_cast<std::uint64_t>(std::stoull(fields[2]));
        } else if (fields[0] == "term") {
            if (fields.size() != 5) {
                throw InputError("idf file: malformed term row on line " +
                                 std::to_string(line_no));
            }
            double value = std::strtod(fields[4].c_str(), nullptr);
            table.set_idf(Language(fields[1]), class_from_name(fields[2]), fields[3], value);
        } else {
            throw InputError("idf file: unknown row type '" + fields[0] + "' on line " +
                             std::to_string(line_no));
        }
    }
    if (!saw_header) {
        throw InputError("idf file: empty or missing header");
    }
    return table;
}

void IdfTable::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("unable to open idf file for writing: " + path);
    }
    save(out);
    if (!out) {
        throw ConfigError("failed while writing idf file: " + path);
    }
}

IdfTable IdfTable::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("unable to open idf file: " + path);
    }
    return load(in);
}

namespace {

void count_language(const std::vector<Document>& corpus, const Language& language,
                    const Annotator& annotator, IdfTable& table) {
    std::uint64_t n = 0;
    std::array<std::unordered_map<std::string, std::uint64_t>, 3> df;
    for (const auto& doc : corpus) {
        if (doc.language != language) {
            continue;
        }
        ++n;
        Annotation title = annotator.annotate(doc.title);
        Annotation body = annotator.annotate(doc.body);
        std::array<std::set<std::string>, 3> seen;
        auto absorb = [&seen](const Annotation& ann) {
            seen[0].insert(ann.tokens.begin(), ann.tokens.end());
            seen[1].insert(ann.lemmas.begin(), ann.lemmas.end());
            seen[2].insert(ann.entities.begin(), ann.entities.end());
        };
        absorb(title);
        absorb(body);
        for (int c = 0; c < 3; ++c) {
            for (const auto& term : seen[c]) {
                ++df[c][term];
            }
        }
    }
    if (n == 0) {
        throw InputError("idf corpus holds no documents in language '" + language.code() +
                         "'");
    }
    table.set_doc_count(language, n);
    const double log_num = std::log(1.0 + static_cast<double>(n));
    for (int c = 0; c < 3; ++c) {
        for (const auto& [term, count] : df[c]) {
            double idf = log_num - std::log(1.0 + static_cast<double>(count)) + 1.0;
            table.set_idf(language, static_cast<FeatureClass>(c), term, idf);
        }
    }
}

}  // namespace

IdfTable build_idf(const std::vector<Document>& corpus, const Language& language,
                   const Annotator& annotator) {
    IdfTable table;
    count_language(corpus, language, annotator, table);
    return table;
}

IdfTable build_idf_languages(const std::vector<Document>& corpus,
                             const std::vector<Language>& languages,
                             const Annotator& annotator) {
    if (languages.empty()) {
        throw ConfigError("build_idf_languages needs at least one language");
    }
    IdfTable table;
    for (const Language& lang : languages) {
        count_language(corpus, lang, annotator, table);
    }
    return table;
}

IdfTable build_idf_all(const std::vector<Document>& corpus, const Annotator& annotator) {
    if (corpus.empty()) {
        throw InputError("idf corpus is empty");
    }
    std::set<Language> langs;
    for (const auto& doc : corpus) {
        langs.insert(doc.language);
    }
    IdfTable table;
    for (const auto& lang : langs) {
        count_language(corpus, lang, annotator, table);
    }
    return table;
}

}  // namespace storyline
