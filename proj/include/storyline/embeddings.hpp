#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace storyline {

// Word-embedding lookup backed by one flat buffer. Keys are case-folded
// at load time; lookups fold the query the same way. The expected file
// format is the common text layout: one "word v1 v2 ... vm" row per line,
// optionally preceded by a "count dim" header (auto-detected). Duplicate
// words keep the first row seen.
class EmbeddingTable {
public:
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return index_.size(); }

    // Returns the vector for a (case-folded) word, or nullopt when the
    // word is out of vocabulary.
    std::optional<std::span<const double>> lookup(const std::string& word) const;

    bool contains(const std::string& word) const;

    void insert(const std::string& word, const std::vector<double>& vec);

    static EmbeddingTable load(std::istream& in);
    static EmbeddingTable load_file(const std::string& path);

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::size_t> index_;  // word -> row
    std::vector<double> data_;                            // rows * dim_
};

}  // namespace storyline
