#include "storyline/embeddings.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "storyline/tokenize.hpp"
#include "storyline/types.hpp"

namespace storyline {

std::optional<std::span<const double>> EmbeddingTable::lookup(const std::string& word) const {
    auto it = index_.find(fold_case(word));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

bool EmbeddingTable::contains(const std::string& word) const {
    return index_.count(fold_case(word)) > 0;
}

void EmbeddingTable::insert(const std::string& word, const std::vector<double>& vec) {
    if (dim_ == 0) {
        if (vec.empty()) {
            throw InputError("embedding vectors must not be empty");
        }
        dim_ = vec.size();
    } else if (vec.size() != dim_) {
        throw InputError("embedding dimension mismatch for '" + word + "': expected " +
                         std::to_string(dim_) + ", got " + std::to_string(vec.size()));
    }
    std::string key = fold_case(word);
    if (index_.count(key)) {
        return;  // first row wins
    }
    index_.emplace(std::move(key), index_.size());
    data_.insert(data_.end(), vec.begin(), vec.end());
}

namespace {

// "count dim" headers hold exactly two integer fields.
bool looks_like_header(const std::string& line) {
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra)) {
        return false;
    }
    auto is_uint = [](const std::string& s) {
        if (s.empty()) return false;
        for (char c : s) {
            if (c < '0' || c > '9') return false;
        }
        return true;
    };
    return is_uint(a) && is_uint(b);
}

}  // namespace

EmbeddingTable EmbeddingTable::load(std::istream& in) {
    EmbeddingTable table;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (first) {
            first = false;
            if (looks_like_header(line)) {
                continue;
            }
        }
        std::istringstream ss(line);
        std::string word;
        if (!(ss >> word)) {
            continue;
        }
        std::vector<double> vec;
        std::string field;
        while (ss >> field) {
            char* end = nullptr;
            double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0') {
                throw InputError("embeddings file: bad number '" + field + "' on line " +
                                 std::to_string(line_no));
            }
            vec.push_back(v);
        }
        if (vec.empty()) {
            throw InputError("embeddings file: row without values on line " +
                             std::to_string(line_no));
        }
        try {
            table.insert(word, vec);
        } catch (const InputError& e) {
            throw InputError(std::string(e.what()) + " (line " + std::to_string(line_no) +
                             ")");
        }
    }
    if (table.size() == 0) {
        throw InputError("embeddings file holds no vectors");
    }
    return table;
}

EmbeddingTable EmbeddingTable::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("unable to open embeddings file: " + path);
    }
    return load(in);
}

}  // namespace storyline
