#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace storyline {

// Bad or inconsistent data coming from the outside world (files, streams).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad settings: invalid flag combinations, out-of-range parameters.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A language code such as "en", "de", "es". Open-ended set, compared
// case-insensitively (normalized to lowercase on construction).
class Language {
public:
    Language() = default;
    explicit Language(std::string_view code) : code_(code) {
        if (code_.empty()) throw InputError("empty language code");
        std::transform(code_.begin(), code_.end(), code_.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }

    const std::string& code() const { return code_; }
    bool empty() const { return code_.empty(); }

    friend bool operator==(const Language& a, const Language& b) { return a.code_ == b.code_; }
    friend bool operator!=(const Language& a, const Language& b) { return a.code_ != b.code_; }
    friend bool operator<(const Language& a, const Language& b) { return a.code_ < b.code_; }

private:
    std::string code_;
};

// One item of the document stream. Timestamps are real hours since the
// 1970 epoch; second- or ISO-8601-valued inputs are converted at ingestion.
struct Document {
    std::string id;
    Language language;
    std::string title;
    std::string body;
    double timestamp = 0.0;  // hours since 1970-01-01T00:00Z
    std::optional<std::string> gold_mono_label;
    std::optional<std::string> gold_cross_label;
};

using TermId = std::uint32_t;

// Sparse non-negative vector keyed by interned term id. Entries are kept
// sorted by id with no explicit zeros, so dot products and merges are
// single-pass over both operands.
class SparseVector {
public:
    using Entry = std::pair<TermId, double>;

    SparseVector() = default;

    // Builds from possibly unsorted, possibly duplicated (id, weight) pairs;
    // duplicates are summed, zero results dropped.
    static SparseVector from_pairs(std::vector<Entry> pairs) {
        std::sort(pairs.begin(), pairs.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        SparseVector v;
        v.entries_.reserve(pairs.size());
        for (const auto& [id, w] : pairs) {
            if (!v.entries_.empty() && v.entries_.back().first == id) {
                v.entries_.back().second += w;
            } else {
                v.entries_.emplace_back(id, w);
            }
        }
        std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
        return v;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }
    bool is_zero() const { return entries_.empty(); }

    double dot(const SparseVector& other) const {
        double acc = 0.0;
        auto a = entries_.begin(), ae = entries_.end();
        auto b = other.entries_.begin(), be = other.entries_.end();
        while (a != ae && b != be) {
            if (a->first == b->first) {
                acc += a->second * b->second;
                ++a; ++b;
            } else if (a->first < b->first) {
                ++a;
            } else {
                ++b;
            }
        }
        return acc;
    }

    double norm() const {
        double acc = 0.0;
        for (const auto& [id, w] : entries_) acc += w * w;
        return std::sqrt(acc);
    }

    void scale(double s) {
        for (auto& [id, w] : entries_) w *= s;
    }

    // L2-normalizes in place; all-zero vectors are left untouched.
    void normalize() {
        double n = norm();
        if (n > 0.0) scale(1.0 / n);
    }

    // other += into this, merge of two sorted lists. Appends ids newly added
    // to this vector's support to `new_ids` when non-null.
    void add(const SparseVector& other, std::vector<TermId>* new_ids = nullptr) {
        if (other.entries_.empty()) return;
        std::vector<Entry> merged;
        merged.reserve(entries_.size() + other.entries_.size());
        auto a = entries_.begin(), ae = entries_.end();
        auto b = other.entries_.begin(), be = other.entries_.end();
        while (a != ae && b != be) {
            if (a->first == b->first) {
                merged.emplace_back(a->first, a->second + b->second);
                ++a; ++b;
            } else if (a->first < b->first) {
                merged.push_back(*a++);
            } else {
                if (new_ids) new_ids->push_back(b->first);
                merged.push_back(*b++);
            }
        }
        merged.insert(merged.end(), a, ae);
        for (; b != be; ++b) {
            if (new_ids) new_ids->push_back(b->first);
            merged.push_back(*b);
        }
        entries_ = std::move(merged);
    }

    // Keeps only the k highest-weight entries (lossy memory bound for
    // centroid sums on unbounded streams). No-op if k == 0 or nnz <= k.
    void prune_top_k(std::size_t k) {
        if (k == 0 || entries_.size() <= k) return;
        std::vector<Entry> by_weight(entries_);
        std::nth_element(by_weight.begin(), by_weight.begin() + k, by_weight.end(),
                         [](const Entry& a, const Entry& b) {
                             if (a.second != b.second) return a.second > b.second;
                             return a.first < b.first;
                         });
        by_weight.resize(k);
        std::sort(by_weight.begin(), by_weight.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        entries_ = std::move(by_weight);
    }

    friend bool operator==(const SparseVector& a, const SparseVector& b) {
        return a.entries_ == b.entries_;
    }

private:
    std::vector<Entry> entries_;
};

// Dense vector in the shared crosslingual embedding space. An empty vector
// stands for the zero vector of whatever dimension is in play.
using DenseVector = std::vector<double>;

inline double dense_dot(const DenseVector& a, const DenseVector& b) {
    std::size_t n = std::min(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

inline double dense_norm(const DenseVector& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return std::sqrt(acc);
}

inline void dense_add(DenseVector& a, const DenseVector& b) {
    if (b.empty()) return;
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

inline void dense_normalize(DenseVector& a) {
    double n = dense_norm(a);
    if (n > 0.0)
        for (double& x : a) x /= n;
}

// Cosine with the zero vector defined as 0, so empty sections stay neutral.
inline double cosine(const SparseVector& a, const SparseVector& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

inline double dense_cosine(const DenseVector& a, const DenseVector& b) {
    double na = dense_norm(a), nb = dense_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dense_dot(a, b) / (na * nb);
}

// Document sections a subvector can be built from.
enum class Section : int { Both = 0, Title = 1, Body = 2 };

// Feature classes of the sparse monolingual subvectors.
enum class FeatureClass : int { Tokens = 0, Lemmas = 1, Entities = 2 };

inline constexpr int kMonoSubvectors = 9;
inline constexpr int kCrossSubvectors = 3;
inline constexpr int kMonoFeatures = 12;   // 9 cosines + 3 timestamp features
inline constexpr int kCrossFeatures = 6;   // 3 cosines + 3 timestamp features

// Fixed subvector layout. Class-major with the combined section first, so
// index 0 is the token vector over title+body (the primary text space):
//   0 tokens/both   1 tokens/title   2 tokens/body
//   3 lemmas/both   4 lemmas/title   5 lemmas/body
//   6 entities/both 7 entities/title 8 entities/body
// Dense subvectors: 0 both, 1 title, 2 body.
inline constexpr int mono_subvector_index(FeatureClass c, Section s) {
    return static_cast<int>(c) * 3 + static_cast<int>(s);
}
inline constexpr int cross_subvector_index(Section s) { return static_cast<int>(s); }

inline constexpr int kPrimarySubvector = mono_subvector_index(FeatureClass::Tokens, Section::Both);

// Full feature-space representation of one document: 9 sparse monolingual
// subvectors, 3 dense crosslingual subvectors, and the timestamp.
struct DocRepresentation {
    std::array<SparseVector, kMonoSubvectors> mono;
    std::array<DenseVector, kCrossSubvectors> cross;
    double timestamp = 0.0;
};

}  // namespace storyline
