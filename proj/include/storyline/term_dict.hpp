#pragma once

#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "storyline/types.hpp"

namespace storyline {

// Interns (feature class, term) pairs to dense term ids and back. Terms of
// different feature classes never collide even when their surface strings
// match ("paris" the token and "paris" the entity are distinct dimensions).
// Safe for concurrent interning from featurizer threads.
class TermDict {
public:
    TermId intern(FeatureClass cls, std::string_view term) {
        std::string key = make_key(cls, term);
        {
            std::shared_lock lock(mutex_);
            auto it = ids_.find(key);
            if (it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mutex_);
        auto [it, inserted] = ids_.try_emplace(std::move(key), static_cast<TermId>(terms_.size()));
        if (inserted) terms_.push_back(it->first);
        return it->second;
    }

    // Reverse lookup; returns the key without the class prefix.
    std::string term(TermId id) const {
        std::shared_lock lock(mutex_);
        if (id >= terms_.size()) throw InputError("unknown term id");
        return std::string(terms_[id].substr(2));
    }

    FeatureClass feature_class(TermId id) const {
        std::shared_lock lock(mutex_);
        if (id >= terms_.size()) throw InputError("unknown term id");
        switch (terms_[id][0]) {
            case 't': return FeatureClass::Tokens;
            case 'l': return FeatureClass::Lemmas;
            default:  return FeatureClass::Entities;
        }
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return terms_.size();
    }

private:
    static std::string make_key(FeatureClass cls, std::string_view term) {
        static constexpr char tag[] = {'t', 'l', 'e'};
        std::string key;
        key.reserve(term.size() + 2);
        key.push_back(tag[static_cast<int>(cls)]);
        key.push_back('\x1f');
        key.append(term);
        return key;
    }

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, TermId> ids_;
    std::deque<std::string_view> terms_;  // id -> key; views into ids_ keys, which never move
};

}  // namespace storyline
