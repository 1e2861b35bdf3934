#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "actflow/core/errors.hpp"
#include "actflow/synth/corpus.hpp"

namespace actflow::harness {

// Toy prompt vocabulary: pad token, color words, shape words, action words.
// Unknown words map to the pad token.
class Vocabulary {
public:
    explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
        if (words_.empty() || words_[0] != "<pad>") {
            throw ConfigError("vocabulary must start with <pad>");
        }
        for (size_t i = 0; i < words_.size(); ++i) {
            ids_[words_[i]] = static_cast<int64_t>(i);
        }
    }

    static Vocabulary toy() {
        std::vector<std::string> words = {"<pad>"};
        for (const auto& c : synth::sprite_palette()) words.push_back(c.word);
        for (const char* s : {"square", "circle", "triangle", "star"}) words.push_back(s);
        for (const char* a : {"bounce", "zigzag", "orbit", "dash", "squat-rise"})
            words.push_back(a);
        return Vocabulary(std::move(words));
    }

    int64_t id_of(const std::string& word) const {
        auto it = ids_.find(word);
        return it == ids_.end() ? 0 : it->second;
    }

    std::vector<int64_t> tokenize(const std::string& prompt, int64_t prompt_len) const {
        std::vector<int64_t> ids;
        std::istringstream ss(prompt);
        std::string word;
        while (ss >> word && static_cast<int64_t>(ids.size()) < prompt_len) {
            ids.push_back(id_of(word));
        }
        while (static_cast<int64_t>(ids.size()) < prompt_len) ids.push_back(0);
        return ids;
    }

    const std::vector<std::string>& words() const { return words_; }
    int64_t size() const { return static_cast<int64_t>(words_.size()); }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int64_t> ids_;
};

}  // namespace actflow::harness
