#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actflow/core/video.hpp"
#include "actflow/harness/vocab.hpp"
#include "actflow/synth/corpus.hpp"

namespace actflow::harness {

struct TrainItem {
    VideoTensor video;
    std::vector<int64_t> prompt_ids;
    std::string prompt;
};

// Preloads the whole corpus; toy corpora are a few megabytes.
inline std::vector<TrainItem> load_dataset(const std::filesystem::path& corpus_dir,
                                           const synth::Manifest& manifest,
                                           const Vocabulary& vocab,
                                           int64_t prompt_len) {
    std::vector<TrainItem> items;
    items.reserve(manifest.items.size());
    for (size_t i = 0; i < manifest.items.size(); ++i) {
        synth::LoadedItem li = synth::load_item(corpus_dir, manifest, i);
        TrainItem item;
        item.prompt = li.meta.at("prompt").get<std::string>();
        item.prompt_ids = vocab.tokenize(item.prompt, prompt_len);
        item.video = std::move(li.video);
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace actflow::harness
