#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "actflow/core/errors.hpp"
#include "actflow/core/io.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/synth/sprites.hpp"
#include "actflow/synth/trajectory.hpp"

namespace actflow::synth {

// Per-frame centroid track of a video's subject.
struct Tracklets {
    std::vector<std::array<double, 2>> positions;  // (x, y) pixel units
    std::vector<uint8_t> valid;

    size_t frames() const { return positions.size(); }
    size_t valid_count() const {
        size_t n = 0;
        for (uint8_t v : valid) n += v ? 1 : 0;
        return n;
    }
};

// Ground truth replaces an external tracking model: tracklet positions are
// the trajectory itself, all frames valid.
inline Tracklets ground_truth_tracklets(const SpriteScene& scene,
                                        const std::vector<SpritePose>& traj) {
    (void)scene;
    if (traj.empty()) {
        throw ContractError("trajectory is empty");
    }
    Tracklets t;
    t.positions.reserve(traj.size());
    for (const SpritePose& p : traj) {
        t.positions.push_back({p.x, p.y});
    }
    t.valid.assign(traj.size(), 1);
    return t;
}

struct NamedColor {
    const char* word;
    std::array<double, 3> rgb;
};

// Sprite palette; each entry doubles as a prompt word.
inline const std::vector<NamedColor>& sprite_palette() {
    static const std::vector<NamedColor> kPalette = {
        {"red", {0.85, 0.12, 0.12}},    {"green", {0.12, 0.75, 0.20}},
        {"blue", {0.15, 0.25, 0.90}},   {"yellow", {0.90, 0.85, 0.15}},
        {"magenta", {0.85, 0.20, 0.80}}, {"cyan", {0.15, 0.80, 0.85}},
        {"white", {0.92, 0.92, 0.92}},  {"orange", {0.95, 0.55, 0.10}},
    };
    return kPalette;
}

struct CorpusConfig {
    int64_t size = 512;
    int64_t num_frames = 8;
    int64_t height = 32;
    int64_t width = 32;
    double min_sprite_size = 9.0;
    double max_sprite_size = 13.0;
    double min_amplitude = 0.12;
    double min_contrast = 0.35;  // L2 distance between sprite and background
    double min_period = 4.0;
    double max_period = 10.0;
};

inline nlohmann::json to_json(const CorpusConfig& c) {
    return nlohmann::json{{"size", c.size},
                          {"num_frames", c.num_frames},
                          {"height", c.height},
                          {"width", c.width},
                          {"min_sprite_size", c.min_sprite_size},
                          {"max_sprite_size", c.max_sprite_size},
                          {"min_amplitude", c.min_amplitude},
                          {"min_contrast", c.min_contrast},
                          {"min_period", c.min_period},
                          {"max_period", c.max_period}};
}

struct CorpusItem {
    std::string id;
    std::string video_path;  // relative to the corpus directory
    std::string meta_path;
    std::string video_hash;
    std::string meta_hash;
};

struct Manifest {
    uint64_t seed = 0;
    CorpusConfig config;
    std::vector<CorpusItem> items;
};

struct SampledItem {
    SpriteScene scene;
    TrajectorySpec spec;
    std::string color_word;
};

inline double color_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Deterministically draw one corpus item's scene and trajectory from the
// item's private stream.
inline SampledItem sample_item(const CorpusConfig& cfg, Rng& rng) {
    SampledItem it;
    it.scene.shape = static_cast<SpriteShape>(rng.uniform_int(4));
    const auto& palette = sprite_palette();
    const auto& col = palette[static_cast<size_t>(rng.uniform_int(
        static_cast<int64_t>(palette.size())))];
    it.scene.color = col.rgb;
    it.color_word = col.word;
    it.scene.size = rng.uniform(cfg.min_sprite_size, cfg.max_sprite_size);
    for (int tries = 0; tries < 64; ++tries) {
        it.scene.background = {rng.uniform(0.05, 0.35), rng.uniform(0.05, 0.35),
                               rng.uniform(0.05, 0.35)};
        if (color_dist(it.scene.background, it.scene.color) >= cfg.min_contrast) break;
        if (tries == 63) it.scene.background = {0.05, 0.05, 0.05};
    }

    it.spec.kind = static_cast<TrajectoryKind>(rng.uniform_int(5));
    it.spec.num_frames = cfg.num_frames;
    it.spec.period = rng.uniform(cfg.min_period, cfg.max_period);
    it.spec.phase = rng.uniform(0.0, it.spec.period);
    if (it.spec.kind == TrajectoryKind::squat_rise) {
        it.spec.amplitude = rng.uniform(0.5, 1.0);
    } else {
        // keep the sprite inside the frame with margin for anti-aliasing
        const double half_extent = static_cast<double>(std::min(cfg.height, cfg.width) - 1) / 2.0;
        const double max_disp = half_extent - it.scene.size / 2.0 - 0.75;
        const double max_amp = std::max(cfg.min_amplitude, max_disp / half_extent);
        it.spec.amplitude = rng.uniform(cfg.min_amplitude, max_amp);
    }
    return it;
}

inline nlohmann::json item_metadata(const SampledItem& it,
                                    const std::vector<SpritePose>& poses,
                                    const CorpusConfig& cfg) {
    nlohmann::json traj_positions = nlohmann::json::array();
    nlohmann::json traj_scales = nlohmann::json::array();
    for (const SpritePose& p : poses) {
        traj_positions.push_back({p.x, p.y});
        traj_scales.push_back(p.height_scale);
    }
    return nlohmann::json{
        {"scene",
         {{"shape", to_string(it.scene.shape)},
          {"color", it.scene.color},
          {"color_word", it.color_word},
          {"size", it.scene.size},
          {"background", it.scene.background}}},
        {"trajectory",
         {{"kind", to_string(it.spec.kind)},
          {"amplitude", it.spec.amplitude},
          {"period", it.spec.period},
          {"phase", it.spec.phase},
          {"num_frames", it.spec.num_frames},
          {"positions", traj_positions},
          {"height_scales", traj_scales}}},
        {"prompt", it.color_word + " " + to_string(it.scene.shape)},
        {"format",
         {{"layout", "frame-major,row-major,rgb,u8"},
          {"frames", cfg.num_frames},
          {"height", cfg.height},
          {"width", cfg.width}}}};
}

// Write N rendered videos + metadata sidecars + a manifest under `out_dir`.
// Identical (config, seed) reproduce a byte-identical corpus.
inline Manifest build_corpus(const CorpusConfig& cfg, uint64_t seed,
                             const std::filesystem::path& out_dir) {
    if (cfg.size < 0) {
        throw ConfigError("corpus size must be >= 0");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw IoError("cannot create corpus directory: " + out_dir.string());
    }

    Manifest manifest;
    manifest.seed = seed;
    manifest.config = cfg;

    for (int64_t i = 0; i < cfg.size; ++i) {
        Rng rng = Rng::for_stream(seed, static_cast<uint64_t>(i));
        SampledItem it = sample_item(cfg, rng);
        auto poses = make_trajectory(it.spec, cfg.height, cfg.width);
        VideoTensor video = render_video(it.scene, poses, cfg.height, cfg.width);

        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "item_%05lld", static_cast<long long>(i));
        CorpusItem entry;
        entry.id = idbuf;
        entry.video_path = entry.id + ".rgb8";
        entry.meta_path = entry.id + ".json";

        write_video_rgb8(out_dir / entry.video_path, video);
        write_json_file(out_dir / entry.meta_path, item_metadata(it, poses, cfg));
        entry.video_hash = hash_file_hex(out_dir / entry.video_path);
        entry.meta_hash = hash_file_hex(out_dir / entry.meta_path);
        manifest.items.push_back(std::move(entry));
    }

    nlohmann::json j{{"schema", 1},
                     {"seed", seed},
                     {"config", to_json(cfg)},
                     {"items", nlohmann::json::array()}};
    for (const CorpusItem& e : manifest.items) {
        j["items"].push_back({{"id", e.id},
                              {"video", e.video_path},
                              {"meta", e.meta_path},
                              {"video_hash", e.video_hash},
                              {"meta_hash", e.meta_hash}});
    }
    write_json_file(out_dir / "manifest.json", j);
    return manifest;
}

struct LoadedItem {
    VideoTensor video;
    nlohmann::json meta;
};

inline Manifest read_manifest(const std::filesystem::path& corpus_dir) {
    nlohmann::json j = read_json_file(corpus_dir / "manifest.json");
    Manifest m;
    m.seed = j.at("seed").get<uint64_t>();
    const auto& c = j.at("config");
    m.config.size = c.at("size").get<int64_t>();
    m.config.num_frames = c.at("num_frames").get<int64_t>();
    m.config.height = c.at("height").get<int64_t>();
    m.config.width = c.at("width").get<int64_t>();
    m.config.min_sprite_size = c.at("min_sprite_size").get<double>();
    m.config.max_sprite_size = c.at("max_sprite_size").get<double>();
    m.config.min_amplitude = c.at("min_amplitude").get<double>();
    m.config.min_contrast = c.at("min_contrast").get<double>();
    m.config.min_period = c.at("min_period").get<double>();
    m.config.max_period = c.at("max_period").get<double>();
    for (const auto& e : j.at("items")) {
        CorpusItem item;
        item.id = e.at("id").get<std::string>();
        item.video_path = e.at("video").get<std::string>();
        item.meta_path = e.at("meta").get<std::string>();
        item.video_hash = e.at("video_hash").get<std::string>();
        item.meta_hash = e.at("meta_hash").get<std::string>();
        m.items.push_back(std::move(item));
    }
    return m;
}

inline LoadedItem load_item(const std::filesystem::path& corpus_dir,
                            const Manifest& m, size_t index) {
    if (index >= m.items.size()) {
        throw ContractError("corpus item index out of range");
    }
    const CorpusItem& e = m.items[index];
    LoadedItem out;
    out.meta = read_json_file(corpus_dir / e.meta_path);
    const auto& fmt = out.meta.at("format");
    out.video = read_video_rgb8(corpus_dir / e.video_path,
                                fmt.at("frames").get<int64_t>(),
                                fmt.at("height").get<int64_t>(),
                                fmt.at("width").get<int64_t>());
    return out;
}

}  // namespace actflow::synth
