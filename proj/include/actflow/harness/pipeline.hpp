#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "actflow/codec/codec.hpp"
#include "actflow/core/errors.hpp"
#include "actflow/core/io.hpp"
#include "actflow/core/rng.hpp"
#include "actflow/diffusion/sampler.hpp"
#include "actflow/diffusion/schedule.hpp"
#include "actflow/fae/fae.hpp"
#include "actflow/fae/schedule.hpp"
#include "actflow/fae/train.hpp"
#include "actflow/harness/checkpoint.hpp"
#include "actflow/harness/dataset.hpp"
#include "actflow/harness/png.hpp"
#include "actflow/harness/train_base.hpp"
#include "actflow/harness/vocab.hpp"
#include "actflow/metrics/metrics.hpp"
#include "actflow/refadapter/refadapter.hpp"
#include "actflow/refadapter/train.hpp"
#include "actflow/synth/corpus.hpp"

namespace actflow::harness {

// Pipeline numeric type. Double keeps the byte-exactness contracts simple
// and is fast enough at toy scale.
using Real = double;

// ---------------------------------------------------------------------------
// checkpoint (de)serialization for the three artifact kinds
// ---------------------------------------------------------------------------

struct BaseBundle {
    mmdit::Model<Real> model;
    codec::Codec codec{2, 4};
    diffusion::NoiseSchedule sched;
    Vocabulary vocab = Vocabulary::toy();
    int64_t data_frames = 8;
    int64_t data_height = 32;
    int64_t data_width = 32;
    std::string hash;
};

inline nlohmann::json base_config_json(const mmdit::Model<Real>& model,
                                       const diffusion::NoiseSchedule& sched,
                                       double beta_lo, double beta_hi,
                                       int64_t frames, int64_t height, int64_t width,
                                       const Vocabulary& vocab) {
    const auto& c = model.cfg;
    const auto& l = model.latent;
    return nlohmann::json{
        {"model",
         {{"dim", c.dim},
          {"layers", c.layers},
          {"heads", c.heads},
          {"patch", c.patch},
          {"prompt_vocab", c.prompt_vocab},
          {"prompt_len", c.prompt_len},
          {"mlp_hidden", c.mlp_hidden}}},
        {"latent",
         {{"t", l.t}, {"h", l.h}, {"w", l.w}, {"c", l.c}, {"f_t", l.f_t}, {"f_s", l.f_s}}},
        {"data", {{"frames", frames}, {"height", height}, {"width", width}}},
        {"schedule", {{"T", sched.T}, {"beta_lo", beta_lo}, {"beta_hi", beta_hi}}},
        {"vocab", vocab.words()}};
}

inline std::string save_base_checkpoint(const std::filesystem::path& path,
                                        const mmdit::Model<Real>& model,
                                        const diffusion::NoiseSchedule& sched,
                                        double beta_lo, double beta_hi, int64_t frames,
                                        int64_t height, int64_t width,
                                        const Vocabulary& vocab) {
    Checkpoint ckpt = make_checkpoint(
        CheckpointKind::base,
        base_config_json(model, sched, beta_lo, beta_hi, frames, height, width, vocab),
        model.params);
    write_checkpoint(path, ckpt);
    return ckpt.content_hash;
}

inline BaseBundle load_base_checkpoint(const std::filesystem::path& path) {
    Checkpoint ckpt = read_checkpoint(path, CheckpointKind::base);
    const auto& j = ckpt.config;
    mmdit::ModelConfig cfg;
    cfg.dim = j.at("model").at("dim").get<int64_t>();
    cfg.layers = j.at("model").at("layers").get<int64_t>();
    cfg.heads = j.at("model").at("heads").get<int64_t>();
    cfg.patch = j.at("model").at("patch").get<int64_t>();
    cfg.prompt_vocab = j.at("model").at("prompt_vocab").get<int64_t>();
    cfg.prompt_len = j.at("model").at("prompt_len").get<int64_t>();
    cfg.mlp_hidden = j.at("model").at("mlp_hidden").get<int64_t>();
    mmdit::LatentShape latent;
    latent.t = j.at("latent").at("t").get<int64_t>();
    latent.h = j.at("latent").at("h").get<int64_t>();
    latent.w = j.at("latent").at("w").get<int64_t>();
    latent.c = j.at("latent").at("c").get<int64_t>();
    latent.f_t = j.at("latent").at("f_t").get<int>();
    latent.f_s = j.at("latent").at("f_s").get<int>();

    Rng rng(0);
    BaseBundle b{mmdit::Model<Real>::init(cfg, latent, rng),
                 codec::Codec(latent.f_t, latent.f_s),
                 diffusion::NoiseSchedule::linear(
                     j.at("schedule").at("T").get<int64_t>(),
                     j.at("schedule").at("beta_lo").get<double>(),
                     j.at("schedule").at("beta_hi").get<double>()),
                 Vocabulary(j.at("vocab").get<std::vector<std::string>>()),
                 j.at("data").at("frames").get<int64_t>(),
                 j.at("data").at("height").get<int64_t>(),
                 j.at("data").at("width").get<int64_t>(),
                 ckpt.content_hash};
    load_into_store(ckpt, b.model.params);
    return b;
}

inline std::string save_adapter_checkpoint(const std::filesystem::path& path,
                                           const refadapter::AdapterWeights<Real>& adapter,
                                           const std::string& base_hash) {
    Checkpoint ckpt = make_checkpoint(CheckpointKind::adapter,
                                      nlohmann::json{{"rank", adapter.rank},
                                                     {"scale", adapter.scale},
                                                     {"layers", adapter.layers},
                                                     {"dim", adapter.dim},
                                                     {"base_hash", base_hash}},
                                      adapter.params);
    write_checkpoint(path, ckpt);
    return ckpt.content_hash;
}

struct LoadedAdapter {
    refadapter::AdapterWeights<Real> weights;
    std::string hash;
    std::string base_hash;
};

inline LoadedAdapter load_adapter_checkpoint(const std::filesystem::path& path) {
    Checkpoint ckpt = read_checkpoint(path, CheckpointKind::adapter);
    Rng rng(0);
    LoadedAdapter out{refadapter::AdapterWeights<Real>::init(
                          ckpt.config.at("layers").get<int64_t>(),
                          ckpt.config.at("dim").get<int64_t>(),
                          ckpt.config.at("rank").get<int64_t>(),
                          ckpt.config.at("scale").get<Real>(), rng),
                      ckpt.content_hash,
                      ckpt.config.value("base_hash", std::string())};
    load_into_store(ckpt, out.weights.params);
    return out;
}

inline std::string save_freq_checkpoint(const std::filesystem::path& path,
                                        const fae::FrequencyEmbedding<Real>& emb,
                                        const std::string& base_hash) {
    Checkpoint ckpt = make_checkpoint(CheckpointKind::freq_emb,
                                      nlohmann::json{{"layers", emb.layers},
                                                     {"tokens", emb.tokens},
                                                     {"dim", emb.dim},
                                                     {"reference_id", emb.reference_id},
                                                     {"base_hash", base_hash}},
                                      emb.params);
    write_checkpoint(path, ckpt);
    return ckpt.content_hash;
}

struct LoadedFreq {
    fae::FrequencyEmbedding<Real> embedding;
    std::string hash;
    std::string base_hash;
};

inline LoadedFreq load_freq_checkpoint(const std::filesystem::path& path) {
    Checkpoint ckpt = read_checkpoint(path, CheckpointKind::freq_emb);
    Rng rng(0);
    LoadedFreq out{fae::FrequencyEmbedding<Real>::init(
                       ckpt.config.at("layers").get<int64_t>(),
                       ckpt.config.at("tokens").get<int64_t>(),
                       ckpt.config.at("dim").get<int64_t>(),
                       ckpt.config.at("reference_id").get<std::string>(), Real(0), rng),
                   ckpt.content_hash,
                   ckpt.config.value("base_hash", std::string())};
    load_into_store(ckpt, out.embedding.params);
    return out;
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

inline void write_loss_log(const std::filesystem::path& path, const LossLog& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "step,loss\n";
    char buf[64];
    for (const auto& [step, loss] : log) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9f\n", static_cast<long long>(step), loss);
        out << buf;
    }
}

// Loads a raw video; dimensions come from the JSON sidecar next to the file
// when present, otherwise from the provided defaults.
inline VideoTensor load_video_flex(const std::filesystem::path& path, int64_t frames,
                                   int64_t height, int64_t width) {
    std::filesystem::path sidecar = path;
    sidecar.replace_extension(".json");
    if (std::filesystem::exists(sidecar)) {
        const auto j = read_json_file(sidecar);
        if (j.contains("format")) {
            const auto& f = j.at("format");
            frames = f.value("frames", frames);
            height = f.value("height", height);
            width = f.value("width", width);
        }
    }
    return read_video_rgb8(path, frames, height, width);
}

// ---------------------------------------------------------------------------
// inference (stage composition of base + adapter + frequency embedding)
// ---------------------------------------------------------------------------

struct InferArgs {
    std::filesystem::path base_ckpt;
    std::filesystem::path adapter_ckpt;  // optional: empty = no adapter
    std::filesystem::path freq_ckpt;     // optional: empty = no embedding
    ImageTensor target;
    std::string prompt;
    fae::BiasScheduleParams schedule;
    fae::ScheduleVariant variant = fae::ScheduleVariant::cosine_transition;
    bool use_schedule = true;  // false: no bias hook attached at all
    int64_t num_steps = 50;
    bool replace_first = true;
    uint64_t seed = 0;
    std::string run_id = "infer";
    std::filesystem::path out_dir;  // empty: nothing written
};

struct InferResult {
    VideoTensor video;
    bool clamped = false;
    std::string base_hash;
    std::string adapter_hash;
    std::string freq_hash;
    std::filesystem::path video_path;
    std::filesystem::path meta_path;
};

inline InferResult run_infer(const InferArgs& args) {
    BaseBundle base = load_base_checkpoint(args.base_ckpt);

    std::optional<LoadedAdapter> adapter;
    if (!args.adapter_ckpt.empty()) {
        adapter = load_adapter_checkpoint(args.adapter_ckpt);
        refadapter::inject_adapter(base.model, adapter->weights);  // validates targets
    }
    std::optional<LoadedFreq> freq;
    if (!args.freq_ckpt.empty()) {
        freq = load_freq_checkpoint(args.freq_ckpt);
    }

    if (args.target.height != base.data_height || args.target.width != base.data_width) {
        throw ConfigError("target image resolution does not match the model (" +
                          std::to_string(args.target.height) + "x" +
                          std::to_string(args.target.width) + " vs " +
                          std::to_string(base.data_height) + "x" +
                          std::to_string(base.data_width) + ")");
    }
    if (args.use_schedule && args.schedule.alpha > 0.0 && !freq) {
        throw ContractError(
            "schedule bias has no target: no frequency embedding checkpoint given");
    }

    const auto prompt_ids = base.vocab.tokenize(args.prompt, base.model.cfg.prompt_len);
    const codec::LatentGrid image_latent = base.codec.encode_image(args.target);

    // pure-noise video latent, slot 0 optionally replaced by the condition
    Rng rng(args.seed);
    codec::LatentGrid proto(base.model.latent.t, base.model.latent.h, base.model.latent.w,
                            base.model.latent.c, base.model.latent.f_t,
                            base.model.latent.f_s);
    codec::LatentGrid noise = diffusion::sample_noise_like(proto, rng);
    auto bundle =
        refadapter::build_conditioning(noise, image_latent, args.replace_first);
    codec::LatentGrid x0 = codec::slice_channels(bundle.model_input, 0, proto.c);
    codec::LatentGrid cond =
        codec::slice_channels(bundle.model_input, proto.c, proto.c);

    auto model_fn = [&](const codec::LatentGrid& x, const codec::LatentGrid& c,
                        int64_t t, double bias) {
        mmdit::ForwardOptions<Real> opt;
        if (adapter) opt.adapter = &adapter->weights;
        if (freq) opt.freq = &freq->embedding;
        opt.bias = static_cast<Real>(bias);
        return base.model.forward(codec::concat_channels(x, c), t, prompt_ids, opt);
    };

    diffusion::BiasHook hook;
    if (args.use_schedule) {
        hook = fae::bias_hook(args.schedule, args.variant);
    }
    codec::LatentGrid out_latent =
        diffusion::sample(model_fn, x0, cond, base.sched, args.num_steps, hook);
    auto decoded = base.codec.decode_display(out_latent);

    InferResult res;
    res.video = std::move(decoded.video);
    res.clamped = decoded.clamped;
    res.base_hash = base.hash;
    if (adapter) res.adapter_hash = adapter->hash;
    if (freq) res.freq_hash = freq->hash;

    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        res.video_path = args.out_dir / (args.run_id + ".rgb8");
        res.meta_path = args.out_dir / (args.run_id + ".json");
        write_video_rgb8(res.video_path, res.video);
        nlohmann::json meta{
            {"run_id", args.run_id},
            {"seed", args.seed},
            {"prompt", args.prompt},
            {"num_steps", args.num_steps},
            {"replace_first", args.replace_first},
            {"clamped", res.clamped},
            {"schedule",
             {{"enabled", args.use_schedule},
              {"alpha", args.schedule.alpha},
              {"t_l", args.schedule.t_low_freq},
              {"t_h", args.schedule.t_high_freq},
              {"T", args.schedule.horizon},
              {"variant", fae::to_string(args.variant)}}},
            {"inputs",
             {{"base_hash", res.base_hash},
              {"adapter_hash", res.adapter_hash},
              {"freq_hash", res.freq_hash}}},
            {"format",
             {{"layout", "frame-major,row-major,rgb,u8"},
              {"frames", res.video.frames},
              {"height", res.video.height},
              {"width", res.video.width}}}};
        write_json_file(res.meta_path, meta);
    }
    return res;
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

inline metrics::MetricReport evaluate_run(const VideoTensor& generated,
                                          const VideoTensor& reference,
                                          const ImageTensor& target,
                                          const std::string& prompt,
                                          const metrics::EncoderHandle& enc) {
    (void)target;  // recorded by callers in run metadata
    metrics::MetricReport r;
    r.prompt = prompt;
    r.text_similarity = metrics::text_similarity(generated, prompt, enc);
    r.temporal_consistency = metrics::temporal_consistency(generated, enc);
    r.appearance_consistency = metrics::appearance_consistency(generated, enc);
    const synth::Tracklets ref_tracks = metrics::track_centroids(reference);
    const synth::Tracklets gen_tracks = metrics::track_centroids(generated);
    try {
        r.motion_fidelity = metrics::motion_fidelity(ref_tracks, gen_tracks);
        r.motion_fidelity_valid = true;
    } catch (const InsufficientDataError&) {
        r.motion_fidelity = 0.0;
        r.motion_fidelity_valid = false;
    }
    return r;
}

inline std::string metric_csv_header() {
    return "run_id,seed,prompt,text_similarity,motion_fidelity,motion_fidelity_valid,"
           "temporal_consistency,appearance_consistency";
}

inline std::string metric_csv_row(const metrics::MetricReport& r) {
    char buf[256];
    std::string motion = "";
    if (r.motion_fidelity_valid) {
        std::snprintf(buf, sizeof(buf), "%.9f", r.motion_fidelity);
        motion = buf;
    }
    std::string row = r.run_id + "," + std::to_string(r.seed) + "," + r.prompt + ",";
    std::snprintf(buf, sizeof(buf), "%.9f", r.text_similarity);
    row += buf;
    row += "," + motion + ",";
    row += r.motion_fidelity_valid ? "1" : "0";
    std::snprintf(buf, sizeof(buf), ",%.9f", r.temporal_consistency);
    row += buf;
    std::snprintf(buf, sizeof(buf), ",%.9f", r.appearance_consistency);
    row += buf;
    return row;
}

inline void append_metric_csv(const std::filesystem::path& path,
                              const metrics::MetricReport& r) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    if (fresh) out << metric_csv_header() << "\n";
    out << metric_csv_row(r) << "\n";
}

// ---------------------------------------------------------------------------
// schedule dump
// ---------------------------------------------------------------------------

inline void write_schedule_csv(const std::filesystem::path& path,
                               const fae::BiasScheduleParams& params,
                               fae::ScheduleVariant variant) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "t,w_bias\n";
    char buf[64];
    for (const auto& [t, w] : fae::schedule_table(params, variant)) {
        std::snprintf(buf, sizeof(buf), "%lld,%.12f\n", static_cast<long long>(t), w);
        out << buf;
    }
}

}  // namespace actflow::harness
