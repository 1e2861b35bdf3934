#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>

#include "actflow/core/io.hpp"
#include "actflow/synth/corpus.hpp"
#include "actflow/synth/sprites.hpp"
#include "actflow/synth/trajectory.hpp"

using namespace actflow;
using namespace actflow::synth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("actflow_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// brute-force coverage-weighted centroid of the rendered foreground
std::array<double, 2> rendered_centroid(const VideoTensor& v, const SpriteScene& scene,
                                        int64_t t) {
    double acc_w = 0, acc_x = 0, acc_y = 0;
    for (int64_t y = 0; y < v.height; ++y)
        for (int64_t x = 0; x < v.width; ++x) {
            double d2 = 0;
            for (int c = 0; c < 3; ++c) {
                const double d = v.at(t, y, x, c) - scene.background[static_cast<size_t>(c)];
                d2 += d * d;
            }
            const double w = std::sqrt(d2);
            acc_w += w;
            acc_x += w * static_cast<double>(x);
            acc_y += w * static_cast<double>(y);
        }
    return {acc_x / acc_w, acc_y / acc_w};
}

}  // namespace

TEST(Trajectory, ZeroAmplitudeBounceStaysAtCenter) {
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::bounce;
    spec.amplitude = 0.0;
    spec.period = 5.0;
    spec.num_frames = 8;
    auto poses = make_trajectory(spec, 32, 32);
    ASSERT_EQ(poses.size(), 8u);
    for (const auto& p : poses) {
        EXPECT_DOUBLE_EQ(p.x, 15.5);
        EXPECT_DOUBLE_EQ(p.y, 15.5);
        EXPECT_DOUBLE_EQ(p.height_scale, 1.0);
    }
}

TEST(Trajectory, OrbitClosesAfterOnePeriod) {
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::orbit;
    spec.amplitude = 0.25;
    spec.period = 8.0;
    spec.phase = 0.0;
    spec.num_frames = 9;  // frame 8 evaluates the closed form at t = period
    auto poses = make_trajectory(spec, 32, 32);
    EXPECT_NEAR(poses[8].x, poses[0].x, 1e-9);
    EXPECT_NEAR(poses[8].y, poses[0].y, 1e-9);
}

TEST(Trajectory, ZigzagReversalFrames) {
    // period=4: direction reverses at frames 2 and 6
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::zigzag;
    spec.amplitude = 0.3;
    spec.period = 4.0;
    spec.num_frames = 8;
    auto poses = make_trajectory(spec, 32, 32);
    auto dir = [&](size_t i) { return poses[i + 1].x - poses[i].x; };
    // piecewise-linear, rising until frame 2, falling until frame 6, rising after
    EXPECT_GT(dir(0), 0.0);
    EXPECT_GT(dir(1), 0.0);
    EXPECT_LT(dir(2), 0.0);
    EXPECT_LT(dir(3), 0.0);
    EXPECT_LT(dir(4), 0.0);
    EXPECT_LT(dir(5), 0.0);
    EXPECT_GT(dir(6), 0.0);
    // closed-form check: x(t) = cx + a*cx*tri(t / (2*period))
    for (int64_t t = 0; t < 8; ++t) {
        const double u = static_cast<double>(t) / 8.0;
        const double expect = 15.5 + 0.3 * 15.5 * triangle_wave(u);
        EXPECT_NEAR(poses[static_cast<size_t>(t)].x, expect, 1e-12);
        EXPECT_DOUBLE_EQ(poses[static_cast<size_t>(t)].y, 15.5);
    }
}

TEST(Trajectory, AllPositionsInsideFrame) {
    Rng rng(17);
    for (int iter = 0; iter < 200; ++iter) {
        TrajectorySpec spec;
        spec.kind = static_cast<TrajectoryKind>(rng.uniform_int(5));
        spec.amplitude = rng.uniform();
        spec.period = rng.uniform(2.0, 12.0);
        spec.phase = rng.uniform(0.0, spec.period);
        spec.num_frames = 8;
        for (const auto& p : make_trajectory(spec, 32, 24)) {
            EXPECT_GE(p.x, 0.0);
            EXPECT_LE(p.x, 23.0);
            EXPECT_GE(p.y, 0.0);
            EXPECT_LE(p.y, 31.0);
        }
    }
}

TEST(Trajectory, SquatRiseScalesHeightOnly) {
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::squat_rise;
    spec.amplitude = 1.0;
    spec.period = 8.0;
    spec.num_frames = 9;
    auto poses = make_trajectory(spec, 32, 32);
    EXPECT_DOUBLE_EQ(poses[0].height_scale, 1.0);
    EXPECT_NEAR(poses[4].height_scale, 0.6, 1e-12);  // full squat at half period
    EXPECT_NEAR(poses[8].height_scale, 1.0, 1e-12);
    for (const auto& p : poses) {
        EXPECT_DOUBLE_EQ(p.x, 15.5);
        EXPECT_DOUBLE_EQ(p.y, 15.5);
    }
}

TEST(Trajectory, ContractErrors) {
    TrajectorySpec spec;
    spec.num_frames = 1;
    EXPECT_THROW(make_trajectory(spec, 32, 32), ContractError);
    spec.num_frames = 8;
    spec.amplitude = 1.5;
    EXPECT_THROW(make_trajectory(spec, 32, 32), ContractError);
    EXPECT_THROW(trajectory_kind_from_string("wiggle"), ConfigError);
}

TEST(Render, ConstantTrajectoryGivesIdenticalFrames) {
    SpriteScene scene;
    scene.shape = SpriteShape::circle;
    scene.size = 10;
    std::vector<SpritePose> traj(8, SpritePose{15.5, 15.5, 1.0});
    auto v = render_video(scene, traj, 32, 32);
    const size_t stride = 32 * 32 * 3;
    for (int64_t t = 1; t < 8; ++t)
        for (size_t i = 0; i < stride; ++i)
            ASSERT_EQ(v.data[static_cast<size_t>(t) * stride + i], v.data[i]);
}

TEST(Render, ForegroundPixelCountConstantForRigidMotion) {
    SpriteScene scene;
    scene.shape = SpriteShape::square;
    scene.size = 8;  // integer size: coverage count is exactly constant
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::zigzag;
    spec.amplitude = 0.3;
    spec.period = 4.0;
    spec.num_frames = 8;
    auto traj = make_trajectory(spec, 32, 32);
    auto masks = render_coverage(scene, traj, 32, 32);
    // 2x supersampling quantizes coverage, so totals agree only up to the
    // sampling resolution of the sprite boundary
    double first = 0.0;
    for (double c : masks[0]) first += c;
    EXPECT_NEAR(first, scene.size * scene.size, first * 0.1);
    for (size_t t = 1; t < masks.size(); ++t) {
        double total = 0.0;
        for (double c : masks[t]) total += c;
        EXPECT_NEAR(total, first, first * 0.08);
    }
}

TEST(Render, CentroidMatchesTrajectoryWithinHalfPixel) {
    Rng rng(23);
    for (int iter = 0; iter < 40; ++iter) {
        SpriteScene scene;
        scene.shape = static_cast<SpriteShape>(rng.uniform_int(4));
        scene.size = rng.uniform(9.0, 13.0);
        TrajectorySpec spec;
        spec.kind = static_cast<TrajectoryKind>(rng.uniform_int(5));
        spec.amplitude = spec.kind == TrajectoryKind::squat_rise ? rng.uniform(0.5, 1.0)
                                                                 : rng.uniform(0.1, 0.45);
        spec.period = rng.uniform(4.0, 10.0);
        spec.phase = rng.uniform(0.0, spec.period);
        spec.num_frames = 8;
        auto traj = make_trajectory(spec, 32, 32);
        auto v = render_video(scene, traj, 32, 32);
        for (int64_t t = 0; t < 8; ++t) {
            auto c = rendered_centroid(v, scene, t);
            EXPECT_NEAR(c[0], traj[static_cast<size_t>(t)].x, 0.5);
            EXPECT_NEAR(c[1], traj[static_cast<size_t>(t)].y, 0.5);
        }
    }
}

TEST(Render, OutOfBoundsRejected) {
    SpriteScene scene;
    scene.size = 10;
    std::vector<SpritePose> traj = {{2.0, 16.0, 1.0}};  // sprite spills past x=0
    EXPECT_THROW(render_video(scene, traj, 32, 32), RenderError);
}

TEST(GroundTruthTracklets, MatchesTrajectoryExactly) {
    SpriteScene scene;
    TrajectorySpec spec;
    spec.kind = TrajectoryKind::orbit;
    spec.amplitude = 0.2;
    spec.period = 8;
    spec.num_frames = 8;
    auto traj = make_trajectory(spec, 32, 32);
    auto tracks = ground_truth_tracklets(scene, traj);
    ASSERT_EQ(tracks.frames(), traj.size());
    EXPECT_EQ(tracks.valid_count(), traj.size());
    for (size_t i = 0; i < traj.size(); ++i) {
        EXPECT_DOUBLE_EQ(tracks.positions[i][0], traj[i].x);
        EXPECT_DOUBLE_EQ(tracks.positions[i][1], traj[i].y);
    }
    // constant trajectory -> zero displacement
    std::vector<SpritePose> constant(4, SpritePose{10, 10, 1.0});
    auto still = ground_truth_tracklets(scene, constant);
    for (size_t i = 1; i < still.positions.size(); ++i) {
        EXPECT_DOUBLE_EQ(still.positions[i][0], still.positions[0][0]);
        EXPECT_DOUBLE_EQ(still.positions[i][1], still.positions[0][1]);
    }
    EXPECT_THROW(ground_truth_tracklets(scene, {}), ContractError);
}

TEST(Corpus, EmptyCorpusHasEmptyManifest) {
    TempDir dir("corpus_empty");
    CorpusConfig cfg;
    cfg.size = 0;
    auto m = build_corpus(cfg, 1, dir.path);
    EXPECT_TRUE(m.items.empty());
    auto loaded = read_manifest(dir.path);
    EXPECT_TRUE(loaded.items.empty());
}

TEST(Corpus, DeterministicByteIdentical) {
    // size=512, seed=7, run twice -> identical manifests and file hashes
    TempDir dir_a("corpus_a"), dir_b("corpus_b");
    CorpusConfig cfg;
    cfg.size = 512;
    auto ma = build_corpus(cfg, 7, dir_a.path);
    auto mb = build_corpus(cfg, 7, dir_b.path);
    ASSERT_EQ(ma.items.size(), 512u);
    ASSERT_EQ(ma.items.size(), mb.items.size());
    for (size_t i = 0; i < ma.items.size(); ++i) {
        ASSERT_EQ(ma.items[i].video_hash, mb.items[i].video_hash);
        ASSERT_EQ(ma.items[i].meta_hash, mb.items[i].meta_hash);
    }
    // manifests byte-identical (paths inside are relative)
    EXPECT_EQ(read_file_bytes(dir_a.path / "manifest.json"),
              read_file_bytes(dir_b.path / "manifest.json"));
}

TEST(Corpus, ManifestCountMatchesConfigAndItemsReload) {
    TempDir dir("corpus_small");
    CorpusConfig cfg;
    cfg.size = 16;
    auto m = build_corpus(cfg, 3, dir.path);
    EXPECT_EQ(static_cast<int64_t>(m.items.size()), cfg.size);
    auto loaded = read_manifest(dir.path);
    EXPECT_EQ(loaded.items.size(), m.items.size());
    auto item = load_item(dir.path, loaded, 5);
    EXPECT_EQ(item.video.frames, cfg.num_frames);
    EXPECT_EQ(item.video.height, cfg.height);
    EXPECT_EQ(item.video.width, cfg.width);
    EXPECT_TRUE(item.meta.contains("prompt"));
}

TEST(Corpus, SpriteContrastEnforced) {
    TempDir dir("corpus_contrast");
    CorpusConfig cfg;
    cfg.size = 64;
    auto m = build_corpus(cfg, 11, dir.path);
    auto loaded = read_manifest(dir.path);
    for (size_t i = 0; i < loaded.items.size(); ++i) {
        auto item = load_item(dir.path, loaded, i);
        auto color = item.meta.at("scene").at("color").get<std::array<double, 3>>();
        auto bg = item.meta.at("scene").at("background").get<std::array<double, 3>>();
        EXPECT_GE(color_dist(color, bg), cfg.min_contrast);
    }
}
