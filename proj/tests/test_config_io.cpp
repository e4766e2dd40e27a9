// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "reage/config.hpp"
#include "reage/errors.hpp"
#include "reage/trajectory_io.hpp"
#include "test_support.hpp"

using namespace reage;
using namespace reage::testing;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

RunConfig seeded() {
    RunConfig c;
    c.seed = 7;
    return c;
}

}  // namespace

TEST(ConfigText, ParsesKeyValueLinesAndComments) {
    const auto v = parse_config_text("# header\nsteps = 20\n\n  xi=0.5   # inline\nsrc_prompt = Photo  of a   man\n");
    EXPECT_EQ(v.at("steps"), "20");
    EXPECT_EQ(v.at("xi"), "0.5");
    const auto c = config_from_values(v);
    EXPECT_EQ(c.steps, 20u);
    EXPECT_EQ(c.xi, 0.5);
    EXPECT_EQ(c.src_prompt, "Photo of a man");
    EXPECT_FALSE(c.seed.has_value());
}

TEST(ConfigText, ErrorsNameLineAndKey) {
    EXPECT_EQ(error_of([] { parse_config_text("steps = 1\nbogus = 3\n"); }), "config line 2: unknown key 'bogus'");
    EXPECT_EQ(error_of([] { parse_config_text("steps 1\n"); }), "config line 1: expected key = value");
    EXPECT_EQ(error_of([] { config_from_values({{"steps", "ten"}}); }),
              "config field steps: 'ten' is not a non-negative integer");
    EXPECT_EQ(error_of([] { config_from_values({{"xi", "inf"}}); }), "config field xi: 'inf' is not a finite number");
    EXPECT_EQ(error_of([] { config_from_values({{"mode", "p2p"}}); }),
              "config field mode: 'p2p' is not one of angular, aac");
    EXPECT_THROW(config_from_values({{"record_timing", "maybe"}}), ValidationError);
    EXPECT_THROW(config_from_values({{"self_layers", "4"}}), ValidationError);
    EXPECT_THROW(config_from_values({{"seed", "-1"}}), ValidationError);
}

TEST(ConfigValues, StructuredFields) {
    const auto c = config_from_values({{"self_layers", "2-9"},
                                       {"latent_shape", "8x3"},
                                       {"metrics", "mae, fnmr_at_fmr"},
                                       {"fmr_targets", "0.01,0.1"},
                                       {"record_timing", "yes"},
                                       {"mode", "aac"}});
    EXPECT_EQ(c.self_layers.first, 2);
    EXPECT_EQ(c.self_layers.last, 9);
    EXPECT_EQ(c.latent_shape, (Shape{8, 3}));
    EXPECT_EQ(c.metrics, (std::vector<std::string>{"mae", "fnmr_at_fmr"}));
    EXPECT_EQ(c.fmr_targets, (std::vector<double>{0.01, 0.1}));
    EXPECT_TRUE(c.record_timing);
    EXPECT_EQ(c.mode, EditMode::aac);
}

TEST(ConfigValues, RoundTripThroughText) {
    RunConfig c = seeded();
    c.xi = 0.1 + 0.2;
    c.cfg_scale = 3.3;
    c.src_prompt = "Photo of a 20 years old person";
    c.latent_shape = {5};
    c.metrics = {"mae"};
    const auto back = config_from_values(config_to_values(c));
    EXPECT_EQ(back.xi, c.xi);
    EXPECT_EQ(config_to_values(back), config_to_values(c));
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ(config_to_values(c).size(), config_keys().size());
}

TEST(ConfigHash, CoversParametersButNotOutputLocations) {
    const RunConfig base = seeded();
    const auto h = config_hash(base);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h, config_hash(seeded()));

    RunConfig c = base;
    c.out = "elsewhere";
    c.trajectory = "t";
    c.workers = 4;
    c.record_timing = true;
    EXPECT_EQ(config_hash(c), h);

    c = base;
    c.xi = 1.3;
    EXPECT_NE(config_hash(c), h);
    EXPECT_EQ(inversion_hash(c), inversion_hash(base));
    c = base;
    c.seed = 8;
    EXPECT_NE(config_hash(c), h);
    EXPECT_NE(inversion_hash(c), inversion_hash(base));
    c = base;
    c.src_prompt = "x";
    EXPECT_NE(inversion_hash(c), inversion_hash(base));
}

TEST(ConfigHash, Fnv1aReferenceValues) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(ConfigValidate, NamesOffendingFields) {
    EXPECT_EQ(error_of([] { validate(RunConfig{}); }), "config field seed is mandatory");
    RunConfig c = seeded();
    c.tau1 = 10;
    c.tau2 = 20;
    EXPECT_EQ(error_of([&] { validate(c); }), "config fields tau2 (20) and tau1 (10): tau2 must not exceed tau1");
    c = seeded();
    c.steps = 0;
    EXPECT_NE(error_of([&] { validate(c); }).find("steps"), std::string::npos);
    c = seeded();
    c.steps = 20;
    EXPECT_NE(error_of([&] { validate(c); }).find("tau1 (35) and steps (20)"), std::string::npos);
    c = seeded();
    c.latent_shape = {2, 2, 2};
    EXPECT_NE(error_of([&] { validate(c); }).find("latent_shape"), std::string::npos);
    c = seeded();
    c.fmr_targets = {2.0};
    EXPECT_NE(error_of([&] { validate(c); }).find("fmr_targets"), std::string::npos);
    c = seeded();
    c.workers = 0;
    EXPECT_THROW(validate(c), ValidationError);
    EXPECT_NO_THROW(validate(seeded()));
}

TEST(ConfigDerived, ForwardsParameters) {
    RunConfig c = seeded();
    c.steps = 40;
    c.tau1 = 30;
    c.tau2 = 10;
    c.cfg_scale = 5.0;
    c.xi = 0.4;
    const auto a = angular_config(c);
    EXPECT_EQ(a.steps, 40u);
    EXPECT_EQ(a.xi, 0.4);
    EXPECT_EQ(a.guidance.scale, 5.0);
    const auto b = aac_config(c);
    EXPECT_EQ(b.tau1, 30u);
    EXPECT_EQ(b.tau2, 10u);
    EXPECT_EQ(b.steps, 40u);
}

TEST(TrajectoryIo, RoundTripsAtFloat32Precision) {
    const auto dir = scratch_dir("traj_io");
    LatentTrajectory traj;
    traj.schedule = default_schedule(2).spec();
    traj.prompt_label = "Photo of a 20 years old person";
    traj.states = {Latent({0.1, 0.2, 0.3, 0.4}, {2, 2}), Latent({1.0, -1.0, 0.5, 0.25}, {2, 2}),
                   Latent({1e-3, 3.0, -7.5, 2.0}, {2, 2})};
    write_trajectory(dir / "t", traj, "0123456789abcdef");
    const auto stored = read_trajectory(dir / "t");
    EXPECT_EQ(stored.config_hash, "0123456789abcdef");
    EXPECT_EQ(stored.trajectory.prompt_label, traj.prompt_label);
    EXPECT_EQ(stored.trajectory.schedule, traj.schedule);
    ASSERT_EQ(stored.trajectory.states.size(), 3u);
    for (std::size_t s = 0; s < 3; ++s) {
        EXPECT_EQ(stored.trajectory.at(s).shape(), (Shape{2, 2}));
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_EQ(stored.trajectory.at(s)[i], static_cast<double>(static_cast<float>(traj.at(s)[i])));
        }
    }
    EXPECT_EQ(std::filesystem::file_size(payload_path(dir / "t")), 3u * 4u * 4u);
}

TEST(TrajectoryIo, PayloadIsLittleEndianFloat32) {
    const auto dir = scratch_dir("latent_io");
    write_latent(dir / "z", Latent({1.0, -2.5}));
    std::ifstream in(payload_path(dir / "z"), std::ios::binary);
    unsigned char bytes[8] = {};
    in.read(reinterpret_cast<char*>(bytes), 8);
    // 1.0f = 0x3f800000, -2.5f = 0xc0200000
    const unsigned char expected[8] = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x20, 0xc0};
    EXPECT_EQ(std::memcmp(bytes, expected, 8), 0);
    EXPECT_EQ(read_latent(dir / "z"), Latent({1.0, -2.5}));
}

TEST(TrajectoryIo, ReportsMissingAndCorruptFiles) {
    const auto dir = scratch_dir("io_errors");
    const auto missing = error_of([&] { read_trajectory(dir / "nope"); });
    EXPECT_NE(missing.find((dir / "nope.json").string()), std::string::npos);
    EXPECT_THROW(read_trajectory(dir / "nope"), IoError);

    write_latent(dir / "z", Latent({1.0, 2.0}));
    EXPECT_THROW(read_trajectory(dir / "z"), ValidationError);  // wrong format tag
    write_text_file(payload_path(dir / "z"), "abc");
    EXPECT_THROW(read_latent(dir / "z"), ValidationError);
    write_text_file(payload_path(dir / "z"), std::string(12, '\0'));
    EXPECT_THROW(read_latent(dir / "z"), ValidationError);
    write_text_file(sidecar_path(dir / "z"), "{not json");
    EXPECT_THROW(read_latent(dir / "z"), ValidationError);
}
