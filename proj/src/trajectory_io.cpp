// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/trajectory_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reage/errors.hpp"

namespace reage {

namespace {

using nlohmann::json;

constexpr const char* kTrajectoryFormat = "reage-trajectory";
constexpr const char* kLatentFormat = "reage-latent";

json schedule_to_json(const ScheduleSpec& spec) {
    return {{"kind", spec.kind},
            {"num_steps", spec.num_steps},
            {"beta_start", spec.beta_start},
            {"beta_end", spec.beta_end},
            {"train_steps", spec.train_steps}};
}

ScheduleSpec schedule_from_json(const json& j) {
    return ScheduleSpec{j.at("kind").get<std::string>(), j.at("num_steps").get<std::size_t>(),
                        j.at("beta_start").get<double>(), j.at("beta_end").get<double>(),
                        j.at("train_steps").get<std::size_t>()};
}

json read_sidecar(const std::filesystem::path& prefix, const char* expected_format) {
    const auto path = sidecar_path(prefix);
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("malformed sidecar " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != expected_format) {
        throw ValidationError("sidecar " + path.string() + " is not a " + expected_format + " file");
    }
    if (doc.value("dtype", "") != "float32" || doc.value("byte_order", "") != "little") {
        throw ValidationError("sidecar " + path.string() + " must describe little-endian float32 data");
    }
    return doc;
}

std::vector<Latent> split_states(const std::vector<double>& flat, const Shape& shape, std::size_t count,
                                 const std::filesystem::path& prefix) {
    const std::size_t n = shape_size(shape);
    if (flat.size() != n * count) {
        throw ValidationError("payload " + payload_path(prefix).string() + " holds " + std::to_string(flat.size()) +
                              " floats, sidecar expects " + std::to_string(n * count));
    }
    std::vector<Latent> states;
    states.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        states.emplace_back(std::vector<double>(flat.begin() + s * n, flat.begin() + (s + 1) * n), shape);
    }
    return states;
}

}  // namespace

std::filesystem::path payload_path(const std::filesystem::path& prefix) {
    return std::filesystem::path(prefix.string() + ".bin");
}

std::filesystem::path sidecar_path(const std::filesystem::path& prefix) {
    return std::filesystem::path(prefix.string() + ".json");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("file not found or unreadable: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_f32_payload(const std::filesystem::path& path, const std::vector<Latent>& states) {
    std::string bytes;
    for (const auto& z : states) {
        for (double v : z.values()) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int shift = 0; shift < 32; shift += 8) {
                bytes.push_back(static_cast<char>((bits >> shift) & 0xFFu));
            }
        }
    }
    write_text_file(path, bytes);
}

std::vector<double> read_f32_payload(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() % 4 != 0) {
        throw ValidationError("payload " + path.string() + " is not a whole number of float32 values");
    }
    std::vector<double> values(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) {
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        }
        values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return values;
}

void write_trajectory(const std::filesystem::path& prefix, const LatentTrajectory& traj,
                      const std::string& config_hash) {
    if (traj.states.empty()) {
        throw ValidationError("cannot write an empty trajectory");
    }
    const json sidecar = {{"format", kTrajectoryFormat},
                          {"dtype", "float32"},
                          {"byte_order", "little"},
                          {"shape", traj.states.front().shape()},
                          {"steps", traj.steps()},
                          {"states", traj.states.size()},
                          {"prompt_label", traj.prompt_label},
                          {"schedule", schedule_to_json(traj.schedule)},
                          {"config_hash", config_hash}};
    write_f32_payload(payload_path(prefix), traj.states);
    write_text_file(sidecar_path(prefix), sidecar.dump(2) + "\n");
}

StoredTrajectory read_trajectory(const std::filesystem::path& prefix) {
    const json doc = read_sidecar(prefix, kTrajectoryFormat);
    try {
        StoredTrajectory out;
        const Shape shape = doc.at("shape").get<Shape>();
        const std::size_t steps = doc.at("steps").get<std::size_t>();
        out.trajectory.states = split_states(read_f32_payload(payload_path(prefix)), shape, steps + 1, prefix);
        out.trajectory.schedule = schedule_from_json(doc.at("schedule"));
        out.trajectory.prompt_label = doc.at("prompt_label").get<std::string>();
        out.config_hash = doc.at("config_hash").get<std::string>();
        return out;
    } catch (const json::exception& e) {
        throw ValidationError("sidecar " + sidecar_path(prefix).string() + ": " + e.what());
    }
}

void write_latent(const std::filesystem::path& prefix, const Latent& z) {
    const json sidecar = {{"format", kLatentFormat},
                          {"dtype", "float32"},
                          {"byte_order", "little"},
                          {"shape", z.shape()},
                          {"states", 1}};
    write_f32_payload(payload_path(prefix), {z});
    write_text_file(sidecar_path(prefix), sidecar.dump(2) + "\n");
}

Latent read_latent(const std::filesystem::path& prefix) {
    const json doc = read_sidecar(prefix, kLatentFormat);
    try {
        const Shape shape = doc.at("shape").get<Shape>();
        return split_states(read_f32_payload(payload_path(prefix)), shape, 1, prefix).front();
    } catch (const json::exception& e) {
        throw ValidationError("sidecar " + sidecar_path(prefix).string() + ": " + e.what());
    }
}

}  // namespace reage
