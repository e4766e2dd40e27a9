// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reage/angular.hpp"

namespace reage {

// On-disk layout, shared by trajectories and single latents:
//   <prefix>.bin   little-endian IEEE-754 float32, states back to back, row-major
//   <prefix>.json  sidecar {"format", "dtype": "float32", "byte_order": "little",
//                  "shape": [...], "states": n, ...}
// Trajectory sidecars add "steps" (T, so states = T + 1), "prompt_label",
// "schedule" {kind, num_steps, beta_start, beta_end, train_steps} and "config_hash".

std::filesystem::path payload_path(const std::filesystem::path& prefix);
std::filesystem::path sidecar_path(const std::filesystem::path& prefix);

void write_f32_payload(const std::filesystem::path& path, const std::vector<Latent>& states);
std::vector<double> read_f32_payload(const std::filesystem::path& path);

void write_trajectory(const std::filesystem::path& prefix, const LatentTrajectory& traj,
                      const std::string& config_hash);

struct StoredTrajectory {
    LatentTrajectory trajectory;
    std::string config_hash;
};

StoredTrajectory read_trajectory(const std::filesystem::path& prefix);

void write_latent(const std::filesystem::path& prefix, const Latent& z);
Latent read_latent(const std::filesystem::path& prefix);

/// Reads a whole text file; IoError with the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace reage
