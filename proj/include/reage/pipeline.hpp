// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "reage/config.hpp"
#include "reage/denoiser.hpp"
#include "reage/schedule.hpp"

namespace reage {

/// Environment variable naming the directory that relative fixture and mixture paths
/// are resolved against. Unset means the working directory.
inline constexpr const char* kFixtureRootEnv = "REAGE_FIXTURE_ROOT";

std::filesystem::path resolve_fixture_path(const std::string& path);

/// Builds the denoiser named by config.denoiser ("oracle:<mixture.json>" or "toy:<seed>").
std::unique_ptr<Denoiser> make_denoiser(const RunConfig& config, const NoiseSchedule& sched);

/// The source latent: read from config.input when set, otherwise drawn from
/// std::mt19937_64(seed) (mixture sample for the oracle, standard normal of
/// latent_shape for the toy denoiser).
Latent source_latent(const RunConfig& config, const Denoiser& denoiser);

struct InvertResult {
    std::filesystem::path trajectory_prefix;
    std::filesystem::path manifest_path;
    std::string config_hash;
};

/// Inverts the source latent under src_prompt and writes <trajectory>.bin/.json plus
/// <trajectory>.manifest.json.
InvertResult run_invert(const RunConfig& config);

struct EditResult {
    std::filesystem::path latent_prefix;
    std::filesystem::path trace_path;
    std::filesystem::path report_path;
    nlohmann::json report;
};

/// Edits the stored trajectory toward tgt_prompt and writes <out>.bin/.json (edited
/// latent), <out>.trace.jsonl (one record per step) and <out>.report.json. Refuses a
/// trajectory whose recorded inversion hash differs from the config's.
EditResult run_edit(const RunConfig& config);

const std::vector<std::string>& supported_metrics();

/// Evaluates the requested metrics over the eval fixture and returns the report; writes
/// it to <out> when out is set.
nlohmann::json run_eval(const RunConfig& config);

}  // namespace reage
