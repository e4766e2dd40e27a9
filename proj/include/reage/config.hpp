// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reage/aac.hpp"
#include "reage/angular.hpp"
#include "reage/latent.hpp"

namespace reage {

enum class EditMode { angular, aac };

const char* to_string(EditMode mode);

/// Everything a run needs. Documented keys of the flat config file (one `key = value`
/// per line, `#` starts a comment):
///
///   steps, xi, eta_th, tau1, tau2, cfg_scale, seed, denoiser, mode, src_prompt,
///   tgt_prompt, self_layers, latent_shape, input, trajectory, out, eval_fixture,
///   metrics, fmr_targets, record_timing, workers
///
/// denoiser is "oracle:<mixture.json>" or "toy:<seed>"; self_layers is "4-14";
/// latent_shape is "16x2"; metrics and fmr_targets are comma separated.
struct RunConfig {
    std::size_t steps = 50;
    double xi = 1.2;
    double eta_th = 0.05;
    std::size_t tau1 = 35;
    std::size_t tau2 = 15;
    double cfg_scale = 7.5;
    std::optional<std::uint64_t> seed;
    std::string denoiser;
    EditMode mode = EditMode::angular;
    std::string src_prompt;
    std::string tgt_prompt;
    LayerRange self_layers{4, 14};
    Shape latent_shape{16, 2};
    std::string input;
    std::string trajectory;
    std::string out;
    std::string eval_fixture;
    std::vector<std::string> metrics;
    std::vector<double> fmr_targets{1e-4, 1e-3};
    bool record_timing = false;
    std::size_t workers = 1;
};

using ConfigValues = std::map<std::string, std::string>;

/// Parses the flat key/value format. Unknown keys and malformed lines are ValidationErrors
/// that name the line.
ConfigValues parse_config_text(const std::string& text);

/// Builds a RunConfig from raw values; each conversion failure names its key.
RunConfig config_from_values(const ConfigValues& values);

/// Canonical key/value rendering (sorted keys), the input to the config hashes.
ConfigValues config_to_values(const RunConfig& config);

const std::vector<std::string>& config_keys();

/// Checks every module-level invariant the config aggregates; seed is mandatory.
void validate(const RunConfig& config);

AngularConfig angular_config(const RunConfig& config);
AacConfig aac_config(const RunConfig& config);

/// FNV-1a 64 over the canonical rendering of every key except paths and execution
/// knobs (trajectory, out, record_timing, workers), as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Hash of the fields that determine an inverted trajectory: steps, seed, denoiser,
/// src_prompt, latent_shape and input. A trajectory is replayable by any config with the
/// same inversion hash.
std::string inversion_hash(const RunConfig& config);

std::string fnv1a_hex(const std::string& text);

}  // namespace reage
