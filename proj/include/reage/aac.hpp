// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "reage/angular.hpp"
#include "reage/attention.hpp"

namespace reage {

enum class Regime { cross_replace, adaptive, self_replace };

const char* to_string(Regime regime);

struct AacConfig {
    std::size_t tau1 = 35;
    std::size_t tau2 = 15;
    double eta_th = 0.05;
    LayerRange self_layers{4, 14};
    std::size_t steps = 50;
    GuidanceConfig guidance;
};

void validate(const AacConfig& config);

/// t > tau1: cross_replace; tau2 <= t <= tau1: adaptive; t < tau2: self_replace.
Regime regime_for_step(std::size_t t, const AacConfig& config);

inline constexpr double kKlSmoothing = 1e-8;

/// Row Shannon entropy divided by log(K), averaged over every row of every head and
/// layer in `maps`. Rows of length 1 have entropy 0.
double row_entropy_normalized(const AttentionMaps& maps);
double row_entropy_normalized(const AttentionMap& map);

/// Row-wise KL(src || tgt) after adding kKlSmoothing to every entry and renormalising,
/// averaged over rows, heads and layers. Maps are paired by (layer, kind).
double kl_divergence(const AttentionMaps& src, const AttentionMaps& tgt);

/// w * src + (1 - w) * tgt, map by map.
AttentionMaps blend_maps(const AttentionMaps& src, const AttentionMaps& tgt, double w);

struct AacStepRecord {
    std::size_t t = 0;
    Regime regime = Regime::cross_replace;
    std::optional<double> eta;
    std::optional<double> w;
    AttentionKind injected_kind = AttentionKind::cross;
    std::vector<int> layers_injected;
    const AttentionMaps* injected = nullptr;  // valid only during the callback
};

using AacObserver = std::function<void(const AacStepRecord&)>;

/// Adaptive attention control over a source trajectory. The source branch replays
/// z*_T with plain guided DDIM steps while capturing its attention; the target branch
/// receives maps chosen by regime_for_step. Capture and injection act on the
/// conditional pass of classifier-free guidance only.
Latent aac_edit(const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
                const Denoiser& denoiser, const NoiseSchedule& sched, const AacConfig& config,
                const AacObserver& observer = {});

}  // namespace reage
