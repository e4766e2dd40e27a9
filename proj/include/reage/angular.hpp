// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "reage/denoiser.hpp"
#include "reage/schedule.hpp"

namespace reage {

/// States z*_0 .. z*_T of a DDIM inversion, plus what is needed to replay it.
struct LatentTrajectory {
    std::vector<Latent> states;
    ScheduleSpec schedule;
    std::string prompt_label;

    std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
    const Latent& at(std::size_t t) const { return states.at(t); }
};

struct AngularConfig {
    double xi = 1.2;
    GuidanceConfig guidance;
    std::size_t steps = 50;
};

void validate(const AngularConfig& config);

/// Runs z*_t = DI(z*_{t-1}, t-1, eps(z*_{t-1}, t-1, c_src)) for t = 1..T with the plain
/// conditional prediction.
LatentTrajectory invert_trajectory(const Latent& z0, const PromptEmbedding& c_src, const Denoiser& denoiser,
                                   const NoiseSchedule& sched);

/// Angle at `origin` between the rays to a and b, in [0, pi]. Degenerate rays give 0.
double angle_at_origin(const Latent& a, const Latent& b, const Latent& origin);

/// o * exp(-xi * theta)
Latent damp_offset(const Latent& offset, double theta, double xi);

/// Cosine of the angle between a and b; 0 when either norm is below 1e-12.
double cosine_similarity(const Latent& a, const Latent& b);

struct AngularStepRecord {
    std::size_t t = 0;
    double theta_src = 0.0;
    double theta_tgt = 0.0;
    double beta = 0.0;
    double src_deviation = 0.0;  // ||z^src_{t-1} - z*_{t-1}||
    double offset_src_norm = 0.0;
    double offset_tgt_norm = 0.0;
};

using AngularObserver = std::function<void(const AngularStepRecord&)>;

/// Dual-branch editing from z*_T. Each step t = T..1:
///   raw predictions x_src = DF(z^src_t, t, c_src), x_tgt = DF(z^tgt_t, t, c_tgt) with CFG,
///   offsets o = z*_{t-1} - x, angles at z*_T between z*_{t-1} and the raw predictions,
///   z^src_{t-1} = x_src + o_src, both offsets damped by exp(-xi * theta),
///   beta = clamp(cos(z*_{t-1}, x_tgt), 0, 1),
///   z^tgt_{t-1} = x_tgt + beta * o_tgt + (1 - beta) * o_src.
/// Returns z^tgt_0.
Latent angular_edit(const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
                    const Denoiser& denoiser, const NoiseSchedule& sched, const AngularConfig& config,
                    const AngularObserver& observer = {});

/// Plain guided DDIM sampling from z*_T under one prompt; the uncontrolled source replay.
Latent replay(const LatentTrajectory& traj, const PromptEmbedding& c, const Denoiser& denoiser,
              const NoiseSchedule& sched, double guidance_scale);

/// Throws NumericDivergenceError naming the step when z has a non-finite entry.
void require_finite(const Latent& z, std::size_t step, const char* stage);

}  // namespace reage
