// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reage/latent.hpp"

namespace reage {

/// How a schedule was built; persisted next to trajectories so that replays can
/// refuse a mismatched schedule.
struct ScheduleSpec {
    std::string kind;              // "linear" or "ddpm_subsampled"
    std::size_t num_steps = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::size_t train_steps = 0;   // 0 for "linear"

    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Cumulative alpha products for steps 0..T with alpha_0 = 1.
///
/// Immutable after construction. The constructor enforces strict monotone
/// decrease and 0 < alpha_T.
class NoiseSchedule {
public:
    NoiseSchedule(std::vector<double> alphas_cumprod, ScheduleSpec spec);

    std::size_t num_steps() const noexcept { return m_alphas.size() - 1; }
    double alpha(std::size_t t) const;
    const std::vector<double>& alphas_cumprod() const noexcept { return m_alphas; }
    const ScheduleSpec& spec() const noexcept { return m_spec; }

private:
    std::vector<double> m_alphas;
    ScheduleSpec m_spec;
};

/// Linear-beta schedule: beta_s interpolates beta_start..beta_end over s = 1..T and
/// alpha_t = prod_{s<=t} (1 - beta_s).
NoiseSchedule make_schedule(std::size_t num_steps, double beta_start, double beta_end);

/// The standard 1000-step linear DDPM schedule (beta 1e-4..0.02) sampled at T evenly
/// spaced timesteps, with alpha_0 = 1 as the clean endpoint.
NoiseSchedule default_schedule(std::size_t num_steps);

NoiseSchedule schedule_from_spec(const ScheduleSpec& spec);

struct GuidanceConfig {
    double scale = 7.5;
};

void validate(const GuidanceConfig& guidance);

/// sqrt(alpha_t) * z0 + sqrt(1 - alpha_t) * eps
Latent add_noise(const Latent& z0, std::size_t t, const Latent& eps, const NoiseSchedule& sched);

/// Deterministic DDIM update z_t -> z_{t-1} for a fixed noise estimate.
Latent ddim_forward_step(const Latent& z_t, std::size_t t, const Latent& eps, const NoiseSchedule& sched);

/// DDIM inversion update z_{t-1} -> z_t, written in terms of t_minus_1.
Latent ddim_inversion_step(const Latent& z_prev, std::size_t t_minus_1, const Latent& eps,
                           const NoiseSchedule& sched);

/// w * eps_cond + (1 - w) * eps_uncond
Latent cfg_combine(const Latent& eps_cond, const Latent& eps_uncond, const GuidanceConfig& guidance);

}  // namespace reage
