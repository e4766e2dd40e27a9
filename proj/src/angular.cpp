// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/angular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "reage/errors.hpp"

namespace reage {

namespace {

constexpr double kDegenerateNorm = 1e-12;

// non-throwing finiteness check; Latent arithmetic produces values without revalidating
bool finite(const Latent& z) {
    return std::all_of(z.values().begin(), z.values().end(), [](double v) { return std::isfinite(v); });
}

void check_trajectory(const LatentTrajectory& traj, const NoiseSchedule& sched) {
    if (traj.states.size() < 2) {
        throw ValidationError("trajectory must contain at least z*_0 and z*_1");
    }
    if (traj.steps() != sched.num_steps() || traj.schedule != sched.spec()) {
        throw ValidationError("trajectory was produced under a different schedule (" +
                              std::to_string(traj.steps()) + " steps vs " + std::to_string(sched.num_steps()) + ")");
    }
}

}  // namespace

void require_finite(const Latent& z, std::size_t step, const char* stage) {
    if (!finite(z)) {
        throw NumericDivergenceError(std::string(stage) + " diverged at step " + std::to_string(step), step);
    }
}

void validate(const AngularConfig& config) {
    if (!std::isfinite(config.xi) || config.xi < 0.0) {
        throw ValidationError("xi must be finite and >= 0");
    }
    if (config.steps < 1) {
        throw ValidationError("steps must be >= 1");
    }
    validate(config.guidance);
}

LatentTrajectory invert_trajectory(const Latent& z0, const PromptEmbedding& c_src, const Denoiser& denoiser,
                                   const NoiseSchedule& sched) {
    require_finite(z0, 0, "inversion input");
    LatentTrajectory traj;
    traj.schedule = sched.spec();
    traj.prompt_label = c_src.label();
    traj.states.reserve(sched.num_steps() + 1);
    traj.states.push_back(z0);
    for (std::size_t t = 1; t <= sched.num_steps(); ++t) {
        const Latent& prev = traj.states.back();
        const Latent eps = denoiser.predict(prev, t - 1, c_src);
        require_finite(eps, t, "noise prediction during inversion");
        Latent next = ddim_inversion_step(prev, t - 1, eps, sched);
        require_finite(next, t, "inversion");
        traj.states.push_back(std::move(next));
    }
    return traj;
}

double cosine_similarity(const Latent& a, const Latent& b) {
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na < kDegenerateNorm || nb < kDegenerateNorm) {
        return 0.0;
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double angle_at_origin(const Latent& a, const Latent& b, const Latent& origin) {
    const Latent ra = a - origin;
    const Latent rb = b - origin;
    if (l2_norm(ra) < kDegenerateNorm || l2_norm(rb) < kDegenerateNorm) {
        return 0.0;
    }
    return std::acos(cosine_similarity(ra, rb));
}

Latent damp_offset(const Latent& offset, double theta, double xi) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi) || !(xi >= 0.0)) {
        throw ValidationError("damp_offset needs theta in [0, pi] and xi >= 0");
    }
    return std::exp(-xi * theta) * offset;
}

Latent angular_edit(const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
                    const Denoiser& denoiser, const NoiseSchedule& sched, const AngularConfig& config,
                    const AngularObserver& observer) {
    validate(config);
    check_trajectory(traj, sched);
    const std::size_t T = traj.steps();
    if (config.steps != T) {
        throw ValidationError("angular config expects " + std::to_string(config.steps) + " steps, trajectory has " +
                              std::to_string(T));
    }
    const Latent& z_T = traj.at(T);

    Latent z_src = z_T;
    Latent z_tgt = z_T;
    for (std::size_t t = T; t >= 1; --t) {
        const Latent& z_star = traj.at(t - 1);

        const Latent eps_src = guided_eps(denoiser, z_src, t, c_src, config.guidance.scale);
        const Latent eps_tgt = guided_eps(denoiser, z_tgt, t, c_tgt, config.guidance.scale);
        const Latent raw_src = ddim_forward_step(z_src, t, eps_src, sched);
        const Latent raw_tgt = ddim_forward_step(z_tgt, t, eps_tgt, sched);
        require_finite(raw_src, t, "source branch");
        require_finite(raw_tgt, t, "target branch");

        const Latent offset_src = z_star - raw_src;
        const Latent offset_tgt = z_star - raw_tgt;

        const double theta_src = angle_at_origin(z_star, raw_src, z_T);
        const double theta_tgt = angle_at_origin(z_star, raw_tgt, z_T);

        z_src = raw_src + offset_src;

        const Latent damped_src = damp_offset(offset_src, theta_src, config.xi);
        const Latent damped_tgt = damp_offset(offset_tgt, theta_tgt, config.xi);

        const double beta = std::clamp(cosine_similarity(z_star, raw_tgt), 0.0, 1.0);
        z_tgt = raw_tgt + axpby(beta, damped_tgt, 1.0 - beta, damped_src);
        require_finite(z_tgt, t, "target branch");

        if (observer) {
            AngularStepRecord rec;
            rec.t = t;
            rec.theta_src = theta_src;
            rec.theta_tgt = theta_tgt;
            rec.beta = beta;
            rec.src_deviation = l2_norm(z_src - z_star);
            rec.offset_src_norm = l2_norm(offset_src);
            rec.offset_tgt_norm = l2_norm(offset_tgt);
            observer(rec);
        }
    }
    return z_tgt;
}

Latent replay(const LatentTrajectory& traj, const PromptEmbedding& c, const Denoiser& denoiser,
              const NoiseSchedule& sched, double guidance_scale) {
    check_trajectory(traj, sched);
    Latent z = traj.at(traj.steps());
    for (std::size_t t = traj.steps(); t >= 1; --t) {
        const Latent eps = guided_eps(denoiser, z, t, c, guidance_scale);
        z = ddim_forward_step(z, t, eps, sched);
        require_finite(z, t, "replay");
    }
    return z;
}

}  // namespace reage
