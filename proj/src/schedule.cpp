// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/schedule.hpp"

#include <cmath>
#include <sstream>

#include "reage/errors.hpp"

namespace reage {

namespace {

constexpr std::size_t kTrainSteps = 1000;
constexpr double kTrainBetaStart = 1e-4;
constexpr double kTrainBetaEnd = 0.02;

std::vector<double> linear_alphas(std::size_t num_steps, double beta_start, double beta_end) {
    std::vector<double> alphas(num_steps + 1);
    alphas[0] = 1.0;
    for (std::size_t s = 1; s <= num_steps; ++s) {
        const double frac = num_steps > 1 ? static_cast<double>(s - 1) / static_cast<double>(num_steps - 1) : 0.0;
        const double beta = beta_start + (beta_end - beta_start) * frac;
        alphas[s] = alphas[s - 1] * (1.0 - beta);
    }
    return alphas;
}

void check_step(std::size_t t, std::size_t lo, std::size_t hi, const char* what) {
    if (t < lo || t > hi) {
        std::ostringstream msg;
        msg << what << ": step " << t << " outside [" << lo << ", " << hi << "]";
        throw StepOutOfRangeError(msg.str());
    }
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> alphas_cumprod, ScheduleSpec spec)
    : m_alphas(std::move(alphas_cumprod)), m_spec(std::move(spec)) {
    if (m_alphas.size() < 2) {
        throw ValidationError("noise schedule needs at least one step");
    }
    if (m_alphas[0] != 1.0) {
        throw InvariantViolationError("noise schedule must start at alpha_0 = 1");
    }
    for (std::size_t t = 1; t < m_alphas.size(); ++t) {
        if (!(m_alphas[t] < m_alphas[t - 1])) {
            throw InvariantViolationError("noise schedule is not strictly decreasing at step " + std::to_string(t));
        }
    }
    if (!(m_alphas.back() > 0.0)) {
        throw InvariantViolationError("noise schedule reaches alpha_T <= 0");
    }
}

double NoiseSchedule::alpha(std::size_t t) const {
    check_step(t, 0, num_steps(), "alpha");
    return m_alphas[t];
}

NoiseSchedule make_schedule(std::size_t num_steps, double beta_start, double beta_end) {
    if (num_steps < 1) {
        throw ValidationError("num_steps must be >= 1");
    }
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
        std::ostringstream msg;
        msg << "beta range must satisfy 0 < beta_start <= beta_end < 1 (got beta_start=" << beta_start
            << ", beta_end=" << beta_end << ")";
        throw ValidationError(msg.str());
    }
    return NoiseSchedule(linear_alphas(num_steps, beta_start, beta_end),
                         ScheduleSpec{"linear", num_steps, beta_start, beta_end, 0});
}

NoiseSchedule default_schedule(std::size_t num_steps) {
    if (num_steps < 1 || num_steps > kTrainSteps) {
        throw ValidationError("steps must lie in [1, " + std::to_string(kTrainSteps) + "]");
    }
    const std::vector<double> train = linear_alphas(kTrainSteps, kTrainBetaStart, kTrainBetaEnd);
    std::vector<double> alphas(num_steps + 1);
    alphas[0] = 1.0;
    for (std::size_t t = 1; t <= num_steps; ++t) {
        // evenly spaced, always ending at the last training step
        alphas[t] = train[(t * kTrainSteps) / num_steps];
    }
    return NoiseSchedule(std::move(alphas),
                         ScheduleSpec{"ddpm_subsampled", num_steps, kTrainBetaStart, kTrainBetaEnd, kTrainSteps});
}

NoiseSchedule schedule_from_spec(const ScheduleSpec& spec) {
    if (spec.kind == "linear") {
        return make_schedule(spec.num_steps, spec.beta_start, spec.beta_end);
    }
    if (spec.kind == "ddpm_subsampled") {
        if (spec.train_steps != kTrainSteps || spec.beta_start != kTrainBetaStart || spec.beta_end != kTrainBetaEnd) {
            throw ValidationError("unsupported ddpm_subsampled parameters");
        }
        return default_schedule(spec.num_steps);
    }
    throw ValidationError("unknown schedule kind '" + spec.kind + "'");
}

void validate(const GuidanceConfig& guidance) {
    if (!std::isfinite(guidance.scale) || guidance.scale < 0.0) {
        throw ValidationError("cfg_scale must be finite and >= 0");
    }
}

Latent add_noise(const Latent& z0, std::size_t t, const Latent& eps, const NoiseSchedule& sched) {
    check_same_shape(z0, eps, "add_noise");
    const double a = sched.alpha(t);
    return axpby(std::sqrt(a), z0, std::sqrt(1.0 - a), eps);
}

Latent ddim_forward_step(const Latent& z_t, std::size_t t, const Latent& eps, const NoiseSchedule& sched) {
    check_step(t, 1, sched.num_steps(), "ddim_forward_step");
    check_same_shape(z_t, eps, "ddim_forward_step");
    const double a_t = sched.alpha(t);
    const double a_prev = sched.alpha(t - 1);
    const double rescale = std::sqrt(a_prev / a_t);
    return axpby(rescale, z_t, std::sqrt(1.0 - a_prev) - rescale * std::sqrt(1.0 - a_t), eps);
}

Latent ddim_inversion_step(const Latent& z_prev, std::size_t t_minus_1, const Latent& eps,
                           const NoiseSchedule& sched) {
    check_step(t_minus_1, 0, sched.num_steps() - 1, "ddim_inversion_step");
    check_same_shape(z_prev, eps, "ddim_inversion_step");
    const double a_prev = sched.alpha(t_minus_1);
    const double a_t = sched.alpha(t_minus_1 + 1);
    const double noise_coeff = std::sqrt(a_t) * (std::sqrt(1.0 / a_t - 1.0) - std::sqrt(1.0 / a_prev - 1.0));
    return axpby(std::sqrt(a_t) / std::sqrt(a_prev), z_prev, noise_coeff, eps);
}

Latent cfg_combine(const Latent& eps_cond, const Latent& eps_uncond, const GuidanceConfig& guidance) {
    check_same_shape(eps_cond, eps_uncond, "cfg_combine");
    return axpby(guidance.scale, eps_cond, 1.0 - guidance.scale, eps_uncond);
}

}  // namespace reage
