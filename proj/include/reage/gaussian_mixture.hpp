// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "reage/denoiser.hpp"
#include "reage/schedule.hpp"

namespace reage {

struct MixtureComponent {
    std::vector<double> mean;
    std::vector<double> cov_diag;
    double weight = 0.0;
};

/// Diagonal-covariance Gaussian mixture with named conditional subsets.
///
/// Global weights sum to one. A condition id selects a subset of components whose
/// weights are renormalised when the condition is applied; the null prompt selects
/// the full mixture.
class GaussianMixtureModel {
public:
    GaussianMixtureModel(std::vector<MixtureComponent> components,
                         std::map<std::string, std::vector<std::size_t>> condition_map = {});

    /// JSON keys: components[].mean, components[].cov_diag, components[].weight,
    /// condition_map {id: [component indices]}.
    static GaussianMixtureModel from_json_file(const std::filesystem::path& path);
    static GaussianMixtureModel from_json_string(const std::string& text);
    std::string to_json_string() const;

    std::size_t dim() const noexcept { return m_components.front().mean.size(); }
    const std::vector<MixtureComponent>& components() const noexcept { return m_components; }
    const std::map<std::string, std::vector<std::size_t>>& condition_map() const noexcept { return m_conditions; }

    /// Component indices and renormalised weights for a prompt; throws UnknownConditionError.
    std::vector<std::pair<std::size_t, double>> conditioned(const PromptEmbedding& c) const;

    /// Draws from the mixture restricted to the prompt's condition.
    Latent sample(const PromptEmbedding& c, std::mt19937_64& rng, const Shape& shape) const;

private:
    std::vector<MixtureComponent> m_components;
    std::map<std::string, std::vector<std::size_t>> m_conditions;
};

/// Bayes-optimal noise prediction (z_t - sqrt(a) E[z0 | z_t, c]) / sqrt(1 - a). Requires t >= 1.
Latent analytic_eps(const Latent& z_t, std::size_t t, const PromptEmbedding& c, const GaussianMixtureModel& gmm,
                    const NoiseSchedule& sched);

/// Denoiser backed by analytic_eps. At t = 0 it returns the zero vector, which is the
/// alpha -> 1 limit of the optimal prediction when every component has positive variance.
class GaussianMixtureDenoiser : public Denoiser {
public:
    GaussianMixtureDenoiser(GaussianMixtureModel gmm, NoiseSchedule sched);

    using Denoiser::predict;
    Latent predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c, AttentionContext* ctx) const override;
    std::string describe() const override { return "gaussian-mixture oracle"; }

    const GaussianMixtureModel& model() const noexcept { return m_gmm; }
    const NoiseSchedule& schedule() const noexcept { return m_sched; }

private:
    GaussianMixtureModel m_gmm;
    NoiseSchedule m_sched;
};

/// Random 2-component..max_components mixture used by oracle validation runs.
GaussianMixtureModel random_mixture(std::mt19937_64& rng, std::size_t dim, std::size_t max_components = 4);

}  // namespace reage
