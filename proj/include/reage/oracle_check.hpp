// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "reage/gaussian_mixture.hpp"

namespace reage {

/// Self-normalised importance-sampling estimate of the optimal noise prediction.
///
/// Draws z0 from an even mix of the conditioned prior and the likelihood of z_t (read
/// as a Gaussian in z0), weighting by prior * likelihood / proposal. Shares no code
/// with analytic_eps beyond the mixture parameters. Component variances must be positive.
struct MonteCarloEstimate {
    std::vector<double> eps;
    std::vector<double> std_error;
    double effective_samples = 0.0;
};

MonteCarloEstimate monte_carlo_eps(const std::vector<double>& z_t, double alpha_t, const GaussianMixtureModel& gmm,
                                   const PromptEmbedding& c, std::size_t num_samples, std::mt19937_64& rng);

struct OracleCheckConfig {
    std::size_t mixtures = 3;
    std::size_t points = 100;
    std::size_t samples = 100000;
    std::size_t dim = 2;
    std::size_t steps = 50;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    double z_limit = 3.0;
    // share of comparisons allowed beyond z_limit; |z| <= 3 holds for 99.73% of draws
    double max_outside_fraction = 0.01;
    // no single comparison may exceed this (Bonferroni bound over the whole run)
    double hard_z_limit = 5.0;
};

struct OracleComparison {
    std::size_t mixture = 0;
    std::size_t point = 0;
    std::size_t t = 0;
    std::vector<double> analytic;
    std::vector<double> monte_carlo;
    std::vector<double> std_error;
    double max_abs_z = 0.0;
};

struct OracleMixtureSummary {
    std::size_t comparisons = 0;
    std::size_t outside = 0;
    double max_abs_z = 0.0;
    bool pass = false;
};

struct OracleCheckReport {
    std::vector<OracleComparison> comparisons;
    std::vector<OracleMixtureSummary> mixtures;
    bool pass = false;
    double seconds = 0.0;
};

OracleCheckReport verify_oracle(const OracleCheckConfig& config);

}  // namespace reage
