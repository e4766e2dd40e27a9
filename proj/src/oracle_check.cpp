// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/oracle_check.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "reage/errors.hpp"

namespace reage {

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

}  // namespace

MonteCarloEstimate monte_carlo_eps(const std::vector<double>& z_t, double alpha_t, const GaussianMixtureModel& gmm,
                                   const PromptEmbedding& c, std::size_t num_samples, std::mt19937_64& rng) {
    if (!(alpha_t > 0.0 && alpha_t < 1.0)) {
        throw ValidationError("monte_carlo_eps needs 0 < alpha_t < 1");
    }
    const std::size_t d = gmm.dim();
    if (z_t.size() != d) {
        throw ShapeMismatchError("monte_carlo_eps: latent does not match mixture dimension");
    }
    const auto subset = gmm.conditioned(c);
    for (const auto& [k, wk] : subset) {
        for (double v : gmm.components()[k].cov_diag) {
            if (!(v > 0.0)) {
                throw ValidationError("monte_carlo_eps needs positive component variances");
            }
        }
    }
    const double sa = std::sqrt(alpha_t);
    const double noise_var = 1.0 - alpha_t;

    // proposal: even mix of the prior and N(z_t / sqrt(a), (1 - a) / a), the
    // likelihood of z_t read as a density in z0; weights stay bounded at every t
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& [k, w] : subset) {
        acc += w;
        cumulative.push_back(acc);
    }
    std::uniform_real_distribution<double> unif(0.0, acc);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);

    const double lik_var = noise_var / alpha_t;
    const double log_2pi = std::log(2.0 * M_PI);
    std::vector<double> log_norm(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        log_norm[j] = std::log(subset[j].second / acc);
        for (double v : gmm.components()[subset[j].first].cov_diag) {
            log_norm[j] -= 0.5 * (log_2pi + std::log(v));
        }
    }
    std::vector<double> terms(subset.size());
    auto log_prior = [&](const double* x) {
        double best = -INFINITY;
        for (std::size_t j = 0; j < subset.size(); ++j) {
            const auto& comp = gmm.components()[subset[j].first];
            double lp = log_norm[j];
            for (std::size_t i = 0; i < d; ++i) {
                const double r = x[i] - comp.mean[i];
                lp -= 0.5 * r * r / comp.cov_diag[i];
            }
            terms[j] = lp;
            best = std::max(best, lp);
        }
        if (best == -INFINITY) {
            return best;
        }
        double sum = 0.0;
        for (double lp : terms) {
            sum += std::exp(lp - best);
        }
        return best + std::log(sum);
    };
    auto log_lik = [&](const double* x) {
        double lp = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double r = x[i] - z_t[i] / sa;
            lp += -0.5 * (log_2pi + std::log(lik_var) + r * r / lik_var);
        }
        return lp;
    };

    std::vector<double> draws(num_samples * d);
    std::vector<double> log_w(num_samples);
    for (std::size_t n = 0; n < num_samples; ++n) {
        double* x = &draws[n * d];
        if (coin(rng)) {
            const double u = unif(rng);
            const std::size_t j = std::min<std::size_t>(
                std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(), subset.size() - 1);
            const auto& comp = gmm.components()[subset[j].first];
            for (std::size_t i = 0; i < d; ++i) {
                x[i] = comp.mean[i] + std::sqrt(comp.cov_diag[i]) * normal(rng);
            }
        } else {
            for (std::size_t i = 0; i < d; ++i) {
                x[i] = z_t[i] / sa + std::sqrt(lik_var) * normal(rng);
            }
        }
        const double lp = log_prior(x);
        const double ll = log_lik(x);
        const double hi = std::max(lp, ll);
        const double log_q = hi + std::log(0.5 * std::exp(lp - hi) + 0.5 * std::exp(ll - hi));
        log_w[n] = lp + ll - log_q;
    }

    const double peak = *std::max_element(log_w.begin(), log_w.end());
    double sum_w = 0.0;
    double sum_w2 = 0.0;
    std::vector<double> w(num_samples);
    for (std::size_t n = 0; n < num_samples; ++n) {
        w[n] = std::exp(log_w[n] - peak);
        sum_w += w[n];
        sum_w2 += w[n] * w[n];
    }

    std::vector<double> mean(d, 0.0);
    for (std::size_t n = 0; n < num_samples; ++n) {
        for (std::size_t i = 0; i < d; ++i) {
            mean[i] += w[n] * draws[n * d + i];
        }
    }
    for (double& m : mean) {
        m /= sum_w;
    }
    // delta-method variance of the self-normalised estimator
    std::vector<double> var(d, 0.0);
    for (std::size_t n = 0; n < num_samples; ++n) {
        for (std::size_t i = 0; i < d; ++i) {
            const double dev = draws[n * d + i] - mean[i];
            var[i] += w[n] * w[n] * dev * dev;
        }
    }

    MonteCarloEstimate est;
    est.eps.resize(d);
    est.std_error.resize(d);
    const double scale = sa / std::sqrt(noise_var);
    for (std::size_t i = 0; i < d; ++i) {
        est.eps[i] = (z_t[i] - sa * mean[i]) / std::sqrt(noise_var);
        est.std_error[i] = scale * std::sqrt(var[i]) / sum_w;
    }
    est.effective_samples = sum_w * sum_w / sum_w2;
    return est;
}

OracleCheckReport verify_oracle(const OracleCheckConfig& config) {
    if (config.mixtures == 0 || config.points == 0 || config.samples < 2 || config.dim == 0) {
        throw ValidationError("verify-oracle needs positive mixtures, points, samples and dim");
    }
    const auto start = std::chrono::steady_clock::now();
    const NoiseSchedule sched = default_schedule(config.steps);

    std::vector<GaussianMixtureModel> mixtures;
    for (std::size_t m = 0; m < config.mixtures; ++m) {
        auto rng = stream_rng(config.seed, m, 0xA11CE);
        mixtures.push_back(random_mixture(rng, config.dim));
    }
    const PromptEmbedding null_prompt = PromptEmbedding::null(1, 1);

    OracleCheckReport report;
    report.comparisons.resize(config.mixtures * config.points);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t job = next++; job < report.comparisons.size(); job = next++) {
            const std::size_t m = job / config.points;
            const std::size_t p = job % config.points;
            auto rng = stream_rng(config.seed, m, p + 1);
            std::uniform_int_distribution<std::size_t> pick_t(1, config.steps);
            const std::size_t t = pick_t(rng);
            const double a = sched.alpha(t);

            const Shape shape{config.dim};
            const Latent z0 = mixtures[m].sample(null_prompt, rng, shape);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> noise(config.dim);
            for (double& v : noise) {
                v = normal(rng);
            }
            const Latent z_t = add_noise(z0, t, Latent(noise, shape), sched);

            const Latent exact = analytic_eps(z_t, t, null_prompt, mixtures[m], sched);
            const MonteCarloEstimate mc =
                monte_carlo_eps(z_t.values(), a, mixtures[m], null_prompt, config.samples, rng);

            OracleComparison& cmp = report.comparisons[job];
            cmp.mixture = m;
            cmp.point = p;
            cmp.t = t;
            cmp.analytic = exact.values();
            cmp.monte_carlo = mc.eps;
            cmp.std_error = mc.std_error;
            for (std::size_t i = 0; i < config.dim; ++i) {
                const double diff = std::abs(exact[i] - mc.eps[i]);
                const double z = mc.std_error[i] > 0.0 ? diff / mc.std_error[i] : (diff == 0.0 ? 0.0 : INFINITY);
                cmp.max_abs_z = std::max(cmp.max_abs_z, z);
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, config.workers);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) {
        pool.emplace_back(work);
    }
    work();
    for (auto& th : pool) {
        th.join();
    }

    report.mixtures.resize(config.mixtures);
    report.pass = true;
    for (const auto& cmp : report.comparisons) {
        auto& summary = report.mixtures[cmp.mixture];
        for (std::size_t i = 0; i < config.dim; ++i) {
            const double diff = std::abs(cmp.analytic[i] - cmp.monte_carlo[i]);
            const double z = cmp.std_error[i] > 0.0 ? diff / cmp.std_error[i] : (diff == 0.0 ? 0.0 : INFINITY);
            ++summary.comparisons;
            if (z > config.z_limit) {
                ++summary.outside;
            }
            summary.max_abs_z = std::max(summary.max_abs_z, z);
        }
    }
    for (auto& summary : report.mixtures) {
        const double frac = static_cast<double>(summary.outside) / static_cast<double>(summary.comparisons);
        summary.pass = frac <= config.max_outside_fraction && summary.max_abs_z <= config.hard_z_limit;
        report.pass = report.pass && summary.pass;
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace reage
