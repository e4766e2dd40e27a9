// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reage/errors.hpp"

namespace reage {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

}  // namespace

GaussianMixtureModel::GaussianMixtureModel(std::vector<MixtureComponent> components,
                                           std::map<std::string, std::vector<std::size_t>> condition_map)
    : m_components(std::move(components)), m_conditions(std::move(condition_map)) {
    if (m_components.empty()) {
        throw ValidationError("mixture needs at least one component");
    }
    const std::size_t d = m_components.front().mean.size();
    if (d == 0) {
        throw ValidationError("mixture dimension must be positive");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < m_components.size(); ++k) {
        const auto& comp = m_components[k];
        if (comp.mean.size() != d || comp.cov_diag.size() != d) {
            throw ShapeMismatchError("mixture component " + std::to_string(k) + " has inconsistent dimension");
        }
        if (!(comp.weight > 0.0) || !std::isfinite(comp.weight)) {
            throw ValidationError("mixture component " + std::to_string(k) + " weight must be positive");
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (!std::isfinite(comp.mean[i]) || !std::isfinite(comp.cov_diag[i]) || comp.cov_diag[i] < 0.0) {
                throw ValidationError("mixture component " + std::to_string(k) +
                                      " needs finite mean and non-negative variance");
            }
        }
        total += comp.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
        throw ValidationError("mixture weights sum to " + std::to_string(total) + ", expected 1");
    }
    for (const auto& [id, subset] : m_conditions) {
        if (subset.empty()) {
            throw ValidationError("condition '" + id + "' selects no components");
        }
        for (std::size_t k : subset) {
            if (k >= m_components.size()) {
                throw ValidationError("condition '" + id + "' references missing component " + std::to_string(k));
            }
        }
    }
}

GaussianMixtureModel GaussianMixtureModel::from_json_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("mixture JSON: ") + e.what());
    }
    try {
        std::vector<MixtureComponent> comps;
        for (const auto& item : doc.at("components")) {
            comps.push_back(MixtureComponent{item.at("mean").get<std::vector<double>>(),
                                             item.at("cov_diag").get<std::vector<double>>(),
                                             item.at("weight").get<double>()});
        }
        std::map<std::string, std::vector<std::size_t>> conditions;
        if (doc.contains("condition_map")) {
            conditions = doc.at("condition_map").get<std::map<std::string, std::vector<std::size_t>>>();
        }
        return GaussianMixtureModel(std::move(comps), std::move(conditions));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("mixture JSON: ") + e.what());
    }
}

GaussianMixtureModel GaussianMixtureModel::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mixture file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

std::string GaussianMixtureModel::to_json_string() const {
    nlohmann::json doc;
    doc["components"] = nlohmann::json::array();
    for (const auto& comp : m_components) {
        doc["components"].push_back({{"mean", comp.mean}, {"cov_diag", comp.cov_diag}, {"weight", comp.weight}});
    }
    doc["condition_map"] = m_conditions;
    return doc.dump(2);
}

std::vector<std::pair<std::size_t, double>> GaussianMixtureModel::conditioned(const PromptEmbedding& c) const {
    std::vector<std::pair<std::size_t, double>> out;
    if (c.is_null()) {
        for (std::size_t k = 0; k < m_components.size(); ++k) {
            out.emplace_back(k, m_components[k].weight);
        }
        return out;
    }
    auto it = m_conditions.find(c.label());
    if (it == m_conditions.end()) {
        throw UnknownConditionError("mixture has no condition '" + c.label() + "'");
    }
    double total = 0.0;
    for (std::size_t k : it->second) {
        total += m_components[k].weight;
    }
    for (std::size_t k : it->second) {
        out.emplace_back(k, m_components[k].weight / total);
    }
    return out;
}

Latent GaussianMixtureModel::sample(const PromptEmbedding& c, std::mt19937_64& rng, const Shape& shape) const {
    if (shape_size(shape) != dim()) {
        throw ShapeMismatchError("sample shape " + shape_to_string(shape) + " does not match mixture dimension " +
                                 std::to_string(dim()));
    }
    const auto subset = conditioned(c);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    std::size_t pick = subset.back().first;
    for (const auto& [k, w] : subset) {
        acc += w;
        if (u < acc) {
            pick = k;
            break;
        }
    }
    const auto& comp = m_components[pick];
    std::vector<double> values(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        values[i] = comp.mean[i] + std::sqrt(comp.cov_diag[i]) * normal(rng);
    }
    return Latent(std::move(values), shape);
}

Latent analytic_eps(const Latent& z_t, std::size_t t, const PromptEmbedding& c, const GaussianMixtureModel& gmm,
                    const NoiseSchedule& sched) {
    if (t == 0) {
        throw StepOutOfRangeError("analytic_eps is undefined at t = 0 (1 - alpha_0 = 0)");
    }
    const double a = sched.alpha(t);
    if (z_t.size() != gmm.dim()) {
        throw ShapeMismatchError("latent of size " + std::to_string(z_t.size()) + " vs mixture dimension " +
                                 std::to_string(gmm.dim()));
    }
    const double sa = std::sqrt(a);
    const std::size_t d = gmm.dim();
    const auto subset = gmm.conditioned(c);

    // responsibilities from the marginal N(sqrt(a) mu, a s^2 + 1 - a), in log space
    std::vector<double> log_r(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const auto& comp = gmm.components()[subset[j].first];
        double lp = std::log(subset[j].second);
        for (std::size_t i = 0; i < d; ++i) {
            const double var = a * comp.cov_diag[i] + (1.0 - a);
            const double diff = z_t[i] - sa * comp.mean[i];
            lp -= 0.5 * (diff * diff / var + std::log(var));
        }
        log_r[j] = lp;
    }
    const double peak = *std::max_element(log_r.begin(), log_r.end());
    double norm = 0.0;
    for (double& lr : log_r) {
        lr = std::exp(lr - peak);
        norm += lr;
    }

    std::vector<double> post_mean(d, 0.0);
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const auto& comp = gmm.components()[subset[j].first];
        const double r = log_r[j] / norm;
        for (std::size_t i = 0; i < d; ++i) {
            const double var = a * comp.cov_diag[i] + (1.0 - a);
            const double gain = sa * comp.cov_diag[i] / var;
            post_mean[i] += r * (comp.mean[i] + gain * (z_t[i] - sa * comp.mean[i]));
        }
    }

    const double inv_sigma = 1.0 / std::sqrt(1.0 - a);
    std::vector<double> eps(d);
    for (std::size_t i = 0; i < d; ++i) {
        eps[i] = (z_t[i] - sa * post_mean[i]) * inv_sigma;
    }
    return Latent(std::move(eps), z_t.shape());
}

GaussianMixtureDenoiser::GaussianMixtureDenoiser(GaussianMixtureModel gmm, NoiseSchedule sched)
    : m_gmm(std::move(gmm)), m_sched(std::move(sched)) {}

Latent GaussianMixtureDenoiser::predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c,
                                        AttentionContext* ctx) const {
    if (ctx != nullptr) {
        throw UnsupportedError("the gaussian-mixture oracle has no attention to capture or inject");
    }
    if (t == 0) {
        if (z_t.size() != m_gmm.dim()) {
            throw ShapeMismatchError("latent does not match mixture dimension");
        }
        m_gmm.conditioned(c);
        return Latent::zeros(z_t.shape());
    }
    return analytic_eps(z_t, t, c, m_gmm, m_sched);
}

GaussianMixtureModel random_mixture(std::mt19937_64& rng, std::size_t dim, std::size_t max_components) {
    std::uniform_int_distribution<std::size_t> count(2, std::max<std::size_t>(2, max_components));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> var(0.05, 1.0);
    std::uniform_real_distribution<double> raw_weight(0.2, 1.0);

    const std::size_t k = count(rng);
    std::vector<MixtureComponent> comps(k);
    double total = 0.0;
    for (auto& comp : comps) {
        comp.mean.resize(dim);
        comp.cov_diag.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            comp.mean[i] = 2.0 * normal(rng);
            comp.cov_diag[i] = var(rng);
        }
        comp.weight = raw_weight(rng);
        total += comp.weight;
    }
    for (auto& comp : comps) {
        comp.weight /= total;
    }
    // keep the sum within rounding of one
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
        sum += comps[i].weight;
    }
    comps.back().weight = 1.0 - sum;
    return GaussianMixtureModel(std::move(comps));
}

}  // namespace reage
