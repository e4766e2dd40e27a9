// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/aac.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "reage/errors.hpp"

namespace reage {

namespace {

// entropy this close to an endpoint is the endpoint
constexpr double kEntropySnap = 1e-12;

struct RowStats {
    double total = 0.0;
    std::size_t rows = 0;
};

void accumulate_entropy(const AttentionMap& map, RowStats& stats) {
    const double log_k = map.cols > 1 ? std::log(static_cast<double>(map.cols)) : 0.0;
    for (std::size_t h = 0; h < map.heads; ++h) {
        for (std::size_t q = 0; q < map.rows; ++q) {
            double ent = 0.0;
            if (map.cols > 1) {
                for (std::size_t k = 0; k < map.cols; ++k) {
                    const double p = map.at(h, q, k);
                    if (p > 0.0) {
                        ent -= p * std::log(p);
                    }
                }
                ent /= log_k;
            }
            stats.total += ent;
            ++stats.rows;
        }
    }
}

double finish_entropy(const RowStats& stats) {
    if (stats.rows == 0) {
        throw ValidationError("entropy of an empty attention slice");
    }
    double h = std::clamp(stats.total / static_cast<double>(stats.rows), 0.0, 1.0);
    if (h > 1.0 - kEntropySnap) {
        h = 1.0;
    }
    if (h < kEntropySnap) {
        h = 0.0;
    }
    return h;
}

const AttentionMap& partner(const AttentionMaps& maps, const AttentionMap& like) {
    const AttentionMap* other = maps.find(like.layer, like.kind);
    if (other == nullptr || !other->same_geometry(like)) {
        throw ShapeMismatchError(std::string("no matching ") + to_string(like.kind) + "-attention map for layer " +
                                 std::to_string(like.layer));
    }
    return *other;
}

void check_paired(const AttentionMaps& src, const AttentionMaps& tgt) {
    if (src.size() != tgt.size()) {
        throw ShapeMismatchError("attention slices hold different numbers of maps");
    }
    for (const auto& m : src.maps()) {
        partner(tgt, m);
    }
}

}  // namespace

const char* to_string(Regime regime) {
    switch (regime) {
    case Regime::cross_replace:
        return "CrossReplace";
    case Regime::adaptive:
        return "Adaptive";
    case Regime::self_replace:
        return "SelfReplace";
    }
    return "?";
}

void validate(const AacConfig& config) {
    if (config.steps < 1) {
        throw ValidationError("steps must be >= 1");
    }
    if (config.tau2 < 1) {
        throw ValidationError("tau2 must be >= 1");
    }
    if (config.tau2 > config.tau1) {
        std::ostringstream msg;
        msg << "tau2 (" << config.tau2 << ") must not exceed tau1 (" << config.tau1 << ")";
        throw ValidationError(msg.str());
    }
    if (config.tau1 > config.steps) {
        std::ostringstream msg;
        msg << "tau1 (" << config.tau1 << ") must not exceed steps (" << config.steps << ")";
        throw ValidationError(msg.str());
    }
    if (!std::isfinite(config.eta_th) || config.eta_th < 0.0) {
        throw ValidationError("eta_th must be finite and >= 0");
    }
    if (config.self_layers.first > config.self_layers.last) {
        throw ValidationError("self layer range is empty");
    }
    validate(config.guidance);
}

Regime regime_for_step(std::size_t t, const AacConfig& config) {
    if (t < 1 || t > config.steps) {
        throw StepOutOfRangeError("regime_for_step: step " + std::to_string(t) + " outside [1, " +
                                  std::to_string(config.steps) + "]");
    }
    if (t > config.tau1) {
        return Regime::cross_replace;
    }
    if (t >= config.tau2) {
        return Regime::adaptive;
    }
    return Regime::self_replace;
}

double row_entropy_normalized(const AttentionMap& map) {
    require_row_stochastic(map);
    RowStats stats;
    accumulate_entropy(map, stats);
    return finish_entropy(stats);
}

double row_entropy_normalized(const AttentionMaps& maps) {
    require_row_stochastic(maps);
    RowStats stats;
    for (const auto& m : maps.maps()) {
        accumulate_entropy(m, stats);
    }
    return finish_entropy(stats);
}

double kl_divergence(const AttentionMaps& src, const AttentionMaps& tgt) {
    check_paired(src, tgt);
    require_row_stochastic(src);
    require_row_stochastic(tgt);
    double total = 0.0;
    std::size_t rows = 0;
    for (const auto& p_map : src.maps()) {
        const AttentionMap& q_map = partner(tgt, p_map);
        const double norm = 1.0 + kKlSmoothing * static_cast<double>(p_map.cols);
        for (std::size_t h = 0; h < p_map.heads; ++h) {
            for (std::size_t r = 0; r < p_map.rows; ++r) {
                double kl = 0.0;
                for (std::size_t k = 0; k < p_map.cols; ++k) {
                    const double p = (p_map.at(h, r, k) + kKlSmoothing) / norm;
                    const double q = (q_map.at(h, r, k) + kKlSmoothing) / norm;
                    kl += p * std::log(p / q);
                }
                total += kl;
                ++rows;
            }
        }
    }
    if (rows == 0) {
        throw ValidationError("KL divergence of an empty attention slice");
    }
    return std::max(0.0, total / static_cast<double>(rows));
}

AttentionMaps blend_maps(const AttentionMaps& src, const AttentionMaps& tgt, double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw ValidationError("blend weight must lie in [0, 1]");
    }
    check_paired(src, tgt);
    AttentionMaps out;
    for (const auto& s : src.maps()) {
        const AttentionMap& t = partner(tgt, s);
        AttentionMap mixed = s;
        for (std::size_t i = 0; i < mixed.weights.size(); ++i) {
            mixed.weights[i] = w * s.weights[i] + (1.0 - w) * t.weights[i];
        }
        out.add(std::move(mixed));
    }
    return out;
}

Latent aac_edit(const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
                const Denoiser& denoiser, const NoiseSchedule& sched, const AacConfig& config,
                const AacObserver& observer) {
    validate(config);
    if (!denoiser.supports_attention()) {
        throw UnsupportedError("adaptive attention control needs attention hooks; " + denoiser.describe() +
                               " has none");
    }
    if (traj.states.size() < 2 || traj.steps() != sched.num_steps() || traj.schedule != sched.spec()) {
        throw ValidationError("trajectory was produced under a different schedule");
    }
    if (config.steps != traj.steps()) {
        throw ValidationError("aac config expects " + std::to_string(config.steps) + " steps, trajectory has " +
                              std::to_string(traj.steps()));
    }
    const double scale = config.guidance.scale;

    Latent z_src = traj.at(traj.steps());
    Latent z_tgt = z_src;
    for (std::size_t t = traj.steps(); t >= 1; --t) {
        AttentionContext src_ctx;
        src_ctx.capture = true;
        const Latent eps_src = guided_eps(denoiser, z_src, t, c_src, scale, &src_ctx);
        const AttentionMaps& src_maps = src_ctx.captured;
        Latent next_src = ddim_forward_step(z_src, t, eps_src, sched);
        require_finite(next_src, t, "source branch");

        AacStepRecord rec;
        rec.t = t;
        rec.regime = regime_for_step(t, config);
        AttentionMaps inject;
        switch (rec.regime) {
        case Regime::cross_replace:
            inject = src_maps.select(AttentionKind::cross);
            rec.injected_kind = AttentionKind::cross;
            break;
        case Regime::adaptive: {
            AttentionContext tgt_ctx;
            tgt_ctx.capture = true;
            denoiser.predict(z_tgt, t, c_tgt, &tgt_ctx);
            const AttentionMaps& tgt_maps = tgt_ctx.captured;
            const AttentionMaps src_cross = src_maps.select(AttentionKind::cross);
            const AttentionMaps tgt_cross = tgt_maps.select(AttentionKind::cross);
            const double eta = kl_divergence(src_cross, tgt_cross);
            rec.eta = eta;
            if (eta > config.eta_th) {
                const double w = 1.0 - row_entropy_normalized(src_cross);
                rec.w = w;
                inject = blend_maps(src_cross, tgt_cross, w);
                rec.injected_kind = AttentionKind::cross;
            } else {
                const AttentionMaps src_self = src_maps.select(AttentionKind::self, config.self_layers);
                const AttentionMaps tgt_self = tgt_maps.select(AttentionKind::self, config.self_layers);
                const double w = 1.0 - row_entropy_normalized(src_self);
                rec.w = w;
                inject = blend_maps(src_self, tgt_self, w);
                rec.injected_kind = AttentionKind::self;
            }
            break;
        }
        case Regime::self_replace:
            inject = src_maps.select(AttentionKind::self, config.self_layers);
            rec.injected_kind = AttentionKind::self;
            break;
        }
        if (inject.empty()) {
            throw ValidationError("no attention maps to inject at step " + std::to_string(t) +
                                  " (self layer range outside the denoiser's layers?)");
        }
        require_row_stochastic(inject);

        AttentionContext tgt_ctx;
        tgt_ctx.overrides = &inject;
        const Latent eps_tgt = guided_eps(denoiser, z_tgt, t, c_tgt, scale, &tgt_ctx);
        z_tgt = ddim_forward_step(z_tgt, t, eps_tgt, sched);
        require_finite(z_tgt, t, "target branch");
        z_src = std::move(next_src);

        if (observer) {
            rec.layers_injected = inject.layers();
            rec.injected = &inject;
            observer(rec);
        }
    }
    return z_tgt;
}

}  // namespace reage
