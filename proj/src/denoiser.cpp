// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/denoiser.hpp"

#include <algorithm>

#include "reage/errors.hpp"
#include "reage/schedule.hpp"

namespace reage {

PromptEmbedding::PromptEmbedding(std::vector<std::vector<double>> tokens, std::string label)
    : m_tokens(std::move(tokens)), m_label(std::move(label)) {
    if (m_tokens.empty()) {
        throw ValidationError("prompt embedding needs at least one token");
    }
    const std::size_t d = m_tokens.front().size();
    if (d == 0) {
        throw ValidationError("prompt token vectors must be non-empty");
    }
    for (const auto& tok : m_tokens) {
        if (tok.size() != d) {
            throw ShapeMismatchError("prompt token vectors differ in dimension");
        }
    }
}

PromptEmbedding PromptEmbedding::null(std::size_t num_tokens, std::size_t dim) {
    return PromptEmbedding(std::vector<std::vector<double>>(num_tokens, std::vector<double>(dim, 0.0)), "");
}

PromptEmbedding PromptEmbedding::null_like(const PromptEmbedding& like) {
    return null(like.num_tokens(), like.dim());
}

bool PromptEmbedding::is_null() const {
    return std::all_of(m_tokens.begin(), m_tokens.end(), [](const std::vector<double>& tok) {
        return std::all_of(tok.begin(), tok.end(), [](double v) { return v == 0.0; });
    });
}

std::pair<Latent, AttentionMaps> with_captured_attention(const Denoiser& denoiser, const Latent& z_t, std::size_t t,
                                                         const PromptEmbedding& c) {
    if (!denoiser.supports_attention()) {
        throw UnsupportedError("attention capture is not supported by " + denoiser.describe());
    }
    AttentionContext ctx;
    ctx.capture = true;
    Latent eps = denoiser.predict(z_t, t, c, &ctx);
    return {std::move(eps), std::move(ctx.captured)};
}

Latent with_injected_attention(const Denoiser& denoiser, const Latent& z_t, std::size_t t, const PromptEmbedding& c,
                               const AttentionMaps& overrides) {
    if (!denoiser.supports_attention()) {
        throw UnsupportedError("attention injection is not supported by " + denoiser.describe());
    }
    require_row_stochastic(overrides);
    AttentionContext ctx;
    ctx.overrides = &overrides;
    return denoiser.predict(z_t, t, c, &ctx);
}

Latent guided_eps(const Denoiser& denoiser, const Latent& z_t, std::size_t t, const PromptEmbedding& c, double scale,
                  AttentionContext* ctx) {
    Latent cond = denoiser.predict(z_t, t, c, ctx);
    Latent uncond = denoiser.predict(z_t, t, PromptEmbedding::null_like(c));
    return cfg_combine(cond, uncond, GuidanceConfig{scale});
}

}  // namespace reage
