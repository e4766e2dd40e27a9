// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "reage/attention.hpp"
#include "reage/latent.hpp"

namespace reage {

/// Token embeddings for one prompt. The null prompt is an all-zero token sequence.
class PromptEmbedding {
public:
    PromptEmbedding(std::vector<std::vector<double>> tokens, std::string label);

    /// All-zero sequence with the same token count and dimension as `like`.
    static PromptEmbedding null_like(const PromptEmbedding& like);
    static PromptEmbedding null(std::size_t num_tokens, std::size_t dim);

    const std::vector<std::vector<double>>& tokens() const noexcept { return m_tokens; }
    const std::string& label() const noexcept { return m_label; }
    std::size_t num_tokens() const noexcept { return m_tokens.size(); }
    std::size_t dim() const noexcept { return m_tokens.front().size(); }
    bool is_null() const;

    friend bool operator==(const PromptEmbedding&, const PromptEmbedding&) = default;

private:
    std::vector<std::vector<double>> m_tokens;
    std::string m_label;
};

/// Per-invocation attention hook state. Capture collects native maps; overrides replace
/// the named (layer, kind) maps verbatim during the forward pass.
struct AttentionContext {
    bool capture = false;
    AttentionMaps captured;
    const AttentionMaps* overrides = nullptr;
};

/// Noise predictor contract: deterministic for a fixed (z_t, t, c), output shape equals input shape.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    Latent predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c) const {
        return predict(z_t, t, c, nullptr);
    }

    /// `ctx` may be null. Denoisers without attention throw UnsupportedError for a non-null ctx.
    virtual Latent predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c,
                           AttentionContext* ctx) const = 0;

    virtual bool supports_attention() const { return false; }

    virtual std::string describe() const = 0;
};

std::pair<Latent, AttentionMaps> with_captured_attention(const Denoiser& denoiser, const Latent& z_t, std::size_t t,
                                                         const PromptEmbedding& c);

/// Rejects overrides whose rows are not probability simplices before calling the denoiser.
Latent with_injected_attention(const Denoiser& denoiser, const Latent& z_t, std::size_t t, const PromptEmbedding& c,
                               const AttentionMaps& overrides);

/// Guided noise estimate: cfg_combine(eps(c), eps(null_like(c)), scale). The attention
/// context, when given, applies to the conditional pass only.
Latent guided_eps(const Denoiser& denoiser, const Latent& z_t, std::size_t t, const PromptEmbedding& c, double scale,
                  AttentionContext* ctx = nullptr);

}  // namespace reage
