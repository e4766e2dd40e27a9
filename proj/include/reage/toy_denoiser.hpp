// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "reage/denoiser.hpp"

namespace reage {

struct ToyDenoiserOptions {
    int num_layers = 16;
    std::size_t heads = 2;
    std::size_t head_dim = 4;
    std::size_t token_dim = 8;
    std::size_t context_length = 32;
};

/// Fixed-weight attention denoiser for desk-scale experiments.
///
/// A latent of shape [P] or [P, C] is read as P query tokens with C channels. Each
/// of the layers 1..num_layers applies one self-attention sublayer over the P
/// positions followed by one cross-attention sublayer over the prompt tokens; prompts
/// are zero-padded (or truncated) to context_length keys, so cross maps are always
/// P x context_length. All weights are drawn once from `seed` with std::mt19937_64.
class ToyAttentionDenoiser : public Denoiser {
public:
    ToyAttentionDenoiser(std::uint64_t seed, std::size_t channels, ToyDenoiserOptions options = {});

    using Denoiser::predict;
    Latent predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c, AttentionContext* ctx) const override;
    bool supports_attention() const override { return true; }
    std::string describe() const override;

    std::uint64_t seed() const noexcept { return m_seed; }
    std::size_t channels() const noexcept { return m_channels; }
    const ToyDenoiserOptions& options() const noexcept { return m_options; }

private:
    struct AttentionWeights {
        std::vector<double> wq, wk, wv, wo;
    };

    std::size_t model_dim() const { return m_options.heads * m_options.head_dim; }

    void attention_sublayer(int layer, AttentionKind kind, const AttentionWeights& w, std::vector<double>& hidden,
                            std::size_t positions, const std::vector<double>& keys_src, std::size_t num_keys,
                            std::size_t key_dim, AttentionContext* ctx) const;

    std::uint64_t m_seed;
    std::size_t m_channels;
    ToyDenoiserOptions m_options;
    std::vector<double> m_w_in;
    std::vector<double> m_b_in;
    std::vector<double> m_w_out;
    std::vector<double> m_b_out;
    std::vector<AttentionWeights> m_self;
    std::vector<AttentionWeights> m_cross;
};

}  // namespace reage
