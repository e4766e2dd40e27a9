// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/toy_denoiser.hpp"

#include <cmath>
#include <random>

#include "reage/errors.hpp"

namespace reage {

namespace {

std::vector<double> draw(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double gain) {
    std::normal_distribution<double> normal(0.0, gain / std::sqrt(static_cast<double>(cols)));
    std::vector<double> m(rows * cols);
    for (double& v : m) {
        v = normal(rng);
    }
    return m;
}

// y[r] = sum_c m[r, c] * x[c]
void matvec(const std::vector<double>& m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += m[r * cols + c] * x[c];
        }
        y[r] = acc;
    }
}

double sinusoid(std::size_t index, std::size_t channel, std::size_t dim, double base) {
    const double freq = std::pow(base, -static_cast<double>(channel / 2 * 2) / static_cast<double>(dim));
    const double arg = static_cast<double>(index) * freq;
    return channel % 2 == 0 ? std::sin(arg) : std::cos(arg);
}

}  // namespace

ToyAttentionDenoiser::ToyAttentionDenoiser(std::uint64_t seed, std::size_t channels, ToyDenoiserOptions options)
    : m_seed(seed), m_channels(channels), m_options(options) {
    if (channels == 0 || options.num_layers < 1 || options.heads == 0 || options.head_dim == 0 ||
        options.token_dim == 0 || options.context_length == 0) {
        throw ValidationError("toy denoiser dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    const std::size_t d = model_dim();
    m_w_in = draw(rng, d, channels, 1.0);
    m_b_in = draw(rng, d, 1, 0.1);
    for (int layer = 0; layer < options.num_layers; ++layer) {
        m_self.push_back({draw(rng, d, d, 2.0), draw(rng, d, d, 2.0), draw(rng, d, d, 1.0), draw(rng, d, d, 1.0)});
        m_cross.push_back({draw(rng, d, d, 2.0), draw(rng, d, options.token_dim, 2.0),
                           draw(rng, d, options.token_dim, 1.0), draw(rng, d, d, 1.0)});
    }
    m_w_out = draw(rng, channels, d, 1.0);
    m_b_out = draw(rng, channels, 1, 0.1);
}

std::string ToyAttentionDenoiser::describe() const {
    return "toy attention denoiser (seed " + std::to_string(m_seed) + ")";
}

void ToyAttentionDenoiser::attention_sublayer(int layer, AttentionKind kind, const AttentionWeights& w,
                                              std::vector<double>& hidden, std::size_t positions,
                                              const std::vector<double>& keys_src, std::size_t num_keys,
                                              std::size_t key_dim, AttentionContext* ctx) const {
    const std::size_t d = model_dim();
    const std::size_t heads = m_options.heads;
    const std::size_t hd = m_options.head_dim;

    std::vector<double> q(positions * d), k(num_keys * d), v(num_keys * d);
    for (std::size_t p = 0; p < positions; ++p) {
        matvec(w.wq, d, d, &hidden[p * d], &q[p * d]);
    }
    for (std::size_t j = 0; j < num_keys; ++j) {
        matvec(w.wk, d, key_dim, &keys_src[j * key_dim], &k[j * d]);
        matvec(w.wv, d, key_dim, &keys_src[j * key_dim], &v[j * d]);
    }

    const AttentionMap* injected = nullptr;
    if (ctx != nullptr && ctx->overrides != nullptr) {
        injected = ctx->overrides->find(layer, kind);
        if (injected != nullptr) {
            if (injected->heads != heads || injected->rows != positions || injected->cols != num_keys) {
                throw ShapeMismatchError(std::string("injected ") + to_string(kind) + "-attention map for layer " +
                                         std::to_string(layer) + " does not match the native geometry");
            }
            require_row_stochastic(*injected);
        }
    }

    AttentionMap native{layer, kind, heads, positions, num_keys, {}};
    if (injected == nullptr) {
        native.weights.resize(heads * positions * num_keys);
        const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
        std::vector<double> row(num_keys);
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t p = 0; p < positions; ++p) {
                for (std::size_t j = 0; j < num_keys; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < hd; ++c) {
                        s += q[p * d + h * hd + c] * k[j * d + h * hd + c];
                    }
                    row[j] = s * inv_sqrt;
                }
                softmax_inplace(row);
                for (std::size_t j = 0; j < num_keys; ++j) {
                    native.at(h, p, j) = row[j];
                }
            }
        }
    }
    const AttentionMap& used = injected != nullptr ? *injected : native;

    std::vector<double> mixed(positions * d, 0.0);
    std::vector<double> head_values(num_keys * hd);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t j = 0; j < num_keys; ++j) {
            for (std::size_t c = 0; c < hd; ++c) {
                head_values[j * hd + c] = v[j * d + h * hd + c];
            }
        }
        const std::vector<double> out = apply_attention(used, h, head_values, hd);
        for (std::size_t p = 0; p < positions; ++p) {
            for (std::size_t c = 0; c < hd; ++c) {
                mixed[p * d + h * hd + c] = out[p * hd + c];
            }
        }
    }

    std::vector<double> projected(d);
    for (std::size_t p = 0; p < positions; ++p) {
        matvec(w.wo, d, d, &mixed[p * d], projected.data());
        for (std::size_t c = 0; c < d; ++c) {
            hidden[p * d + c] = std::tanh(hidden[p * d + c] + projected[c]);
        }
    }

    if (ctx != nullptr && ctx->capture) {
        ctx->captured.add(used);
    }
}

Latent ToyAttentionDenoiser::predict(const Latent& z_t, std::size_t t, const PromptEmbedding& c,
                                     AttentionContext* ctx) const {
    const Shape& shape = z_t.shape();
    const std::size_t channels = shape.size() == 1 ? 1 : shape.back();
    if (shape.size() > 2 || channels != m_channels) {
        throw ShapeMismatchError("toy denoiser expects a latent of shape [P] or [P, " + std::to_string(m_channels) +
                                 "], got " + shape_to_string(shape));
    }
    if (c.dim() != m_options.token_dim) {
        throw ShapeMismatchError("prompt token dimension " + std::to_string(c.dim()) + " vs denoiser " +
                                 std::to_string(m_options.token_dim));
    }
    if (ctx != nullptr) {
        ctx->captured = AttentionMaps{};
        if (ctx->overrides != nullptr) {
            for (const auto& m : ctx->overrides->maps()) {
                if (m.layer < 1 || m.layer > m_options.num_layers) {
                    throw ShapeMismatchError("injected map targets missing layer " + std::to_string(m.layer));
                }
            }
        }
    }
    const std::size_t positions = shape.front();
    const std::size_t d = model_dim();

    std::vector<double> hidden(positions * d);
    for (std::size_t p = 0; p < positions; ++p) {
        matvec(m_w_in, d, m_channels, &z_t.values()[p * m_channels], &hidden[p * d]);
        for (std::size_t j = 0; j < d; ++j) {
            hidden[p * d + j] =
                std::tanh(hidden[p * d + j] + m_b_in[j] + sinusoid(p, j, d, 100.0) + sinusoid(t, j, d, 10000.0));
        }
    }

    const std::size_t ctx_len = m_options.context_length;
    std::vector<double> context(ctx_len * m_options.token_dim, 0.0);
    for (std::size_t j = 0; j < std::min(ctx_len, c.num_tokens()); ++j) {
        std::copy(c.tokens()[j].begin(), c.tokens()[j].end(), context.begin() + j * m_options.token_dim);
    }

    for (int layer = 1; layer <= m_options.num_layers; ++layer) {
        const std::size_t idx = static_cast<std::size_t>(layer - 1);
        const std::vector<double> self_keys = hidden;
        attention_sublayer(layer, AttentionKind::self, m_self[idx], hidden, positions, self_keys, positions, d, ctx);
        attention_sublayer(layer, AttentionKind::cross, m_cross[idx], hidden, positions, context, ctx_len,
                           m_options.token_dim, ctx);
    }

    std::vector<double> eps(positions * m_channels);
    for (std::size_t p = 0; p < positions; ++p) {
        matvec(m_w_out, m_channels, d, &hidden[p * d], &eps[p * m_channels]);
        for (std::size_t ch = 0; ch < m_channels; ++ch) {
            eps[p * m_channels + ch] += m_b_out[ch];
        }
    }
    return Latent(std::move(eps), shape);
}

}  // namespace reage
