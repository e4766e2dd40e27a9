// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "reage/errors.hpp"

namespace reage {

const char* to_string(AttentionKind kind) {
    return kind == AttentionKind::self ? "self" : "cross";
}

void AttentionMaps::add(AttentionMap map) {
    if (map.weights.size() != map.heads * map.rows * map.cols) {
        throw ShapeMismatchError("attention map weights do not match heads x rows x cols");
    }
    if (find(map.layer, map.kind) != nullptr) {
        throw ValidationError("duplicate attention map for layer " + std::to_string(map.layer) + " (" +
                              to_string(map.kind) + ")");
    }
    m_maps.push_back(std::move(map));
}

const AttentionMap* AttentionMaps::find(int layer, AttentionKind kind) const {
    for (const auto& m : m_maps) {
        if (m.layer == layer && m.kind == kind) {
            return &m;
        }
    }
    return nullptr;
}

AttentionMaps AttentionMaps::select(AttentionKind kind, std::optional<LayerRange> range) const {
    AttentionMaps out;
    for (const auto& m : m_maps) {
        if (m.kind == kind && (!range || range->contains(m.layer))) {
            out.m_maps.push_back(m);
        }
    }
    return out;
}

std::vector<int> AttentionMaps::layers() const {
    std::set<int> ids;
    for (const auto& m : m_maps) {
        ids.insert(m.layer);
    }
    return {ids.begin(), ids.end()};
}

double max_row_deviation(const AttentionMap& map) {
    double worst = 0.0;
    for (std::size_t h = 0; h < map.heads; ++h) {
        for (std::size_t q = 0; q < map.rows; ++q) {
            double sum = 0.0;
            for (std::size_t k = 0; k < map.cols; ++k) {
                const double w = map.at(h, q, k);
                if (!std::isfinite(w) || w < 0.0) {
                    return std::numeric_limits<double>::infinity();
                }
                sum += w;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    return worst;
}

bool is_row_stochastic(const AttentionMap& map, double tol) {
    return max_row_deviation(map) <= tol;
}

bool is_row_stochastic(const AttentionMaps& maps, double tol) {
    return std::all_of(maps.maps().begin(), maps.maps().end(),
                       [tol](const AttentionMap& m) { return is_row_stochastic(m, tol); });
}

void require_row_stochastic(const AttentionMap& map, double tol) {
    if (!is_row_stochastic(map, tol)) {
        throw InvariantViolationError(std::string(to_string(map.kind)) + "-attention map of layer " +
                                      std::to_string(map.layer) + " has a row that is not a probability simplex");
    }
}

void require_row_stochastic(const AttentionMaps& maps, double tol) {
    for (const auto& m : maps.maps()) {
        require_row_stochastic(m, tol);
    }
}

void softmax_inplace(std::vector<double>& row) {
    if (row.empty()) {
        return;
    }
    const double peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : row) {
        v /= total;
    }
}

std::vector<double> apply_attention(const AttentionMap& map, std::size_t head, const std::vector<double>& values,
                                    std::size_t value_dim) {
    if (values.size() != map.cols * value_dim) {
        throw ShapeMismatchError("attention values do not match map columns");
    }
    std::vector<double> out(map.rows * value_dim, 0.0);
    for (std::size_t q = 0; q < map.rows; ++q) {
        for (std::size_t k = 0; k < map.cols; ++k) {
            const double w = map.at(head, q, k);
            if (w == 0.0) {
                continue;
            }
            for (std::size_t c = 0; c < value_dim; ++c) {
                out[q * value_dim + c] += w * values[k * value_dim + c];
            }
        }
    }
    return out;
}

}  // namespace reage
