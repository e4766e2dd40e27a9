// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace reage {

enum class AttentionKind { self, cross };

const char* to_string(AttentionKind kind);

/// Attention weights of one layer and kind, all heads: weights[(h * rows + q) * cols + k].
struct AttentionMap {
    int layer = 0;
    AttentionKind kind = AttentionKind::self;
    std::size_t heads = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> weights;

    double at(std::size_t h, std::size_t q, std::size_t k) const { return weights[(h * rows + q) * cols + k]; }
    double& at(std::size_t h, std::size_t q, std::size_t k) { return weights[(h * rows + q) * cols + k]; }

    bool same_geometry(const AttentionMap& other) const {
        return layer == other.layer && kind == other.kind && heads == other.heads && rows == other.rows &&
               cols == other.cols;
    }

    friend bool operator==(const AttentionMap&, const AttentionMap&) = default;
};

/// Inclusive range of layer ids.
struct LayerRange {
    int first = 4;
    int last = 14;

    bool contains(int layer) const { return layer >= first && layer <= last; }
};

/// A collection of per-layer maps. At most one map per (layer, kind).
class AttentionMaps {
public:
    void add(AttentionMap map);

    const std::vector<AttentionMap>& maps() const noexcept { return m_maps; }
    std::size_t size() const noexcept { return m_maps.size(); }
    bool empty() const noexcept { return m_maps.empty(); }

    const AttentionMap* find(int layer, AttentionKind kind) const;

    /// Maps of one kind, optionally restricted to a layer range.
    AttentionMaps select(AttentionKind kind, std::optional<LayerRange> range = std::nullopt) const;

    std::vector<int> layers() const;

    friend bool operator==(const AttentionMaps&, const AttentionMaps&) = default;

private:
    std::vector<AttentionMap> m_maps;
};

inline constexpr double kRowSumTolerance = 1e-5;

/// Largest |row sum - 1| over all rows, or +inf if any weight is negative or non-finite.
double max_row_deviation(const AttentionMap& map);

bool is_row_stochastic(const AttentionMap& map, double tol = kRowSumTolerance);
bool is_row_stochastic(const AttentionMaps& maps, double tol = kRowSumTolerance);

/// Throws InvariantViolationError naming the offending map.
void require_row_stochastic(const AttentionMap& map, double tol = kRowSumTolerance);
void require_row_stochastic(const AttentionMaps& maps, double tol = kRowSumTolerance);

/// In-place numerically stable softmax over a row.
void softmax_inplace(std::vector<double>& row);

/// out[q][c] = sum_k weights[q][k] * values[k][c] for a single head slice.
/// values is row-major [cols x value_dim].
std::vector<double> apply_attention(const AttentionMap& map, std::size_t head, const std::vector<double>& values,
                                    std::size_t value_dim);

}  // namespace reage
