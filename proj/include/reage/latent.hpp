// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace reage {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// A latent tensor stored as a flat row-major vector plus its shape.
///
/// Construction validates that the shape covers the data exactly and that every
/// entry is finite. Arithmetic helpers below throw ShapeMismatchError when the
/// operands disagree.
class Latent {
public:
    Latent() = default;
    Latent(std::vector<double> values, Shape shape);
    explicit Latent(std::vector<double> values);

    static Latent zeros(const Shape& shape);

    const std::vector<double>& values() const noexcept { return m_values; }
    std::vector<double>& values() noexcept { return m_values; }
    const Shape& shape() const noexcept { return m_shape; }
    std::size_t size() const noexcept { return m_values.size(); }

    double operator[](std::size_t i) const { return m_values[i]; }
    double& operator[](std::size_t i) { return m_values[i]; }

    bool all_finite() const;

    friend bool operator==(const Latent&, const Latent&) = default;

private:
    std::vector<double> m_values;
    Shape m_shape;
};

void check_same_shape(const Latent& a, const Latent& b, const char* context);

Latent operator+(const Latent& a, const Latent& b);
Latent operator-(const Latent& a, const Latent& b);
Latent operator*(double s, const Latent& a);

/// a*x + b*y, elementwise.
Latent axpby(double a, const Latent& x, double b, const Latent& y);

double dot(const Latent& a, const Latent& b);
double l2_norm(const Latent& a);

/// ||a - b|| / ||b||; falls back to the absolute error when ||b|| is zero.
double relative_l2_error(const Latent& a, const Latent& b);

}  // namespace reage
