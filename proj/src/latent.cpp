// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/latent.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "reage/errors.hpp"

namespace reage {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? "," : "") << shape[i];
    }
    out << ']';
    return out.str();
}

Latent::Latent(std::vector<double> values, Shape shape) : m_values(std::move(values)), m_shape(std::move(shape)) {
    if (m_shape.empty()) {
        throw ValidationError("latent shape must have at least one dimension");
    }
    if (shape_size(m_shape) != m_values.size()) {
        throw ShapeMismatchError("latent shape " + shape_to_string(m_shape) + " does not cover " +
                                 std::to_string(m_values.size()) + " values");
    }
    if (!all_finite()) {
        throw InvariantViolationError("latent contains non-finite values");
    }
}

Latent::Latent(std::vector<double> values) : Latent(values, Shape{values.size()}) {}

Latent Latent::zeros(const Shape& shape) {
    return Latent(std::vector<double>(shape_size(shape), 0.0), shape);
}

bool Latent::all_finite() const {
    for (double v : m_values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

void check_same_shape(const Latent& a, const Latent& b, const char* context) {
    if (a.shape() != b.shape()) {
        throw ShapeMismatchError(std::string(context) + ": shape " + shape_to_string(a.shape()) + " vs " +
                                 shape_to_string(b.shape()));
    }
}

Latent axpby(double a, const Latent& x, double b, const Latent& y) {
    check_same_shape(x, y, "axpby");
    Latent out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a * x[i] + b * y[i];
    }
    return out;
}

Latent operator+(const Latent& a, const Latent& b) {
    check_same_shape(a, b, "add");
    Latent out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += b[i];
    }
    return out;
}

Latent operator-(const Latent& a, const Latent& b) {
    check_same_shape(a, b, "subtract");
    Latent out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b[i];
    }
    return out;
}

Latent operator*(double s, const Latent& a) {
    Latent out = a;
    for (double& v : out.values()) {
        v *= s;
    }
    return out;
}

double dot(const Latent& a, const Latent& b) {
    check_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double l2_norm(const Latent& a) {
    return std::sqrt(dot(a, a));
}

double relative_l2_error(const Latent& a, const Latent& b) {
    const double err = l2_norm(a - b);
    const double ref = l2_norm(b);
    return ref > 0.0 ? err / ref : err;
}

}  // namespace reage
