// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace reage {

enum class ErrorKind {
    validation,
    shape_mismatch,
    step_out_of_range,
    invariant_violation,
    unsupported,
    unknown_condition,
    numeric_divergence,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), m_kind(kind) {}

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class ShapeMismatchError : public Error {
public:
    explicit ShapeMismatchError(const std::string& what) : Error(ErrorKind::shape_mismatch, what) {}
};

class StepOutOfRangeError : public Error {
public:
    explicit StepOutOfRangeError(const std::string& what) : Error(ErrorKind::step_out_of_range, what) {}
};

class InvariantViolationError : public Error {
public:
    explicit InvariantViolationError(const std::string& what) : Error(ErrorKind::invariant_violation, what) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what) : Error(ErrorKind::unsupported, what) {}
};

class UnknownConditionError : public Error {
public:
    explicit UnknownConditionError(const std::string& what) : Error(ErrorKind::unknown_condition, what) {}
};

class NumericDivergenceError : public Error {
public:
    NumericDivergenceError(const std::string& what, std::size_t step)
        : Error(ErrorKind::numeric_divergence, what), m_step(step) {}

    std::size_t step() const noexcept { return m_step; }

private:
    std::size_t m_step;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace reage
