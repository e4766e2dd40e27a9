// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "reage/errors.hpp"
#include "reage/prompt.hpp"
#include "reage/trajectory_io.hpp"

namespace reage {

namespace {

double norm_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

void require_unit(const std::vector<double>& v, const char* which) {
    const double n = norm_of(v);
    if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance) {
        throw InvariantViolationError(std::string(which) + " embedding is not unit norm (|e| = " + std::to_string(n) +
                                      ")");
    }
}

[[noreturn]] void rethrow_in_stage(const std::string& stage, const Error& e) {
    const std::string msg = stage + ": " + e.what();
    switch (e.kind()) {
    case ErrorKind::validation:
        throw ValidationError(msg);
    case ErrorKind::shape_mismatch:
        throw ShapeMismatchError(msg);
    case ErrorKind::step_out_of_range:
        throw StepOutOfRangeError(msg);
    case ErrorKind::invariant_violation:
        throw InvariantViolationError(msg);
    case ErrorKind::unsupported:
        throw UnsupportedError(msg);
    case ErrorKind::unknown_condition:
        throw UnknownConditionError(msg);
    case ErrorKind::numeric_divergence: {
        const auto* nd = dynamic_cast<const NumericDivergenceError*>(&e);
        throw NumericDivergenceError(msg, nd != nullptr ? nd->step() : 0);
    }
    case ErrorKind::io:
        throw IoError(msg);
    }
    throw Error(e.kind(), msg);
}

template <class F>
auto in_stage(const std::string& stage, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        rethrow_in_stage(stage, e);
    }
}

std::string cycle_name(const std::string& id, int src, int tgt) {
    return "cycle " + id + " " + std::to_string(src) + "->" + std::to_string(tgt) + "->" + std::to_string(src);
}

}  // namespace

double identity_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw ShapeMismatchError("embeddings have lengths " + std::to_string(a.size()) + " and " +
                                 std::to_string(b.size()));
    }
    require_unit(a, "first");
    require_unit(b, "second");
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    // dividing out the residual norms keeps identical inputs at exactly 1
    return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

FixtureEmbedder::FixtureEmbedder(std::map<std::string, std::vector<double>> table) : m_table(std::move(table)) {
    for (auto& [id, v] : m_table) {
        const double n = norm_of(v);
        if (v.empty() || !std::isfinite(n) || n == 0.0) {
            throw ValidationError("embedding fixture '" + id + "' is empty, zero or non-finite");
        }
        for (double& x : v) {
            x /= n;
        }
    }
}

FixtureEmbedder FixtureEmbedder::from_json_string(const std::string& text) {
    try {
        return FixtureEmbedder(nlohmann::json::parse(text).get<std::map<std::string, std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("embedding fixture: ") + e.what());
    }
}

FixtureEmbedder FixtureEmbedder::from_json_file(const std::filesystem::path& path) {
    return from_json_string(read_text_file(path));
}

std::vector<double> FixtureEmbedder::embed(const std::string& input_id) const {
    auto it = m_table.find(input_id);
    if (it == m_table.end()) {
        throw ValidationError("no embedding fixture for '" + input_id + "'");
    }
    return it->second;
}

HttpEmbedder::HttpEmbedder(std::string base_url, HttpOptions options)
    : m_base_url(std::move(base_url)), m_options(options) {}

std::vector<double> HttpEmbedder::embed(const std::string& input_id) const {
    const auto reply = post_json(m_base_url, "/embed", {{"input_id", input_id}}, m_options);
    std::vector<double> v;
    try {
        v = reply.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("embedding service reply for '" + input_id + "' has no embedding array: " + e.what());
    }
    require_unit(v, "service");
    return v;
}

std::string PassthroughPipeline::edit(const std::string& input_id, int, int) const {
    return input_id;
}

FixturePipeline::FixturePipeline(std::map<Key, std::string> table) : m_table(std::move(table)) {}

std::optional<std::string> FixturePipeline::find(const std::string& input_id, int src_age, int tgt_age) const {
    auto it = m_table.find(Key{input_id, src_age, tgt_age});
    if (it == m_table.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::string FixturePipeline::edit(const std::string& input_id, int src_age, int tgt_age) const {
    auto out = find(input_id, src_age, tgt_age);
    if (!out) {
        throw ValidationError("no edit fixture for '" + input_id + "' " + std::to_string(src_age) + "->" +
                              std::to_string(tgt_age));
    }
    return *out;
}

double cyclic_identity_similarity(const EditPipeline& pipeline, const std::string& input_id, int src_age, int tgt_age,
                                  const Embedder& embedder) {
    if (src_age < 0 || tgt_age < 0) {
        throw ValidationError("ages must be >= 0");
    }
    const std::string name = cycle_name(input_id, src_age, tgt_age);
    const std::string forward = in_stage(name + ", forward edit", [&] { return pipeline.edit(input_id, src_age, tgt_age); });
    const std::string back = in_stage(name + ", return edit", [&] { return pipeline.edit(forward, tgt_age, src_age); });
    const auto e_in = in_stage(name + ", embedding input", [&] { return embedder.embed(input_id); });
    const auto e_back = in_stage(name + ", embedding reconstruction", [&] { return embedder.embed(back); });
    return in_stage(name + ", similarity", [&] { return identity_similarity(e_in, e_back); });
}

double reference_identity_similarity(const std::string& re_aged_id, const std::string& reference_id,
                                     const Embedder& embedder) {
    return identity_similarity(embedder.embed(re_aged_id), embedder.embed(reference_id));
}

double mean_cyclic_identity_similarity(const EditPipeline& pipeline, const std::vector<CycleCase>& cases,
                                       const Embedder& embedder) {
    if (cases.empty()) {
        throw ValidationError("no cycles to evaluate");
    }
    double total = 0.0;
    for (const auto& c : cases) {
        total += cyclic_identity_similarity(pipeline, c.input_id, c.src_age, c.tgt_age, embedder);
    }
    return total / static_cast<double>(cases.size());
}

std::vector<CycleCase> bracket_cycles(const std::string& input_id, const std::vector<std::string>& bracket_labels) {
    std::vector<int> ages;
    for (const auto& label : bracket_labels) {
        ages.push_back(central_age(label));
    }
    std::vector<CycleCase> out;
    for (int a : ages) {
        for (int b : ages) {
            if (a != b) {
                out.push_back({input_id, a, b});
            }
        }
    }
    return out;
}

std::optional<CycleCase> split_at_forty(const std::string& input_id, int age) {
    if (age < 0) {
        throw ValidationError("age must be >= 0");
    }
    if (age < 40) {
        return CycleCase{input_id, age, 60};
    }
    if (age > 40) {
        return CycleCase{input_id, age, 20};
    }
    return std::nullopt;
}

void validate(const ScoreSet& scores) {
    if (scores.genuine.empty() || scores.impostor.empty()) {
        throw ValidationError("score set needs at least one genuine and one impostor score");
    }
    for (const auto* list : {&scores.genuine, &scores.impostor}) {
        for (double s : *list) {
            if (!(s >= -1.0 && s <= 1.0)) {
                throw ValidationError("similarity score " + std::to_string(s) + " outside [-1, 1]");
            }
        }
    }
}

FnmrResult fnmr_at_fmr(const ScoreSet& scores, double fmr_target) {
    validate(scores);
    if (!(fmr_target >= 0.0 && fmr_target <= 1.0)) {
        throw ValidationError("fmr_target must lie in [0, 1]");
    }
    std::vector<double> imp = scores.impostor;
    std::sort(imp.begin(), imp.end());
    const double n_imp = static_cast<double>(imp.size());

    // candidates in increasing order: -inf, then just above each distinct impostor score
    double threshold = -std::numeric_limits<double>::infinity();
    if (1.0 > fmr_target) {
        threshold = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < imp.size(); ++i) {
            if (i + 1 < imp.size() && imp[i + 1] == imp[i]) {
                continue;
            }
            // impostors >= nextafter(imp[i]) are exactly those after index i
            const double fmr = static_cast<double>(imp.size() - i - 1) / n_imp;
            if (fmr <= fmr_target) {
                threshold = std::nextafter(imp[i], std::numeric_limits<double>::infinity());
                break;
            }
        }
    }
    const auto below = std::count_if(scores.genuine.begin(), scores.genuine.end(),
                                     [&](double s) { return s < threshold; });
    return {static_cast<double>(below) / static_cast<double>(scores.genuine.size()), threshold};
}

double mean_absolute_error(const std::vector<double>& predicted_ages, double target_age) {
    if (predicted_ages.empty()) {
        throw ValidationError("mean absolute error of an empty list");
    }
    if (!std::isfinite(target_age)) {
        throw ValidationError("target age must be finite");
    }
    double total = 0.0;
    for (double p : predicted_ages) {
        if (!std::isfinite(p)) {
            throw ValidationError("predicted ages must be finite");
        }
        total += std::abs(p - target_age);
    }
    return total / static_cast<double>(predicted_ages.size());
}

}  // namespace reage
