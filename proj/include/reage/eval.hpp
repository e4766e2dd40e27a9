// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "reage/http_client.hpp"

namespace reage {

inline constexpr double kUnitNormTolerance = 1e-5;

/// Cosine similarity of two unit-norm embeddings, in [-1, 1]. Throws InvariantViolationError when either norm
/// is off by more than kUnitNormTolerance, ShapeMismatchError on a length mismatch.
double identity_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Face embedding contract: unit-norm output, deterministic per input id.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& input_id) const = 0;
};

/// JSON object input_id -> vector. Vectors are scaled to unit norm on load; zero or
/// non-finite vectors are rejected.
class FixtureEmbedder : public Embedder {
public:
    explicit FixtureEmbedder(std::map<std::string, std::vector<double>> table);
    static FixtureEmbedder from_json_file(const std::filesystem::path& path);
    static FixtureEmbedder from_json_string(const std::string& text);

    std::vector<double> embed(const std::string& input_id) const override;
    bool contains(const std::string& input_id) const { return m_table.count(input_id) != 0; }
    std::size_t size() const noexcept { return m_table.size(); }

private:
    std::map<std::string, std::vector<double>> m_table;
};

/// Live embedder: POSTs {"input_id": ...} to <endpoint>/embed, expects {"embedding": [...]}.
/// The reply is checked against the unit-norm contract, not rescaled.
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string base_url, HttpOptions options = {});
    std::vector<double> embed(const std::string& input_id) const override;

private:
    std::string m_base_url;
    HttpOptions m_options;
};

/// Re-aging contract over input references: returns the reference of the edited result.
class EditPipeline {
public:
    virtual ~EditPipeline() = default;
    virtual std::string edit(const std::string& input_id, int src_age, int tgt_age) const = 0;
};

class PassthroughPipeline : public EditPipeline {
public:
    std::string edit(const std::string& input_id, int src_age, int tgt_age) const override;
};

/// Precomputed edits: (input_id, src_age, tgt_age) -> output_id.
class FixturePipeline : public EditPipeline {
public:
    using Key = std::tuple<std::string, int, int>;

    explicit FixturePipeline(std::map<Key, std::string> table);
    std::string edit(const std::string& input_id, int src_age, int tgt_age) const override;
    std::optional<std::string> find(const std::string& input_id, int src_age, int tgt_age) const;

private:
    std::map<Key, std::string> m_table;
};

/// input -> tgt_age -> src_age, then identity_similarity(f(input), f(reconstruction)).
/// Pipeline and embedder failures are rethrown with the same error kind and the cycle
/// stage ("forward edit", "return edit", ...) prefixed to the message.
double cyclic_identity_similarity(const EditPipeline& pipeline, const std::string& input_id, int src_age, int tgt_age,
                                  const Embedder& embedder);

double reference_identity_similarity(const std::string& re_aged_id, const std::string& reference_id,
                                     const Embedder& embedder);

struct CycleCase {
    std::string input_id;
    int src_age = 0;
    int tgt_age = 0;
};

/// Arithmetic mean of cyclic_identity_similarity over the cases.
double mean_cyclic_identity_similarity(const EditPipeline& pipeline, const std::vector<CycleCase>& cases,
                                       const Embedder& embedder);

/// Every ordered pair of distinct central ages from `bracket_labels`, for one input.
std::vector<CycleCase> bracket_cycles(const std::string& input_id, const std::vector<std::string>& bracket_labels);

/// Young/old split around 40: ages below 40 are aged to 60, ages above 40 de-aged to 20,
/// age 40 itself is excluded (nullopt).
std::optional<CycleCase> split_at_forty(const std::string& input_id, int age);

struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

/// Throws ValidationError for empty lists or scores outside [-1, 1].
void validate(const ScoreSet& scores);

struct FnmrResult {
    double fnmr = 0.0;
    double threshold = 0.0;
};

/// Operating point at a target false match rate. A score s matches when s >= threshold.
/// Candidate thresholds are -inf and the next representable value above each impostor
/// score; the smallest candidate whose impostor match rate is <= fmr_target is chosen,
/// and fnmr is the share of genuine scores below it.
FnmrResult fnmr_at_fmr(const ScoreSet& scores, double fmr_target);

/// Mean of |p - target|; ValidationError on an empty list.
double mean_absolute_error(const std::vector<double>& predicted_ages, double target_age);

}  // namespace reage
