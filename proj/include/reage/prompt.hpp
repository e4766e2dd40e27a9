// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reage/denoiser.hpp"
#include "reage/http_client.hpp"

namespace reage {

/// Intrinsic (skin tone & texture) and extrinsic (cause/condition) descriptors of a face.
struct FaceAttributes {
    int age = 0;
    std::string gender;
    std::string skin_tone_texture;
    std::string cause_description;

    friend bool operator==(const FaceAttributes&, const FaceAttributes&) = default;
};

/// "Photo of a <age> years old <gender> with <skin tone & texture>, due to <cause>"
///
/// Fields are whitespace-normalised. Throws ValidationError naming the field when one
/// is empty, when age is negative, or when a field contains the separator that
/// follows it (" with " in gender, ", due to " in skin_tone_texture).
std::string build_refined_prompt(const FaceAttributes& attributes);

/// Inverse of build_refined_prompt; nullopt when the text does not follow the template.
std::optional<FaceAttributes> parse_refined_prompt(const std::string& text);

/// "Photo of a <age> years old <person>" or, without an age, "Photo of a <person>".
std::string build_basic_prompt(std::optional<int> age, const std::string& person);

/// Collapse whitespace runs to single spaces and trim.
std::string normalize_whitespace(const std::string& text);

struct AgeBracket {
    std::string label;
    int lo = 0;
    std::optional<int> hi;  // inclusive; open-ended for the last bracket
    int central_age = 0;
};

/// The ten age groups 0-2 ... 70+ and the central age used in place of each.
const std::vector<AgeBracket>& age_brackets();
const AgeBracket& bracket_for_age(int age);
int central_age(const std::string& bracket_label);

struct EmbeddingConfig {
    std::size_t dim = 8;
};

/// Deterministic stand-in for a text encoder: one token per whitespace-separated word,
/// each token vector derived only from the word's FNV-1a hash. The label is the
/// whitespace-normalised text.
PromptEmbedding embed_prompt(const std::string& text, const EmbeddingConfig& config = {});

/// Source of face attributes for an image reference.
class AttributeExtractor {
public:
    virtual ~AttributeExtractor() = default;
    virtual FaceAttributes extract(const std::string& image_id) const = 0;
};

/// Offline extractor: JSON object image_id -> {age, gender, skin_tone_texture, cause_description}.
class FixtureAttributeExtractor : public AttributeExtractor {
public:
    explicit FixtureAttributeExtractor(std::map<std::string, FaceAttributes> table);
    static FixtureAttributeExtractor from_json_file(const std::filesystem::path& path);
    static FixtureAttributeExtractor from_json_string(const std::string& text);

    FaceAttributes extract(const std::string& image_id) const override;

private:
    std::map<std::string, FaceAttributes> m_table;
};

/// Live extractor: POSTs {"image_id": ...} to <endpoint>/extract and expects the fixture schema.
class HttpAttributeExtractor : public AttributeExtractor {
public:
    HttpAttributeExtractor(std::string base_url, HttpOptions options = {});
    FaceAttributes extract(const std::string& image_id) const override;

private:
    std::string m_base_url;
    HttpOptions m_options;
};

}  // namespace reage
