// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/prompt.hpp"

#include <cctype>
#include <cstdint>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reage/errors.hpp"
#include "reage/trajectory_io.hpp"

namespace reage {

namespace {

constexpr const char* kPrefix = "Photo of a ";
constexpr const char* kYearsOld = " years old ";
constexpr const char* kWith = " with ";
constexpr const char* kDueTo = ", due to ";

std::string required_field(const std::string& value, const char* name) {
    std::string norm = normalize_whitespace(value);
    if (norm.empty()) {
        throw ValidationError(std::string("missing field: ") + name);
    }
    return norm;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FaceAttributes attributes_from_json(const nlohmann::json& j) {
    FaceAttributes a;
    a.age = j.at("age").get<int>();
    a.gender = j.at("gender").get<std::string>();
    a.skin_tone_texture = j.at("skin_tone_texture").get<std::string>();
    a.cause_description = j.at("cause_description").get<std::string>();
    return a;
}

bool all_digits(const std::string& s) {
    if (s.empty()) {
        return false;
    }
    for (unsigned char ch : s) {
        if (!std::isdigit(ch)) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string normalize_whitespace(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::string out;
    while (in >> word) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += word;
    }
    return out;
}

std::string build_refined_prompt(const FaceAttributes& attributes) {
    if (attributes.age < 0) {
        throw ValidationError("age must be >= 0");
    }
    const std::string gender = required_field(attributes.gender, "gender");
    const std::string skin = required_field(attributes.skin_tone_texture, "skin_tone_texture");
    const std::string cause = required_field(attributes.cause_description, "cause_description");
    if (gender.find(kWith) != std::string::npos) {
        throw ValidationError("field gender must not contain \" with \"");
    }
    if (skin.find(kDueTo) != std::string::npos) {
        throw ValidationError("field skin_tone_texture must not contain \", due to \"");
    }
    return kPrefix + std::to_string(attributes.age) + kYearsOld + gender + kWith + skin + kDueTo + cause;
}

std::optional<FaceAttributes> parse_refined_prompt(const std::string& text) {
    const std::string prefix = kPrefix;
    if (text.rfind(prefix, 0) != 0) {
        return std::nullopt;
    }
    const std::size_t age_end = text.find(kYearsOld, prefix.size());
    if (age_end == std::string::npos) {
        return std::nullopt;
    }
    const std::string age = text.substr(prefix.size(), age_end - prefix.size());
    if (!all_digits(age) || age.size() > 9) {
        return std::nullopt;
    }
    const std::size_t gender_begin = age_end + std::string(kYearsOld).size();
    const std::size_t with_pos = text.find(kWith, gender_begin);
    if (with_pos == std::string::npos) {
        return std::nullopt;
    }
    const std::size_t skin_begin = with_pos + std::string(kWith).size();
    const std::size_t due_pos = text.find(kDueTo, skin_begin);
    if (due_pos == std::string::npos) {
        return std::nullopt;
    }
    FaceAttributes out;
    out.age = std::stoi(age);
    out.gender = text.substr(gender_begin, with_pos - gender_begin);
    out.skin_tone_texture = text.substr(skin_begin, due_pos - skin_begin);
    out.cause_description = text.substr(due_pos + std::string(kDueTo).size());
    if (out.gender.empty() || out.skin_tone_texture.empty() || out.cause_description.empty()) {
        return std::nullopt;
    }
    return out;
}

std::string build_basic_prompt(std::optional<int> age, const std::string& person) {
    const std::string who = normalize_whitespace(person);
    if (who.empty()) {
        throw ValidationError("person must not be empty");
    }
    if (!age) {
        return kPrefix + who;
    }
    if (*age < 0) {
        throw ValidationError("age must be >= 0");
    }
    return kPrefix + std::to_string(*age) + kYearsOld + who;
}

const std::vector<AgeBracket>& age_brackets() {
    // central age: floor of the bracket midpoint; 70+ has no upper bound and uses 75
    static const std::vector<AgeBracket> brackets = {
        {"0-2", 0, 2, 1},       {"3-6", 3, 6, 4},       {"7-9", 7, 9, 8},       {"10-14", 10, 14, 12},
        {"15-19", 15, 19, 17},  {"20-29", 20, 29, 24},  {"30-39", 30, 39, 34},  {"40-49", 40, 49, 44},
        {"50-69", 50, 69, 59},  {"70+", 70, std::nullopt, 75},
    };
    return brackets;
}

const AgeBracket& bracket_for_age(int age) {
    if (age < 0) {
        throw ValidationError("age must be >= 0");
    }
    for (const auto& b : age_brackets()) {
        if (age >= b.lo && (!b.hi || age <= *b.hi)) {
            return b;
        }
    }
    return age_brackets().back();
}

int central_age(const std::string& bracket_label) {
    for (const auto& b : age_brackets()) {
        if (b.label == bracket_label) {
            return b.central_age;
        }
    }
    throw ValidationError("unknown age bracket '" + bracket_label + "'");
}

PromptEmbedding embed_prompt(const std::string& text, const EmbeddingConfig& config) {
    if (config.dim == 0) {
        throw ValidationError("embedding dimension must be positive");
    }
    const std::string norm = normalize_whitespace(text);
    if (norm.empty()) {
        throw ValidationError("cannot embed an empty prompt");
    }
    std::istringstream in(norm);
    std::string word;
    std::vector<std::vector<double>> tokens;
    while (in >> word) {
        std::uint64_t state = fnv1a(word);
        std::vector<double> vec(config.dim);
        for (double& v : vec) {
            // top 53 bits -> [0, 1) -> [-1, 1)
            v = 2.0 * static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 - 1.0;
        }
        tokens.push_back(std::move(vec));
    }
    return PromptEmbedding(std::move(tokens), norm);
}

FixtureAttributeExtractor::FixtureAttributeExtractor(std::map<std::string, FaceAttributes> table)
    : m_table(std::move(table)) {}

FixtureAttributeExtractor FixtureAttributeExtractor::from_json_string(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        std::map<std::string, FaceAttributes> table;
        for (const auto& [id, entry] : doc.items()) {
            table.emplace(id, attributes_from_json(entry));
        }
        return FixtureAttributeExtractor(std::move(table));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("attribute fixture: ") + e.what());
    }
}

FixtureAttributeExtractor FixtureAttributeExtractor::from_json_file(const std::filesystem::path& path) {
    return from_json_string(read_text_file(path));
}

FaceAttributes FixtureAttributeExtractor::extract(const std::string& image_id) const {
    auto it = m_table.find(image_id);
    if (it == m_table.end()) {
        throw ValidationError("no attribute fixture for image '" + image_id + "'");
    }
    return it->second;
}

HttpAttributeExtractor::HttpAttributeExtractor(std::string base_url, HttpOptions options)
    : m_base_url(std::move(base_url)), m_options(options) {}

FaceAttributes HttpAttributeExtractor::extract(const std::string& image_id) const {
    const auto reply = post_json(m_base_url, "/extract", {{"image_id", image_id}}, m_options);
    try {
        return attributes_from_json(reply);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("attribute service reply for '" + image_id + "' is missing fields: " + e.what());
    }
}

}  // namespace reage
