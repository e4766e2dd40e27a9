// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "reage/errors.hpp"
#include "reage/prompt.hpp"

namespace reage {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ValidationError("config field " + key + ": '" + value + "' is not " + expected);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) {
        bad_value(key, value, "a non-negative integer");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    if (value.empty()) {
        bad_value(key, value, "a number");
    }
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || !std::isfinite(out)) {
        bad_value(key, value, "a finite number");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    bad_value(key, value, "a boolean");
}

std::string render_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) {
            out += sep;
        }
        out += s;
    }
    return out;
}

std::string hash_of(const ConfigValues& values, const std::vector<std::string>& keys) {
    std::string canon;
    for (const auto& k : keys) {
        canon += k;
        canon += '=';
        canon += values.at(k);
        canon += '\n';
    }
    return fnv1a_hex(canon);
}

}  // namespace

const char* to_string(EditMode mode) {
    return mode == EditMode::angular ? "angular" : "aac";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "cfg_scale", "denoiser", "eta_th",     "eval_fixture", "fmr_targets", "input",   "latent_shape",
        "metrics",   "mode",     "out",        "record_timing", "seed",       "self_layers", "src_prompt",
        "steps",     "tau1",     "tau2",       "tgt_prompt",   "trajectory",  "workers", "xi",
    };
    return keys;
}

ConfigValues parse_config_text(const std::string& text) {
    ConfigValues out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    const auto& keys = config_keys();
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig config_from_values(const ConfigValues& values) {
    RunConfig c;
    const auto& keys = config_keys();
    for (const auto& [key, value] : values) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ValidationError("unknown config key '" + key + "'");
        }
        if (key == "steps") {
            c.steps = parse_u64(key, value);
        } else if (key == "xi") {
            c.xi = parse_double(key, value);
        } else if (key == "eta_th") {
            c.eta_th = parse_double(key, value);
        } else if (key == "tau1") {
            c.tau1 = parse_u64(key, value);
        } else if (key == "tau2") {
            c.tau2 = parse_u64(key, value);
        } else if (key == "cfg_scale") {
            c.cfg_scale = parse_double(key, value);
        } else if (key == "seed") {
            c.seed = parse_u64(key, value);
        } else if (key == "denoiser") {
            c.denoiser = value;
        } else if (key == "mode") {
            if (value == "angular") {
                c.mode = EditMode::angular;
            } else if (value == "aac") {
                c.mode = EditMode::aac;
            } else {
                bad_value(key, value, "one of angular, aac");
            }
        } else if (key == "src_prompt") {
            c.src_prompt = normalize_whitespace(value);
        } else if (key == "tgt_prompt") {
            c.tgt_prompt = normalize_whitespace(value);
        } else if (key == "self_layers") {
            const auto dash = value.find('-');
            if (dash == std::string::npos) {
                bad_value(key, value, "a range like 4-14");
            }
            c.self_layers.first = static_cast<int>(parse_u64(key, trim(value.substr(0, dash))));
            c.self_layers.last = static_cast<int>(parse_u64(key, trim(value.substr(dash + 1))));
        } else if (key == "latent_shape") {
            Shape shape;
            for (const auto& d : split(value, 'x')) {
                shape.push_back(parse_u64(key, d));
            }
            if (shape.empty()) {
                bad_value(key, value, "a shape like 16x2");
            }
            c.latent_shape = shape;
        } else if (key == "input") {
            c.input = value;
        } else if (key == "trajectory") {
            c.trajectory = value;
        } else if (key == "out") {
            c.out = value;
        } else if (key == "eval_fixture") {
            c.eval_fixture = value;
        } else if (key == "metrics") {
            c.metrics = split(value, ',');
        } else if (key == "fmr_targets") {
            c.fmr_targets.clear();
            for (const auto& f : split(value, ',')) {
                c.fmr_targets.push_back(parse_double(key, f));
            }
        } else if (key == "record_timing") {
            c.record_timing = parse_bool(key, value);
        } else if (key == "workers") {
            c.workers = parse_u64(key, value);
        }
    }
    return c;
}

ConfigValues config_to_values(const RunConfig& c) {
    ConfigValues v;
    v["steps"] = std::to_string(c.steps);
    v["xi"] = render_double(c.xi);
    v["eta_th"] = render_double(c.eta_th);
    v["tau1"] = std::to_string(c.tau1);
    v["tau2"] = std::to_string(c.tau2);
    v["cfg_scale"] = render_double(c.cfg_scale);
    v["seed"] = c.seed ? std::to_string(*c.seed) : "";
    v["denoiser"] = c.denoiser;
    v["mode"] = to_string(c.mode);
    v["src_prompt"] = c.src_prompt;
    v["tgt_prompt"] = c.tgt_prompt;
    v["self_layers"] = std::to_string(c.self_layers.first) + "-" + std::to_string(c.self_layers.last);
    std::vector<std::string> dims;
    for (auto d : c.latent_shape) {
        dims.push_back(std::to_string(d));
    }
    v["latent_shape"] = join(dims, "x");
    v["input"] = c.input;
    v["trajectory"] = c.trajectory;
    v["out"] = c.out;
    v["eval_fixture"] = c.eval_fixture;
    v["metrics"] = join(c.metrics, ",");
    std::vector<std::string> fmr;
    for (double f : c.fmr_targets) {
        fmr.push_back(render_double(f));
    }
    v["fmr_targets"] = join(fmr, ",");
    v["record_timing"] = c.record_timing ? "true" : "false";
    v["workers"] = std::to_string(c.workers);
    return v;
}

void validate(const RunConfig& c) {
    if (!c.seed) {
        throw ValidationError("config field seed is mandatory");
    }
    if (c.steps < 1 || c.steps > 1000) {
        throw ValidationError("config field steps must lie in [1, 1000], got " + std::to_string(c.steps));
    }
    if (c.tau2 > c.tau1) {
        throw ValidationError("config fields tau2 (" + std::to_string(c.tau2) + ") and tau1 (" +
                              std::to_string(c.tau1) + "): tau2 must not exceed tau1");
    }
    if (c.tau2 < 1) {
        throw ValidationError("config field tau2 must be >= 1");
    }
    if (c.tau1 > c.steps) {
        throw ValidationError("config fields tau1 (" + std::to_string(c.tau1) + ") and steps (" +
                              std::to_string(c.steps) + "): tau1 must not exceed steps");
    }
    if (c.xi < 0.0) {
        throw ValidationError("config field xi must be >= 0");
    }
    if (c.eta_th < 0.0) {
        throw ValidationError("config field eta_th must be >= 0");
    }
    if (c.cfg_scale < 0.0) {
        throw ValidationError("config field cfg_scale must be >= 0");
    }
    if (c.self_layers.first < 1 || c.self_layers.first > c.self_layers.last) {
        throw ValidationError("config field self_layers must be a non-empty range of layers >= 1");
    }
    if (shape_size(c.latent_shape) == 0 || c.latent_shape.size() > 2) {
        throw ValidationError("config field latent_shape must be [P] or [P, C] with non-zero dims");
    }
    if (c.workers < 1) {
        throw ValidationError("config field workers must be >= 1");
    }
    for (double f : c.fmr_targets) {
        if (f < 0.0 || f > 1.0) {
            throw ValidationError("config field fmr_targets: " + render_double(f) + " outside [0, 1]");
        }
    }
    validate(angular_config(c));
    validate(aac_config(c));
}

AngularConfig angular_config(const RunConfig& c) {
    AngularConfig a;
    a.xi = c.xi;
    a.guidance.scale = c.cfg_scale;
    a.steps = c.steps;
    return a;
}

AacConfig aac_config(const RunConfig& c) {
    AacConfig a;
    a.tau1 = c.tau1;
    a.tau2 = c.tau2;
    a.eta_th = c.eta_th;
    a.self_layers = c.self_layers;
    a.steps = c.steps;
    a.guidance.scale = c.cfg_scale;
    return a;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const RunConfig& config) {
    const auto values = config_to_values(config);
    std::vector<std::string> keys;
    for (const auto& k : config_keys()) {
        if (k != "trajectory" && k != "out" && k != "record_timing" && k != "workers") {
            keys.push_back(k);
        }
    }
    return hash_of(values, keys);
}

std::string inversion_hash(const RunConfig& config) {
    return hash_of(config_to_values(config), {"denoiser", "input", "latent_shape", "seed", "src_prompt", "steps"});
}

}  // namespace reage
