// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace reage {

struct HttpOptions {
    double timeout_seconds = 10.0;
    int retries = 2;
};

/// POST a JSON body to base_url + path ("http://host:port" only) and parse the JSON reply.
/// Retries transport failures and 5xx replies; throws IoError once attempts run out.
nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const HttpOptions& options);

}  // namespace reage
