// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/http_client.hpp"

#include <httplib.h>

#include "reage/errors.hpp"

namespace reage {

nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const HttpOptions& options) {
    if (base_url.rfind("http://", 0) != 0) {
        throw ValidationError("only plain http:// endpoints are supported, got '" + base_url + "'");
    }
    httplib::Client client(base_url);
    const auto timeout = std::chrono::duration<double>(options.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    std::string last_error = "no attempt made";
    const int attempts = std::max(1, options.retries + 1);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw IoError(base_url + path + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(base_url + path + " returned malformed JSON: " + e.what());
        }
    }
    throw IoError(base_url + path + " failed after " + std::to_string(attempts) + " attempt(s): " + last_error);
}

}  // namespace reage
