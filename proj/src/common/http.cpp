// Copyright (C) 2026 The rag4re Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include "rag4re/common/http.hpp"

#include <cstdlib>

#include "httplib.h"
#include "rag4re/common/error.hpp"

namespace rag4re {

HttpEndpoint parse_endpoint(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw ValidationError("endpoint URL must start with http:// or https://: " + std::string(url));
    }
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ValidationError("unsupported endpoint scheme: " + std::string(url));
    }
    auto path_begin = url.find('/', scheme_end + 3);
    HttpEndpoint ep;
    if (path_begin == std::string_view::npos) {
        ep.origin = std::string(url);
        ep.path = "/";
    } else {
        ep.origin = std::string(url.substr(0, path_begin));
        ep.path = std::string(url.substr(path_begin));
    }
    if (ep.origin.size() == static_cast<std::size_t>(scheme_end) + 3) {
        throw ValidationError("endpoint URL has no host: " + std::string(url));
    }
    return ep;
}

std::string http_post_json(const HttpEndpoint& endpoint, const std::string& body, const HttpOptions& options) {
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(options.connect_timeout);
    client.set_read_timeout(options.read_timeout);
    client.set_write_timeout(options.read_timeout);
    httplib::Headers headers;
    for (const auto& [k, v] : options.headers) {
        headers.emplace(k, v);
    }
    auto res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
        throw BackendError("POST " + endpoint.origin + endpoint.path + " failed: " + httplib::to_string(res.error()), 1,
                           true);
    }
    if (res->status < 200 || res->status >= 300) {
        bool retryable = res->status == 429 || res->status >= 500;
        throw BackendError("POST " + endpoint.origin + endpoint.path + " returned HTTP " + std::to_string(res->status),
                           1, retryable);
    }
    return res->body;
}

std::map<std::string, std::string> bearer_from_env(const std::string& env_var) {
    std::map<std::string, std::string> out;
    if (env_var.empty()) {
        return out;
    }
    if (const char* v = std::getenv(env_var.c_str()); v != nullptr && *v != '\0') {
        out.emplace("Authorization", std::string("Bearer ") + v);
    }
    return out;
}

}  // namespace rag4re
