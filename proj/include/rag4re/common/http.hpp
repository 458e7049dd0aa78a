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

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace rag4re {

struct HttpEndpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

HttpEndpoint parse_endpoint(std::string_view url);

struct HttpOptions {
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
    std::map<std::string, std::string> headers;
};

// POSTs a JSON body and returns the response body. Transport failures, 429 and 5xx raise a
// retryable BackendError; other non-2xx statuses raise a non-retryable one.
std::string http_post_json(const HttpEndpoint& endpoint, const std::string& body, const HttpOptions& options);

// Returns {"Authorization": "Bearer <value>"} when `env_var` is set and non-empty, else nothing.
std::map<std::string, std::string> bearer_from_env(const std::string& env_var);

}  // namespace rag4re
