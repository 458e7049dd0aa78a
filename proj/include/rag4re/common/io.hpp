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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"

namespace rag4re {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path);

// Writes through a sibling temp file and renames, so readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string file_sha256_hex(const std::filesystem::path& path);

// Calls `fn(record, line_number)` for every non-blank line; line numbers are 0-based.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t)>& fn);

// Append-only JSON-lines writer. Each line is flushed as soon as it is written.
class JsonlWriter {
 public:
    enum class Mode { kTruncate, kAppend };

    JsonlWriter(const std::filesystem::path& path, Mode mode);
    void write(const OrderedJson& record);
    void write(const Json& record);
    const std::filesystem::path& path() const noexcept { return path_; }

 private:
    void write_line(const std::string& line);

    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mu_;
};

}  // namespace rag4re
