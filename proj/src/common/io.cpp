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

#include "rag4re/common/io.hpp"

#include <sstream>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"

namespace rag4re {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file for reading: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open file for writing: " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string file_sha256_hex(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file for reading: " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    for (; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(path.string() + ": malformed JSON line: " + e.what(), static_cast<std::int64_t>(lineno));
        }
        fn(record, lineno);
    }
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, Mode mode) : path_(path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto flags = std::ios::binary | (mode == Mode::kAppend ? std::ios::app : std::ios::trunc);
    out_.open(path, flags);
    if (!out_) {
        throw IoError("cannot open file for writing: " + path.string());
    }
}

void JsonlWriter::write(const OrderedJson& record) { write_line(record.dump()); }

void JsonlWriter::write(const Json& record) { write_line(record.dump()); }

void JsonlWriter::write_line(const std::string& line) {
    std::lock_guard lock(mu_);
    out_ << line << '\n';
    out_.flush();
    if (!out_) {
        throw IoError("write failed: " + path_.string());
    }
}

}  // namespace rag4re
