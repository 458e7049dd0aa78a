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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rag4re {

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
    std::span<const float> span() const noexcept { return values; }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Euclidean norm, accumulated in double.
double norm(std::span<const float> v) noexcept;

// dot(a,b) / (|a| |b|), clamped to [-1, 1]. Throws ValidationError on dimension mismatch or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.span(), b.span()); }

struct RetrievalHit {
    std::string instance_id;
    double score = 0.0;
    std::size_t rank = 0;         // 1-based
    std::size_t entry_index = 0;  // position in the DB

    friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct DbEntry {
    std::string instance_id;
    std::string surface_text;
    std::string gold_label;  // empty when the instance had none

    friend bool operator==(const DbEntry&, const DbEntry&) = default;
};

// Exact-search embedding store. Vectors live in one row-major float buffer with per-row norms
// cached at insert time.
class EmbeddingDB {
 public:
    // Returns true for entries that must not be returned.
    using Exclusion = std::function<bool(std::size_t entry_index)>;

    EmbeddingDB(std::string model_id, std::size_t dim, std::string inventory_digest);

    // Rejects duplicate ids, dimension mismatch and all-zero vectors.
    void add(DbEntry entry, std::span<const float> vector);

    const std::string& model_id() const noexcept { return model_id_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& inventory_digest() const noexcept { return inventory_digest_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    const DbEntry& entry(std::size_t i) const { return entries_.at(i); }
    std::span<const float> vector(std::size_t i) const;
    std::optional<std::size_t> index_of(std::string_view instance_id) const;

    // Exact top-k by cosine: score descending, ties by ascending entry index. When `excluded` is
    // set and fewer than k entries survive it, the result is shorter than k.
    std::vector<RetrievalHit> top_k(std::span<const float> query, std::size_t k,
                                    const Exclusion& excluded = {}) const;
    std::vector<RetrievalHit> top_k(const EmbeddingVector& query, std::size_t k,
                                    const Exclusion& excluded = {}) const {
        return top_k(query.span(), k, excluded);
    }

    friend bool operator==(const EmbeddingDB& a, const EmbeddingDB& b) {
        return a.model_id_ == b.model_id_ && a.dim_ == b.dim_ && a.inventory_digest_ == b.inventory_digest_ &&
               a.entries_ == b.entries_ && a.data_ == b.data_;
    }

 private:
    std::string model_id_;
    std::size_t dim_;
    std::string inventory_digest_;
    std::vector<DbEntry> entries_;
    std::vector<float> data_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> ids_;
};

inline constexpr std::string_view kDbMagic = "RAGREDB1";

// Binary layout: magic, u32 LE header length, JSON header {model_id, dim, count, inventory_digest},
// `count` records (u32 id len, id, u32 text len, text, u32 label len, label, dim LE f32), then the
// SHA-256 of everything before it.
std::string serialize_db(const EmbeddingDB& db);
EmbeddingDB parse_db(std::string_view bytes);

// Returns the hex digest stored in the file trailer.
std::string save_db(const EmbeddingDB& db, const std::filesystem::path& path);
EmbeddingDB load_db(const std::filesystem::path& path);
// Hex of the trailer digest of an existing DB file, without parsing the records.
std::string db_file_checksum(const std::filesystem::path& path);

}  // namespace rag4re
