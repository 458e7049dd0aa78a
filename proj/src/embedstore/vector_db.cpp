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

#include "rag4re/embedstore/vector_db.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <queue>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"
#include "rag4re/common/io.hpp"
#include "rag4re/simd/dot.hpp"

namespace rag4re {

double norm(std::span<const float> v) noexcept { return std::sqrt(simd::dot(v, v)); }

namespace {

double clamp_unit(double x) noexcept { return std::clamp(x, -1.0, 1.0); }

constexpr std::size_t kScanBlock = 512;

}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("cosine: zero-norm vector");
    }
    return clamp_unit(simd::dot(a, b) / (na * nb));
}

EmbeddingDB::EmbeddingDB(std::string model_id, std::size_t dim, std::string inventory_digest)
    : model_id_(std::move(model_id)), dim_(dim), inventory_digest_(std::move(inventory_digest)) {
    if (dim_ == 0) {
        throw ValidationError("embedding DB: dimension must be positive");
    }
}

void EmbeddingDB::add(DbEntry entry, std::span<const float> vector) {
    if (vector.size() != dim_) {
        throw ValidationError("embedding DB: vector for '" + entry.instance_id + "' has dimension " +
                              std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
    }
    const double n = norm(vector);
    if (n == 0.0 || !std::isfinite(n)) {
        throw ValidationError("embedding DB: vector for '" + entry.instance_id + "' is all-zero or non-finite");
    }
    if (!ids_.emplace(entry.instance_id, entries_.size()).second) {
        throw ValidationError("embedding DB: duplicate instance id '" + entry.instance_id + "'");
    }
    entries_.push_back(std::move(entry));
    data_.insert(data_.end(), vector.begin(), vector.end());
    norms_.push_back(n);
}

std::span<const float> EmbeddingDB::vector(std::size_t i) const {
    if (i >= entries_.size()) {
        throw std::out_of_range("embedding DB: entry index out of range");
    }
    return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::optional<std::size_t> EmbeddingDB::index_of(std::string_view instance_id) const {
    auto it = ids_.find(std::string(instance_id));
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<RetrievalHit> EmbeddingDB::top_k(std::span<const float> query, std::size_t k,
                                             const Exclusion& excluded) const {
    if (entries_.empty()) {
        throw ValidationError("top_k: embedding DB is empty");
    }
    if (query.size() != dim_) {
        throw ValidationError("top_k: query dimension " + std::to_string(query.size()) + " does not match DB dimension " +
                              std::to_string(dim_));
    }
    if (k == 0 || k > entries_.size()) {
        throw ValidationError("top_k: k must be in [1, " + std::to_string(entries_.size()) + "], got " +
                              std::to_string(k));
    }
    const double qn = norm(query);
    if (qn == 0.0 || !std::isfinite(qn)) {
        throw ValidationError("top_k: query vector is all-zero or non-finite");
    }

    struct Candidate {
        double score;
        std::size_t index;
    };
    // Heap top is the worst kept candidate: lowest score, then highest index.
    auto worse = [](const Candidate& a, const Candidate& b) {
        return a.score > b.score || (a.score == b.score && a.index < b.index);
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);

    std::vector<double> block(kScanBlock);
    const std::span<const float> all(data_);
    for (std::size_t base = 0; base < entries_.size(); base += kScanBlock) {
        const std::size_t count = std::min(kScanBlock, entries_.size() - base);
        simd::dot_rows(query, all.subspan(base * dim_, count * dim_), dim_, std::span<double>(block.data(), count));
        for (std::size_t r = 0; r < count; ++r) {
            const std::size_t idx = base + r;
            if (excluded && excluded(idx)) {
                continue;
            }
            const Candidate c{clamp_unit(block[r] / (qn * norms_[idx])), idx};
            if (heap.size() < k) {
                heap.push(c);
            } else if (c.score > heap.top().score) {
                // Scan order is ascending index, so an equal score never displaces a kept entry.
                heap.pop();
                heap.push(c);
            }
        }
    }

    std::vector<RetrievalHit> hits(heap.size());
    for (std::size_t i = hits.size(); i-- > 0;) {
        const auto& c = heap.top();
        hits[i] = RetrievalHit{entries_[c.index].instance_id, c.score, i + 1, c.index};
        heap.pop();
    }
    return hits;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_bytes(std::string& out, std::string_view s) {
    if (s.size() > 0xFFFFFFFFu) {
        throw ValidationError("embedding DB: field too long to serialize");
    }
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
 public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view take(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(std::string("embedding DB: truncated file while reading ") + what + "; byte offset",
                             static_cast<std::int64_t>(pos_));
        }
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint32_t u32(const char* what) {
        auto s = take(4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<std::uint8_t>(s[static_cast<std::size_t>(i)]);
        }
        return v;
    }

    std::string_view sized(const char* what) { return take(u32(what), what); }

    std::size_t pos() const noexcept { return pos_; }

 private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_db(const EmbeddingDB& db) {
    OrderedJson header;
    header["model_id"] = db.model_id();
    header["dim"] = db.dim();
    header["count"] = db.size();
    header["inventory_digest"] = db.inventory_digest();
    const auto header_text = header.dump();

    std::string out;
    out.reserve(64 + header_text.size() + db.size() * (db.dim() * 4 + 64));
    out.append(kDbMagic);
    put_bytes(out, header_text);
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto& e = db.entry(i);
        put_bytes(out, e.instance_id);
        put_bytes(out, e.surface_text);
        put_bytes(out, e.gold_label);
        for (float f : db.vector(i)) {
            put_u32(out, std::bit_cast<std::uint32_t>(f));
        }
    }
    const auto digest = sha256(out);
    out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
    return out;
}

EmbeddingDB parse_db(std::string_view bytes) {
    Reader r(bytes);
    const auto magic = r.take(kDbMagic.size(), "magic");
    if (magic != kDbMagic) {
        if (magic.substr(0, 7) == kDbMagic.substr(0, 7)) {
            throw ValidationError("embedding DB: unsupported format version '" + std::string(magic.substr(7)) +
                                  "' (expected '" + std::string(kDbMagic.substr(7)) + "')");
        }
        throw ValidationError("embedding DB: bad magic header, not an embedding DB file (version unknown)");
    }
    Json header;
    try {
        header = Json::parse(r.sized("header"));
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("embedding DB: malformed header JSON: ") + e.what(), 12);
    }
    std::size_t dim = 0, count = 0;
    std::string model_id, inventory_digest;
    try {
        model_id = header.at("model_id").get<std::string>();
        dim = header.at("dim").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
        inventory_digest = header.at("inventory_digest").get<std::string>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("embedding DB: header missing fields: ") + e.what());
    }
    EmbeddingDB db(std::move(model_id), dim, std::move(inventory_digest));
    std::vector<float> vec(dim);
    for (std::size_t i = 0; i < count; ++i) {
        DbEntry e;
        e.instance_id = std::string(r.sized("record id"));
        e.surface_text = std::string(r.sized("record text"));
        e.gold_label = std::string(r.sized("record label"));
        for (std::size_t d = 0; d < dim; ++d) {
            vec[d] = std::bit_cast<float>(r.u32("vector"));
        }
        db.add(std::move(e), vec);
    }
    const std::size_t body_end = r.pos();
    const auto stored = r.take(32, "trailer digest");
    if (r.pos() != bytes.size()) {
        throw ParseError("embedding DB: trailing bytes after digest; byte offset", static_cast<std::int64_t>(r.pos()));
    }
    const auto actual = sha256(bytes.substr(0, body_end));
    if (std::memcmp(actual.data(), stored.data(), actual.size()) != 0) {
        throw ValidationError("embedding DB: checksum mismatch, file is corrupt");
    }
    return db;
}

std::string save_db(const EmbeddingDB& db, const std::filesystem::path& path) {
    const auto bytes = serialize_db(db);
    write_file_atomic(path, bytes);
    Digest d{};
    std::memcpy(d.data(), bytes.data() + bytes.size() - d.size(), d.size());
    return to_hex(d);
}

EmbeddingDB load_db(const std::filesystem::path& path) { return parse_db(read_file(path)); }

std::string db_file_checksum(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < kDbMagic.size() + 32) {
        throw ParseError("embedding DB: truncated file; byte offset", static_cast<std::int64_t>(bytes.size()));
    }
    Digest d{};
    std::memcpy(d.data(), bytes.data() + bytes.size() - d.size(), d.size());
    return to_hex(d);
}

}  // namespace rag4re
