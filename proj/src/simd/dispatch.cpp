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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "rag4re/simd/dot.hpp"

namespace rag4re::simd {

namespace {

using DotFn = double (*)(const float*, const float*, std::size_t) noexcept;
using RowsFn = void (*)(const float*, const float*, std::size_t, std::size_t, double*) noexcept;

struct KernelTable {
    Isa isa;
    DotFn dot;
    RowsFn rows;
};

constexpr KernelTable kScalar{Isa::kScalar, &kernels::dot_scalar, &kernels::dot_rows_scalar};
#if defined(RAG4RE_HAVE_AVX2_KERNEL)
constexpr KernelTable kAvx2{Isa::kAvx2, &kernels::dot_avx2, &kernels::dot_rows_avx2};
#endif
#if defined(RAG4RE_HAVE_NEON_KERNEL)
constexpr KernelTable kNeon{Isa::kNeon, &kernels::dot_neon, &kernels::dot_rows_neon};
#endif

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::kScalar: return &kScalar;
        case Isa::kAvx2:
#if defined(RAG4RE_HAVE_AVX2_KERNEL)
            if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
            return nullptr;
        case Isa::kNeon:
#if defined(RAG4RE_HAVE_NEON_KERNEL)
            return &kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* initial_table() noexcept {
    if (const char* env = std::getenv("RAG4RE_SIMD")) {
        std::string want(env);
        for (auto isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
            if (want == to_string(isa)) {
                if (const auto* t = table_for(isa)) return t;
            }
        }
    }
    for (auto isa : {Isa::kAvx2, Isa::kNeon}) {
        if (const auto* t = table_for(isa)) return t;
    }
    return &kScalar;
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::kScalar: return "scalar";
        case Isa::kAvx2: return "avx2";
        case Isa::kNeon: return "neon";
    }
    return "scalar";
}

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed)->isa; }

void set_isa(Isa isa) {
    const auto* t = table_for(isa);
    if (t == nullptr) {
        throw std::invalid_argument("SIMD kernel not available: " + std::string(to_string(isa)));
    }
    active().store(t, std::memory_order_relaxed);
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
    return active().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void dot_rows(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<double> out) noexcept {
    active().load(std::memory_order_relaxed)->rows(query.data(), rows.data(), out.size(), dim, out.data());
}

}  // namespace rag4re::simd
