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
#include <span>
#include <string_view>

namespace rag4re::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa) noexcept;

// Float inputs, double accumulation. Every kernel uses the same summation order: eight
// interleaved partial sums (lane j takes elements i with i % 8 == j), folded as
// ((s0+s4)+(s2+s6)) + ((s1+s5)+(s3+s7)), then the n % 8 tail added in order. A float*float
// product is exact in double, so fused and unfused multiply-add agree and all ISAs return
// bit-identical results.
namespace kernels {

double dot_scalar(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows_scalar(const float* query, const float* rows, std::size_t count, std::size_t dim,
                     double* out) noexcept;

#if defined(RAG4RE_HAVE_AVX2_KERNEL)
double dot_avx2(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows_avx2(const float* query, const float* rows, std::size_t count, std::size_t dim, double* out) noexcept;
#endif

#if defined(RAG4RE_HAVE_NEON_KERNEL)
double dot_neon(const float* a, const float* b, std::size_t n) noexcept;
void dot_rows_neon(const float* query, const float* rows, std::size_t count, std::size_t dim, double* out) noexcept;
#endif

}  // namespace kernels

bool isa_available(Isa isa) noexcept;

// Best available ISA, unless overridden by RAG4RE_SIMD=scalar|avx2|neon or set_isa().
Isa active_isa() noexcept;

// Throws std::invalid_argument if `isa` is not available on this machine/build.
void set_isa(Isa isa);

// Requires a.size() == b.size(); callers check.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

// out[r] = dot(query, rows[r*dim .. r*dim+dim)) for r in [0, count).
void dot_rows(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<double> out) noexcept;

}  // namespace rag4re::simd
