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

// Compiled with -mavx2 -mfma. Only reached when the CPU reports AVX2 and FMA.
#include <immintrin.h>

#include "rag4re/simd/dot.hpp"

namespace rag4re::simd::kernels {

namespace {

inline double dot8(const float* a, const float* b, std::size_t n) noexcept {
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        const __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        const __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        const __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        acc_lo = _mm256_fmadd_pd(a_lo, b_lo, acc_lo);
        acc_hi = _mm256_fmadd_pd(a_hi, b_hi, acc_hi);
    }
    // t = (s0+s4, s1+s5, s2+s6, s3+s7); u = (t0+t2, t1+t3)
    const __m256d t = _mm256_add_pd(acc_lo, acc_hi);
    const __m128d u = _mm_add_pd(_mm256_castpd256_pd128(t), _mm256_extractf128_pd(t, 1));
    double r = _mm_cvtsd_f64(u) + _mm_cvtsd_f64(_mm_unpackhi_pd(u, u));
    for (; i < n; ++i) {
        r += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return r;
}

}  // namespace

double dot_avx2(const float* a, const float* b, std::size_t n) noexcept { return dot8(a, b, n); }

void dot_rows_avx2(const float* query, const float* rows, std::size_t count, std::size_t dim, double* out) noexcept {
    for (std::size_t r = 0; r < count; ++r) {
        out[r] = dot8(query, rows + r * dim, dim);
    }
}

}  // namespace rag4re::simd::kernels
