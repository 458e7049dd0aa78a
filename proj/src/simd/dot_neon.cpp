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

#include <arm_neon.h>

#include "rag4re/simd/dot.hpp"

namespace rag4re::simd::kernels {

namespace {

inline double dot8(const float* a, const float* b, std::size_t n) noexcept {
    // Lanes: p0 = (s0,s1), p1 = (s2,s3), p2 = (s4,s5), p3 = (s6,s7).
    float64x2_t p0 = vdupq_n_f64(0.0);
    float64x2_t p1 = vdupq_n_f64(0.0);
    float64x2_t p2 = vdupq_n_f64(0.0);
    float64x2_t p3 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const float32x4_t a0 = vld1q_f32(a + i);
        const float32x4_t a1 = vld1q_f32(a + i + 4);
        const float32x4_t b0 = vld1q_f32(b + i);
        const float32x4_t b1 = vld1q_f32(b + i + 4);
        p0 = vfmaq_f64(p0, vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0)));
        p1 = vfmaq_f64(p1, vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0));
        p2 = vfmaq_f64(p2, vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1)));
        p3 = vfmaq_f64(p3, vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1));
    }
    // (t0,t1) = p0+p2, (t2,t3) = p1+p3, (u0,u1) = (t0+t2, t1+t3)
    const float64x2_t u = vaddq_f64(vaddq_f64(p0, p2), vaddq_f64(p1, p3));
    double r = vgetq_lane_f64(u, 0) + vgetq_lane_f64(u, 1);
    for (; i < n; ++i) {
        r += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return r;
}

}  // namespace

double dot_neon(const float* a, const float* b, std::size_t n) noexcept { return dot8(a, b, n); }

void dot_rows_neon(const float* query, const float* rows, std::size_t count, std::size_t dim, double* out) noexcept {
    for (std::size_t r = 0; r < count; ++r) {
        out[r] = dot8(query, rows + r * dim, dim);
    }
}

}  // namespace rag4re::simd::kernels
