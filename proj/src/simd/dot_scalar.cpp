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

#include "rag4re/simd/dot.hpp"

namespace rag4re::simd::kernels {

double dot_scalar(const float* a, const float* b, std::size_t n) noexcept {
    double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t j = 0; j < 8; ++j) {
            s[j] += static_cast<double>(a[i + j]) * static_cast<double>(b[i + j]);
        }
    }
    const double t0 = s[0] + s[4];
    const double t1 = s[1] + s[5];
    const double t2 = s[2] + s[6];
    const double t3 = s[3] + s[7];
    double r = (t0 + t2) + (t1 + t3);
    for (; i < n; ++i) {
        r += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return r;
}

void dot_rows_scalar(const float* query, const float* rows, std::size_t count, std::size_t dim,
                     double* out) noexcept {
    for (std::size_t r = 0; r < count; ++r) {
        out[r] = dot_scalar(query, rows + r * dim, dim);
    }
}

}  // namespace rag4re::simd::kernels
