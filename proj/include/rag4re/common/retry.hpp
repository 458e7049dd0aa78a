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

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <type_traits>

#include "rag4re/common/error.hpp"

namespace rag4re {

// Exponential backoff: attempt n (0-based) waits base_backoff * multiplier^(n-1) before retrying.
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_backoff{200};
    double multiplier = 2.0;
};

// Runs `fn` until it succeeds, a non-retryable BackendError escapes, or retries run out. The
// final error carries the total attempt count. `stop` is polled before every attempt.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn, const std::atomic<bool>* stop = nullptr)
    -> std::invoke_result_t<Fn&> {
    auto delay = policy.base_backoff;
    for (int attempt = 1;; ++attempt) {
        if (stop != nullptr && stop->load()) {
            throw InterruptedError("interrupted before backend call");
        }
        try {
            return fn();
        } catch (const EmptyResponseError&) {
            throw;
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt > policy.max_retries) {
                throw BackendError(std::string(e.what()) + " after " + std::to_string(attempt) + " attempt(s)",
                                   attempt, e.retryable());
            }
        }
        std::this_thread::sleep_for(delay);
        delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * policy.multiplier));
    }
}

}  // namespace rag4re
