// Copyright 2026 The DummyNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dummynet {

/// Runs f(0..n-1) on up to `workers` threads (strided). Results must not
/// depend on scheduling; the first exception is rethrown after joining.
inline void parallel_for(int n, int workers, const std::function<void(int)>& f) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  const int w = std::min(workers, n);
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> threads;
  for (int t = 0; t < w; ++t)
    threads.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += w) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!error) error = std::current_exception();
      }
    });
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dummynet
