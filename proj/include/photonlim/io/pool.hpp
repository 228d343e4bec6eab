/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace photonlim::io {

template <class R> struct JobResult {
  std::optional<R> value;
  std::string error; ///< empty on success
  bool ok() const noexcept { return value.has_value(); }
};

/// Runs job(0..n-1) on up to `workers` threads. Results keep input order and
/// a throwing job only fails its own slot.
template <class R>
std::vector<JobResult<R>> run_jobs(std::size_t n, std::size_t workers, const std::function<R(std::size_t)> &job) {
  std::vector<JobResult<R>> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i].value.emplace(job(i));
      } catch (const std::exception &e) {
        out[i].error = e.what();
      } catch (...) {
        out[i].error = "unknown error";
      }
    }
  };
  const std::size_t w = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (w == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t k = 0; k < w; ++k) threads.emplace_back(worker);
  for (auto &t : threads) t.join();
  return out;
}

} // namespace photonlim::io
