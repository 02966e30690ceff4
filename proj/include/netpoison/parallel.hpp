// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "netpoison/errors.hpp"

namespace netpoison {

// Runs fn(index, worker) for index in [0, count) across `workers` threads.
// Indices are handed out through an atomic counter in fixed-size strides, so
// the assignment of index to worker varies between runs; callers that need
// determinism must make per-index results independent of the worker id and
// write them to disjoint slots, which every scorer in this library does.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers < 1) throw ValidationError("worker count must be >= 1");
  if (count == 0) return;
  const int used = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  if (used == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  const std::size_t stride = std::max<std::size_t>(1, count / (16u * used));
  auto body = [&](int worker) {
    for (;;) {
      const std::size_t begin = next.fetch_add(stride);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + stride);
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lk(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(used));
  for (int t = 0; t < used; ++t) pool.emplace_back(body, t);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace netpoison
