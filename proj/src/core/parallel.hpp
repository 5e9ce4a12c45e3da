// Copyright 2026 The MSD Authors.
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

#ifndef MSD_CORE_PARALLEL_HPP_
#define MSD_CORE_PARALLEL_HPP_

#include <cstdint>
#include <functional>

namespace msd {

// Work is always split into kParallelSlots fixed ranges, no matter how many
// worker threads exist. Per-slot partial results reduced in slot order are
// therefore identical for any thread count, which keeps training checkpoints
// reproducible across --threads settings.
inline constexpr int kParallelSlots = 16;

class ThreadPool {
 public:
  explicit ThreadPool(int n_threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int thread_count() const;

  // Runs fn(slot) for every slot in [0, n_slots); blocks until all finish.
  // The calling thread participates. Reentrant calls from a worker run inline.
  void Run(int n_slots, const std::function<void(int)>& fn);

  // Shared pool sized by SetDefaultThreads (0 = hardware concurrency).
  static ThreadPool& Global();
  static void SetDefaultThreads(int n);

 private:
  struct Impl;
  Impl* impl_;
};

// Splits [0, n) into kParallelSlots contiguous ranges and runs
// fn(slot, begin, end) for the non-empty ones.
void ParallelFor(ThreadPool& pool, std::int64_t n,
                 const std::function<void(int, std::int64_t, std::int64_t)>& fn);

}  // namespace msd

#endif  // MSD_CORE_PARALLEL_HPP_
