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

#include "core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace msd {
namespace {

thread_local bool t_inside_pool = false;
std::atomic<int> g_default_threads{0};

int ResolveThreads(int n) {
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

// Each Run publishes its own Job; slot state lives inside it so a worker
// that wakes up late drains a stale, already-exhausted job harmlessly
// instead of touching the next run's slots.
struct ThreadPool::Impl {
  struct Job {
    const std::function<void(int)>* fn = nullptr;
    std::atomic<int> next_slot{0};
    int slot_count = 0;
    int pending = 0;  // guarded by the pool mutex
    std::exception_ptr first_error;
  };

  std::vector<std::thread> workers;
  std::mutex mutex;
  std::condition_variable work_cv;
  std::condition_variable done_cv;
  std::shared_ptr<Job> job;
  std::uint64_t generation = 0;
  bool stop = false;

  void WorkerLoop() {
    t_inside_pool = true;
    std::uint64_t seen = 0;
    for (;;) {
      std::shared_ptr<Job> current;
      {
        std::unique_lock lock(mutex);
        work_cv.wait(lock, [&] { return stop || generation != seen; });
        if (stop) return;
        seen = generation;
        current = job;
      }
      if (current) Drain(*current);
    }
  }

  void Drain(Job& j) {
    for (;;) {
      const int slot = j.next_slot.fetch_add(1);
      if (slot >= j.slot_count) break;
      try {
        (*j.fn)(slot);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!j.first_error) j.first_error = std::current_exception();
      }
      std::lock_guard lock(mutex);
      if (--j.pending == 0) done_cv.notify_all();
    }
  }
};

ThreadPool::ThreadPool(int n_threads) : impl_(new Impl) {
  const int n = ResolveThreads(n_threads);
  for (int i = 1; i < n; ++i)
    impl_->workers.emplace_back([this] { impl_->WorkerLoop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stop = true;
  }
  impl_->work_cv.notify_all();
  for (auto& worker : impl_->workers) worker.join();
  delete impl_;
}

int ThreadPool::thread_count() const {
  return static_cast<int>(impl_->workers.size()) + 1;
}

void ThreadPool::Run(int n_slots, const std::function<void(int)>& fn) {
  if (n_slots <= 0) return;
  if (t_inside_pool || impl_->workers.empty()) {
    for (int slot = 0; slot < n_slots; ++slot) fn(slot);
    return;
  }
  auto job = std::make_shared<Impl::Job>();
  job->fn = &fn;
  job->slot_count = n_slots;
  job->pending = n_slots;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->job = job;
    ++impl_->generation;
  }
  impl_->work_cv.notify_all();
  impl_->Drain(*job);
  std::unique_lock lock(impl_->mutex);
  impl_->done_cv.wait(lock, [&] { return job->pending == 0; });
  if (job->first_error) std::rethrow_exception(job->first_error);
}

ThreadPool& ThreadPool::Global() {
  static ThreadPool pool(g_default_threads.load());
  return pool;
}

void ThreadPool::SetDefaultThreads(int n) { g_default_threads.store(n); }

void ParallelFor(
    ThreadPool& pool, std::int64_t n,
    const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const std::int64_t chunk = (n + kParallelSlots - 1) / kParallelSlots;
  pool.Run(kParallelSlots, [&](int slot) {
    const std::int64_t begin = slot * chunk;
    const std::int64_t end = std::min<std::int64_t>(n, begin + chunk);
    if (begin < end) fn(slot, begin, end);
  });
}

}  // namespace msd
