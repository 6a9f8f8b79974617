// Copyright 2026 The crossview Authors.
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

#include "xv/core/parallel.hpp"

#include <algorithm>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace xv {
namespace {

// Minimal persistent pool with static partitioning: job k hands slice i of
// [begin,end) to thread i, every thread checks in exactly once per job, and
// the caller waits for all of them. The partition is a pure function of
// (range, nthreads), so output placement is reproducible.
class Pool {
 public:
  explicit Pool(int n) : nthreads_(n), done_count_(0) {
    for (int i = 1; i < n; ++i) {
      workers_.emplace_back([this, i] { worker_loop(i); });
    }
  }

  ~Pool() {
    {
      std::unique_lock<std::mutex> lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  int nthreads() const { return nthreads_; }

  void run(int64_t begin, int64_t end,
           const std::function<void(int64_t, int64_t)>& fn) {
    {
      std::unique_lock<std::mutex> lk(mu_);
      fn_ = &fn;
      begin_ = begin;
      end_ = end;
      done_count_ = 1;  // the calling thread's own slice
      ++job_id_;
    }
    cv_.notify_all();
    run_slice(fn, begin, end, 0);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return done_count_ == nthreads_; });
    fn_ = nullptr;
  }

 private:
  void run_slice(const std::function<void(int64_t, int64_t)>& fn,
                 int64_t begin, int64_t end, int slice) const {
    const int64_t range = end - begin;
    const int64_t chunk = (range + nthreads_ - 1) / nthreads_;
    const int64_t b = begin + slice * chunk;
    const int64_t e = std::min(end, b + chunk);
    if (b < e) fn(b, e);
  }

  void worker_loop(int slice) {
    uint64_t seen = 0;
    for (;;) {
      const std::function<void(int64_t, int64_t)>* fn;
      int64_t b, e;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return stop_ || job_id_ != seen; });
        if (stop_) return;
        seen = job_id_;
        fn = fn_;
        b = begin_;
        e = end_;
      }
      if (fn != nullptr) run_slice(*fn, b, e, slice);
      {
        std::unique_lock<std::mutex> lk(mu_);
        if (++done_count_ == nthreads_) done_cv_.notify_all();
      }
    }
  }

  const int nthreads_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  bool stop_ = false;
  uint64_t job_id_ = 0;
  const std::function<void(int64_t, int64_t)>* fn_ = nullptr;
  int64_t begin_ = 0, end_ = 0;
  int done_count_;
};

int g_nthreads = []() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}();

Pool* pool() {
  static Pool p(g_nthreads);
  return &p;
}

}  // namespace

int num_threads() { return g_nthreads; }

void set_num_threads(int n) {
  if (n >= 1) g_nthreads = n;  // takes effect before the pool's first use
}

void parallel_for(int64_t begin, int64_t end, int64_t min_chunk,
                  const std::function<void(int64_t, int64_t)>& fn) {
  if (end <= begin) return;
  if (g_nthreads <= 1 || end - begin <= min_chunk) {
    fn(begin, end);
    return;
  }
  pool()->run(begin, end, fn);
}

}  // namespace xv
