#include "lbto/worker_pool.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "lbto/types.hpp"

namespace lbto {

WorkerPool::WorkerPool(int threads) {
  for (int w = 0; w < threads; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run(int tasks, const std::function<void(int)>& fn) {
  if (threads_.empty()) {
    for (int i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::unique_lock lock(mutex_);
  job_ = &fn;
  tasks_ = tasks;
  pending_ = size();
  error_ = nullptr;
  ++generation_;
  start_cv_.notify_all();
  done_cv_.wait(lock, [this] { return pending_ == 0; });
  job_ = nullptr;
  if (error_) std::rethrow_exception(error_);
}

void WorkerPool::worker_loop(int worker) {
  long seen = 0;
  for (;;) {
    const std::function<void(int)>* job = nullptr;
    int tasks = 0;
    {
      std::unique_lock lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
      tasks = tasks_;
    }
    std::exception_ptr err;
    try {
      for (int i = worker; i < tasks; i += size()) (*job)(i);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

int resolve_worker_count(int requested, int ranks) {
  if (const char* env = std::getenv("LBTO_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0)
      throw Error(ErrorCode::InvalidArgument, std::string("LBTO_THREADS must be a nonnegative integer, got ") + env);
    return static_cast<int>(v);
  }
  if (requested >= 0) return requested;
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return std::min(ranks, hw);
}

}  // namespace lbto
