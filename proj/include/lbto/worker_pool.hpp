#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lbto {

/// Fixed set of worker threads that execute indexed task batches. Task i of a
/// batch always runs on worker i % size(); `run` returns once the whole batch is
/// done, which gives callers a barrier between batches. With zero threads the
/// batch runs inline in index order.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()); }
  void run(int tasks, const std::function<void(int)>& fn);

 private:
  void worker_loop(int worker);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  int tasks_ = 0;
  long generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

/// Worker count: LBTO_THREADS when set, else `requested` when >= 0, else
/// min(ranks, hardware threads).
int resolve_worker_count(int requested, int ranks);

}  // namespace lbto
