#include "tandem/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace tandem {

namespace {

class WorkerPool {
 public:
  explicit WorkerPool(int n_threads) : n_threads_(n_threads) {
    for (int i = 0; i < n_threads_ - 1; ++i) {
      workers_.emplace_back([this] { worker_loop(); });
    }
  }

  ~WorkerPool() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      shutdown_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  int size() const { return n_threads_; }

  void run(int n, const std::function<void(int)>& task) {
    if (n <= 0) return;
    if (n_threads_ == 1 || n == 1) {
      for (int i = 0; i < n; ++i) task(i);
      return;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      task_ = &task;
      n_tasks_ = n;
      failure_ = nullptr;
      next_.store(0, std::memory_order_relaxed);
      remaining_.store(n, std::memory_order_relaxed);
      ++generation_;
    }
    cv_.notify_all();
    drain();
    // Wait for stragglers still inside task().
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [this] { return remaining_.load() == 0; });
    task_ = nullptr;
    if (failure_) {
      std::exception_ptr failure = failure_;
      failure_ = nullptr;
      lock.unlock();
      std::rethrow_exception(failure);
    }
  }

 private:
  void drain() {
    while (true) {
      int i = next_.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks_) break;
      try {
        (*task_)(i);
      } catch (...) {
        // The first failure is rethrown on the calling thread; the remaining
        // tasks still run so the pool stays consistent.
        std::lock_guard<std::mutex> lock(mutex_);
        if (!failure_) failure_ = std::current_exception();
      }
      if (remaining_.fetch_sub(1) == 1) done_cv_.notify_all();
    }
  }

  void worker_loop() {
    uint64_t seen = 0;
    while (true) {
      {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [this, seen] { return shutdown_ || generation_ != seen; });
        if (shutdown_) return;
        seen = generation_;
      }
      drain();
    }
  }

  int n_threads_;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* task_ = nullptr;
  std::exception_ptr failure_ = nullptr;
  int n_tasks_ = 0;
  std::atomic<int> next_{0};
  std::atomic<int> remaining_{0};
  uint64_t generation_ = 0;
  bool shutdown_ = false;
};

int g_requested_threads = 0;
WorkerPool* g_pool = nullptr;

int resolve_count(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

WorkerPool& pool() {
  int want = resolve_count(g_requested_threads);
  if (g_pool == nullptr || g_pool->size() != want) {
    delete g_pool;
    g_pool = new WorkerPool(want);
  }
  return *g_pool;
}

}  // namespace

void set_worker_count(int n) { g_requested_threads = n; }

int worker_count() { return pool().size(); }

void parallel_for(int n, const std::function<void(int)>& task) {
  pool().run(n, task);
}

}  // namespace tandem
