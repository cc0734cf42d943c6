#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace acch {

/// Fixed-size worker pool. The calling thread always participates, so a pool
/// of size 1 runs everything inline.
///
/// Work is expressed as a count of independent tasks; which worker runs which
/// task is unspecified, so callers that reduce must write per-task partials
/// and combine them in task order.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads = 1);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const noexcept { return workers_.size() + 1; }

    /// Runs task(i) for every i in [0, count). Blocks until all are done.
    /// The first exception thrown by a task is rethrown here.
    void run(std::size_t count, const std::function<void(std::size_t)>& task);

private:
    void worker_loop();
    void drain(const std::function<void(std::size_t)>& task, std::size_t count);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t)>* task_ = nullptr;
    std::size_t count_ = 0;
    std::size_t next_ = 0;
    std::size_t active_ = 0;
    std::size_t generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

/// Process-wide pool used by the field operators and solvers.
ThreadPool& default_pool();

/// Replaces the process-wide pool. Must not be called while work is running.
void set_num_threads(std::size_t threads);
std::size_t num_threads();

/// Splits [0, n) into a fixed number of contiguous chunks that depends only on
/// n (never on the thread count), and calls body(begin, end) for each chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Number of chunks parallel_for uses for a range of length n.
std::size_t chunk_count(std::size_t n);

/// Deterministic sum of per-chunk partials: partial(begin, end) is evaluated per
/// chunk (as in parallel_for) and the results are combined pairwise in chunk
/// order, so the value is independent of the thread count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& partial);

/// Fixed-order pairwise summation.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace acch
