#include "acch/parallel.hpp"

#include <algorithm>
#include <memory>

namespace acch {

ThreadPool::ThreadPool(std::size_t threads)
{
    const std::size_t extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (std::size_t i = 0; i < extra; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool()
{
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : workers_)
        t.join();
}

void ThreadPool::drain(const std::function<void(std::size_t)>& task, std::size_t count)
{
    for (;;) {
        std::size_t i;
        {
            std::lock_guard lock(mutex_);
            if (next_ >= count || error_)
                return;
            i = next_++;
        }
        try {
            task(i);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_)
                error_ = std::current_exception();
        }
    }
}

void ThreadPool::worker_loop()
{
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t)>* task;
        std::size_t count;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_)
                return;
            seen = generation_;
            if (!task_)
                continue;
            task = task_;
            count = count_;
            ++active_;
        }
        drain(*task, count);
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void ThreadPool::run(std::size_t count, const std::function<void(std::size_t)>& task)
{
    if (count == 0)
        return;
    if (workers_.empty() || count == 1) {
        for (std::size_t i = 0; i < count; ++i)
            task(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        task_ = &task;
        count_ = count;
        next_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    drain(task, count);
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return active_ == 0 && (next_ >= count_ || error_); });
        task_ = nullptr;
        error = error_;
        error_ = nullptr;
    }
    if (error)
        std::rethrow_exception(error);
}

namespace {

std::unique_ptr<ThreadPool>& pool_slot()
{
    static std::unique_ptr<ThreadPool> pool = std::make_unique<ThreadPool>(1);
    return pool;
}

constexpr std::size_t kMinChunk = 2048;
constexpr std::size_t kMaxChunks = 64;

}  // namespace

ThreadPool& default_pool() { return *pool_slot(); }

void set_num_threads(std::size_t threads)
{
    threads = std::max<std::size_t>(threads, 1);
    if (pool_slot()->size() != threads)
        pool_slot() = std::make_unique<ThreadPool>(threads);
}

std::size_t num_threads() { return pool_slot()->size(); }

std::size_t chunk_count(std::size_t n)
{
    if (n == 0)
        return 0;
    return std::min(kMaxChunks, (n + kMinChunk - 1) / kMinChunk);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body)
{
    const std::size_t chunks = chunk_count(n);
    default_pool().run(chunks, [&](std::size_t c) {
        body(c * n / chunks, (c + 1) * n / chunks);
    });
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& partial)
{
    const std::size_t chunks = chunk_count(n);
    std::vector<double> partials(chunks, 0.0);
    default_pool().run(chunks, [&](std::size_t c) {
        partials[c] = partial(c * n / chunks, (c + 1) * n / chunks);
    });
    return pairwise_sum(partials.data(), partials.size());
}

double pairwise_sum(const double* values, std::size_t n)
{
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += values[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

}  // namespace acch
