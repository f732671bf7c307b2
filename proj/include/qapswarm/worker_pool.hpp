#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qapswarm {

/// Fixed set of worker threads running bulk-synchronous parallel-for loops.
/// parallel_for returns only after every chunk has finished, so consecutive
/// calls are separated by a full barrier.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t workers) : workers_(std::max<std::size_t>(1, workers)) {
        threads_.reserve(workers_ - 1);
        for (std::size_t w = 1; w < workers_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        wake_.notify_all();
        for (auto& t : threads_) t.join();
    }

    std::size_t workers() const { return workers_; }

    /// Calls body(begin, end) over a static partition of [0, count) into contiguous chunks.
    void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
        if (count == 0) return;
        if (workers_ == 1) {
            body(0, count);
            return;
        }
        {
            std::lock_guard lock(mutex_);
            body_ = &body;
            count_ = count;
            pending_ = workers_ - 1;
            error_ = nullptr;
            ++generation_;
        }
        wake_.notify_all();

        std::exception_ptr local;
        try {
            run_chunk(0);
        } catch (...) {
            local = std::current_exception();
        }

        std::unique_lock lock(mutex_);
        done_.wait(lock, [this] { return pending_ == 0; });
        body_ = nullptr;
        if (local) std::rethrow_exception(local);
        if (error_) std::rethrow_exception(error_);
    }

private:
    void run_chunk(std::size_t w) {
        const std::size_t per = count_ / workers_;
        const std::size_t extra = count_ % workers_;
        const std::size_t begin = w * per + std::min(w, extra);
        const std::size_t end = begin + per + (w < extra ? 1 : 0);
        if (begin < end) (*body_)(begin, end);
    }

    void worker_loop(std::size_t w) {
        std::size_t seen = 0;
        for (;;) {
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
                if (stopping_) return;
                seen = generation_;
            }
            std::exception_ptr err;
            try {
                run_chunk(w);
            } catch (...) {
                err = std::current_exception();
            }
            {
                std::lock_guard lock(mutex_);
                if (err && !error_) error_ = err;
                if (--pending_ == 0) done_.notify_one();
            }
        }
    }

    std::size_t workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::size_t count_ = 0;
    std::size_t pending_ = 0;
    std::size_t generation_ = 0;
    bool stopping_ = false;
    std::exception_ptr error_;
};

}  // namespace qapswarm
