#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace thincount {

//! Worker threads to use: THINCOUNT_THREADS if set and positive, else the
//! hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) across worker threads. Work is handed out
/// by index, so results stored per index are independent of scheduling.
/// The first exception thrown by any call is rethrown after all workers join.
template<class Body>
void parallel_for(std::size_t n, Body&& body)
{
    std::size_t const workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace thincount
