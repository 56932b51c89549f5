#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tlamm {

/// Hardware concurrency with a floor of one.
inline int default_thread_count()
{
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/**
 * Calls body(i) for i in [0, count) on up to `threads` workers. Work items are
 * claimed dynamically, so `body` must not depend on which thread runs it. The
 * first exception thrown by any item is rethrown after all workers join.
 */
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(std::min(workers, count));
    for (std::size_t t = 0; t < std::min(workers, count); ++t) {
        pool.emplace_back(run);
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace tlamm
