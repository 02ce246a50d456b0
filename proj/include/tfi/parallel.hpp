#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tfi {

/// Runs body(i) for i in [0, count) on `workers` threads pulling from a shared
/// counter. Each index writes only its own output slot, so results do not
/// depend on the worker count. If any body throws, the remaining work is
/// abandoned and the exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body)
{
    workers = std::max(1U, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count)
                return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::jthread> pool;
    const unsigned spawned = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    pool.reserve(spawned);
    for (unsigned w = 0; w < spawned; ++w)
        pool.emplace_back(worker);
    pool.clear(); // joins
    if (error)
        std::rethrow_exception(error);
}

} // namespace tfi
