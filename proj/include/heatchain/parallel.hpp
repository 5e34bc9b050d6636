#pragma once

/** @file parallel.hpp
 *  @brief Minimal deterministic fork-join over an index range.
 */

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace heatchain {

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Each index writes
/// only its own output slot, so results never depend on the worker count.
/// The first exception thrown by any task is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn)
{
    workers = std::max(1u, workers);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err)
                    err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned k = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    for (unsigned t = 0; t < k; ++t)
        pool.emplace_back(body);
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

} // namespace heatchain
