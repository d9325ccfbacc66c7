#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace agora {

/// Runs fn(i) for i in [0, n) on at most max_workers threads. Work is
/// claimed in index order; the first exception (lowest index) is rethrown
/// after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(max_workers, 1, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = n;

    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (first_error) std::rethrow_exception(first_error);
}

/// Ordered map over [0, n): result[i] = fn(i) regardless of completion order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t max_workers, Fn&& fn) {
    std::vector<T> out(n);
    parallel_for(n, max_workers, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace agora
