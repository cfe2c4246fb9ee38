#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace dentgan {

/// Worker cap from DENTGAN_THREADS; 0 or 1 means the sequential reference
/// path. Unset defaults to the hardware concurrency.
inline std::size_t worker_count() {
    static const std::size_t n = [] {
        if (const char* env = std::getenv("DENTGAN_THREADS")) {
            try {
                return static_cast<std::size_t>(std::stoul(env));
            } catch (...) {
                return std::size_t{0};
            }
        }
        return static_cast<std::size_t>(std::max(1u, std::thread::hardware_concurrency()));
    }();
    return n;
}

/// Calls fn(i) for i in [0, n). Every index must write disjoint memory, so
/// the result is independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_chunk = 1) {
    const std::size_t workers = std::min(worker_count(), n / std::max<std::size_t>(min_chunk, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace dentgan
