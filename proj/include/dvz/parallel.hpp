#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dvz {

/// Worker count: DVZ_THREADS if set and positive, else hardware concurrency.
inline unsigned default_parallelism()
{
    if (const char* env = std::getenv("DVZ_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Evaluates fn(i) for i in [0, count) on a small pool and returns the results
/// in index order. Each result depends only on its index, so the output does
/// not depend on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn, unsigned workers = default_parallelism())
    -> std::vector<decltype(fn(std::size_t{}))>
{
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(count);
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back(body);
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

} // namespace dvz
