#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace quditnn {

/// Calls fn(i) for i in [0, n). Work item i always runs exactly once; the
/// assignment to threads is strided. The exception of the lowest-numbered
/// failing thread is rethrown.
template <class Fn> void parallel_for(std::size_t n, unsigned threads, Fn &&fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t t_count = std::min<std::size_t>(threads, n);
    std::vector<std::exception_ptr> errors(t_count);
    {
        std::vector<std::jthread> pool;
        pool.reserve(t_count);
        for (std::size_t t = 0; t < t_count; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += t_count) {
                        fn(i);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace quditnn
