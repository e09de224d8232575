#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace orgnet {

struct ExecPolicy {
    std::size_t threads = 1;
    /// Forces sequential reductions so results do not depend on thread count.
    bool deterministic = false;
};

/// Calls fn(chunk, begin, end) over `chunks` contiguous slices of [0, n).
/// Chunk k always covers the same slice for a given (n, chunks).
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunks, Fn&& fn) {
    chunks = std::max<std::size_t>(1, std::min(chunks, n));
    if (chunks == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(chunks);
    workers.reserve(chunks - 1);
    auto run = [&](std::size_t k) {
        const std::size_t begin = n * k / chunks;
        const std::size_t end = n * (k + 1) / chunks;
        try {
            fn(k, begin, end);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    for (std::size_t k = 1; k < chunks; ++k) workers.emplace_back(run, k);
    run(0);
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Element-wise loop for work whose items are independent.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

}  // namespace orgnet
