#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tncirc {

// Runs fn(i) for i in [0, count). Each index writes only its own output
// slot, so results are bit-identical regardless of the thread count; any
// reduction over the slots must happen afterwards in index order.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, int threads = 0) {
    if (count == 0) return;
    std::size_t n_threads = threads > 0 ? static_cast<std::size_t>(threads)
                                        : std::thread::hardware_concurrency();
    n_threads = std::max<std::size_t>(1, std::min(n_threads, count));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                // strided assignment keeps per-thread work balanced when
                // cost grows with the index (e.g. larger configs later)
                for (std::size_t i = t; i < count; i += n_threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace tncirc
