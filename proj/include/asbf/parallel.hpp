#pragma once
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace asbf {

/// Runs fn(0..n-1) over n_threads workers with a strided index assignment.
/// Results must be written to per-index slots; because every random stream is
/// derived from (seed, index), the outcome is identical for any thread count.
inline void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
    if (n_threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(n_threads, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (int i = t; i < n; i += workers) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace asbf
