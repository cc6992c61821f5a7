#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace csbp {

/// Worker cap: CSBP_THREADS when set, else hardware concurrency.
inline unsigned max_workers() {
    if (const char* env = std::getenv("CSBP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs body(i) for i in [0, n) partitioned in contiguous blocks across
/// workers. Each index must write only its own slots; results are combined by
/// the caller in index order, so worker count never changes any output.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(max_workers(), n == 0 ? 1 : n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error = nullptr;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace csbp
