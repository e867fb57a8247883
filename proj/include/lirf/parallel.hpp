#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "lirf/config.hpp"

namespace lirf {

// Worker count for independent jobs. LIRF_DETERMINISTIC=1 forces sequential
// execution for byte-exact reproduction sessions.
inline int resolve_jobs(int requested) {
    if (deterministic_mode()) return 1;
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

// Runs fn(0..n-1) over a bounded worker pool. Jobs share nothing; the first
// exception is rethrown after all workers join.
inline void parallel_for_index(int jobs, std::size_t n,
                               const std::function<void(std::size_t)>& fn) {
    jobs = std::min<int>(jobs, int(n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lirf
